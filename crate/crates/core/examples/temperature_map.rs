//! Tabulates the map from inverse temperature to noise level and checks the
//! energy identity on an error-free and an erroneous pattern.
//!
//! cargo run --example temperature_map

use quasigas::ca1d::LocalRule;
use quasigas::fmt::sig12;
use quasigas::gibbs::{phi, temperature_map, EnergyLevels};
use quasigas::pca::{f_tilde, NoiseParams};
use quasigas::tileset::TileSet;

fn main() -> quasigas::Result<()> {
    let rule = LocalRule::from_tileset(&TileSet::fixture("ammann16")?)?;
    let m = rule.alphabet().size();
    let epsilon0 = 0.5;

    println!("beta,alpha,epsilon,energy_gap");
    for beta in [0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
        let tm = temperature_map(epsilon0, beta, m)?;
        let gap = EnergyLevels::new(&NoiseParams::new(tm.epsilon, m)?).gap();
        println!("{beta},{},{},{}", sig12(tm.alpha), sig12(tm.epsilon), sig12(gap));
    }

    let nbhd = [0, 4, 0, 12, 12, 8];
    let det = f_tilde(&rule, &nbhd);
    let base = NoiseParams::new(epsilon0, m)?;
    let tm = temperature_map(epsilon0, 2.0, m)?;
    let hot = NoiseParams::new(tm.epsilon, m)?;
    for centre in [det, (det + 1) % m as u8] {
        let mut p = [0; 7];
        p[..6].copy_from_slice(&nbhd);
        p[6] = centre;
        let lhs = 2.0 * phi(&rule, &base, &p);
        let rhs = tm.alpha + phi(&rule, &hot, &p);
        println!("centre={centre}: beta*phi={lhs:.12} alpha+phi={rhs:.12}");
    }
    Ok(())
}
