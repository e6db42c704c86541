//! Samples noisy trajectories and compares the measured violation rate with
//! epsilon.
//!
//! cargo run --release --example pca_sample

use quasigas::ca1d::LocalRule;
use quasigas::pca::{error_set, sample_trajectory, NoiseParams, RngPolicy};
use quasigas::sweep::{build_reference, search_reference_patch, BoundaryKind, InitSpec};
use quasigas::tileset::TileSet;

fn main() -> quasigas::Result<()> {
    let ts = TileSet::fixture("ammann16")?;
    let rule = LocalRule::from_tileset(&ts)?;
    let (extents, steps) = ([8, 8, 16], 16);
    let patch = search_reference_patch(&ts, extents[2], steps, 10_000_000)?;
    let reference = build_reference(&rule, &InitSpec::Clone(patch), extents, steps, BoundaryKind::Reference)?;

    println!("epsilon,seed,volume,n_errors,rate");
    for epsilon in [0.002, 0.01, 0.05] {
        let np = NoiseParams::for_rule(&rule, epsilon)?;
        for seed in 0..3 {
            let x = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(seed), steps)?;
            let errors = error_set(&rule, &x);
            let rate = errors.cells.len() as f64 / errors.checked as f64;
            println!("{epsilon},{seed},{},{},{rate:.5}", errors.checked, errors.cells.len());
        }
    }

    // Same seed, same trajectory.
    let np = NoiseParams::for_rule(&rule, 0.05)?;
    let a = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(7), steps)?;
    let b = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(7), steps)?;
    assert_eq!(a, b);
    Ok(())
}
