//! Stacking a line into a 3D block and stepping the stacked automaton gives
//! the same block as stepping the line and stacking afterwards.
//!
//! cargo run --example commuting_clone

use quasigas::ca1d::{step1d, Boundary, Config1D, LocalRule};
use quasigas::stack3d::{clone3d, stacked_step, toom_correct};
use quasigas::tileset::TileSet;

fn main() -> quasigas::Result<()> {
    let rule = LocalRule::from_tileset(&TileSet::fixture("ammann16")?)?;
    let cells = vec![0, 12, 0, 12, 15, 0, 12, 0, 16, 3, 7, 11];
    let mut x = Config1D::new(rule.alphabet(), cells, Boundary::Periodic)?;
    let mut y = clone3d(&x, 4, 5)?;
    assert_eq!(toom_correct(&y), y, "majority voting leaves clones alone");

    for t in 1..=6 {
        x = step1d(&rule, &x)?;
        y = stacked_step(&rule, &y)?;
        let agree = y == clone3d(&x, 4, 5)?;
        println!("t={t} line={:?} commutes={agree}", x.cells);
    }
    Ok(())
}
