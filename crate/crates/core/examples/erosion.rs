//! Flips a few cells of a cloned trajectory and watches the noiseless
//! stacked automaton wash them out.
//!
//! cargo run --example erosion

use quasigas::ca1d::LocalRule;
use quasigas::stack3d::{erosion_probe, Flip};
use quasigas::sweep::{build_reference, search_reference_patch, BoundaryKind, InitSpec};
use quasigas::tileset::TileSet;

fn main() -> quasigas::Result<()> {
    let ts = TileSet::fixture("ammann16")?;
    let rule = LocalRule::from_tileset(&ts)?;
    let (extents, steps) = ([16, 16, 16], 12);
    let patch = search_reference_patch(&ts, extents[2], steps, 10_000_000)?;
    let reference = build_reference(&rule, &InitSpec::Clone(patch), extents, steps, BoundaryKind::Reference)?;
    let x = reference.line.initial();

    let sets: Vec<Vec<[usize; 3]>> = vec![
        vec![[8, 8, 8]],
        vec![[4, 4, 4], [12, 3, 9]],
        vec![[7, 7, 7], [7, 8, 7], [8, 7, 7], [8, 8, 7]],
        (0..8).map(|k| [5 + k % 2, 5 + k / 2 % 2, 5 + k / 4]).collect(),
    ];
    for cells in sets {
        let flips: Vec<Flip> = cells
            .iter()
            .map(|&[a, b, i]| Flip { a, b, i, symbol: (x.cells[i] + 1) % 16 })
            .collect();
        let outcome = erosion_probe(&rule, &x, [extents[0], extents[1]], &flips, 1, steps)?;
        println!("{} flips -> {outcome:?}", flips.len());
    }
    Ok(())
}
