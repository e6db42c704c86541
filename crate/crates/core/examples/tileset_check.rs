//! Runs the tile-set gates on the bundled fixture (or a tile file given as
//! the first argument) and prints a small valid patch.
//!
//! cargo run --example tileset_check [-- path/to/set.tiles]

use quasigas::tileset::{check_deterministic, find_patch, find_torus_tiling, Direction, RhoTable, SearchOutcome, TileSet};

fn main() -> quasigas::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "ammann16".into());
    let ts = TileSet::load(&name)?;
    println!("{}: {} tiles", ts.name(), ts.len());

    for dir in [Direction::NW, Direction::SE] {
        let report = check_deterministic(&ts, dir);
        println!("{dir}-deterministic: {}", report.is_deterministic());
        for v in report.violations.iter().take(3) {
            println!("  colours {:?} shared by tiles {:?}", v.colors, v.tiles);
        }
    }

    let rho = RhoTable::new(&ts)?;
    let defined = (0..ts.len())
        .flat_map(|a| (0..ts.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| matches!(rho.get(a, b), Ok(Some(_))))
        .count();
    println!("successor table: {defined} of {} pairs defined", ts.len() * ts.len());

    for p in 1..=4 {
        for q in 1..=4 {
            if let Some(t) = find_torus_tiling(&ts, p, q)? {
                println!("periodic {p}x{q} tiling found:\n{}", t.to_text());
                return Ok(());
            }
        }
    }
    println!("no periodic tiling with periods up to 4");

    match find_patch(&ts, 10, 6, 10_000_000)? {
        SearchOutcome::Found(p) => print!("a 10x6 patch:\n{}", p.to_text()),
        other => println!("no 10x6 patch: {other:?}"),
    }
    Ok(())
}
