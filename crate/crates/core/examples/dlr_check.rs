//! On a tiny torus, the conditional law of each cell built from the seven
//! local factors matches the one read off the full path measure. Flipping
//! the sign of the energy breaks the match.
//!
//! cargo run --example dlr_check

use quasigas::cli::dlr_check;
use quasigas::tileset::TileSet;

fn main() -> anyhow::Result<()> {
    let ts = TileSet::fixture("ammann16")?;
    for epsilon in [0.1, 0.3] {
        for seed in 0..3 {
            let good = dlr_check(&ts, epsilon, [2, 2, 2], 2, seed, false)?;
            let bad = dlr_check(&ts, epsilon, [2, 2, 2], 2, seed, true)?;
            println!("epsilon={epsilon} seed={seed} residual={good:.2e} mis-signed={bad:.2e}");
        }
    }
    Ok(())
}
