//! A single blank injected into a valid row eats the row from the right:
//! after n steps every site in [k - n, k] is blank and nothing else is.
//!
//! cargo run --example blank_cone

use quasigas::ca1d::{reference_from_patch, reference_patch_size, run1d, LocalRule};
use quasigas::tileset::{find_patch, TileSet};

fn main() -> quasigas::Result<()> {
    let ts = TileSet::fixture("ammann16")?;
    let rule = LocalRule::from_tileset(&ts)?;
    let (sites, steps, k) = (20, 10, 14);

    let (w, h) = reference_patch_size(sites, steps);
    let patch = find_patch(&ts, w, h, 10_000_000)?.found().expect("patch within budget");
    let reference = reference_from_patch(&patch, sites, steps)?;

    let mut x = reference.initial();
    x.cells[k] = rule.blank();
    let traj = run1d(&rule, &x, steps)?;
    print!("{}", traj.to_text(rule.alphabet()));

    let blanks: Vec<usize> = (0..=steps)
        .map(|t| (0..sites).filter(|&i| rule.alphabet().is_blank(traj.get(t, i))).count())
        .collect();
    println!("blanks per step: {blanks:?}");
    Ok(())
}
