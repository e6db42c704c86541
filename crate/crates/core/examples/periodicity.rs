//! Period scan of a cloned reference window: the stacked axes are periods,
//! nothing involving space along the line or time is. A field of modal
//! symbols over noisy samples recovers the reference.
//!
//! cargo run --release --example periodicity

use quasigas::analysis::{empirical_majority_field, periodicity_scan};
use quasigas::ca1d::LocalRule;
use quasigas::pca::{sample_trajectory, NoiseParams, RngPolicy};
use quasigas::sweep::{build_reference, search_reference_patch, BoundaryKind, InitSpec};
use quasigas::tileset::TileSet;

fn main() -> quasigas::Result<()> {
    let ts = TileSet::fixture("ammann16")?;
    let rule = LocalRule::from_tileset(&ts)?;
    let (extents, steps) = ([8, 8, 16], 32);
    let patch = search_reference_patch(&ts, extents[2], steps, 10_000_000)?;
    let reference = build_reference(&rule, &InitSpec::Clone(patch.clone()), extents, steps, BoundaryKind::Reference)?;

    let report = periodicity_scan(&reference.trajectory, [2, 2, 4, 4]);
    let periods: Vec<_> = report.periods().collect();
    println!("{} vectors tested, periods: {periods:?}", report.entries.len());

    let flat = periodicity_scan(&patch, [0, 0, 4, 4]);
    println!("patch periods up to 4: {:?}", flat.periods().collect::<Vec<_>>());

    let np = NoiseParams::for_rule(&rule, 0.002)?;
    let samples = (0..20)
        .map(|seed| sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(seed), steps))
        .collect::<quasigas::Result<Vec<_>>>()?;
    let field = empirical_majority_field(&samples)?;
    let z = &reference.trajectory;
    let [na, nb, nl, nt] = z.extents4();
    let mut mismatches = 0;
    for a in 0..na {
        for b in 0..nb {
            for i in 0..nl {
                for t in 0..nt {
                    mismatches += usize::from(field.modal[field.index([a, b, i, t])] != z.get(a, b, i, t));
                }
            }
        }
    }
    let min = field.frequency.iter().copied().fold(1.0, f64::min);
    println!("modal field vs reference: {mismatches} mismatches, lowest modal frequency {min:.2}");
    Ok(())
}
