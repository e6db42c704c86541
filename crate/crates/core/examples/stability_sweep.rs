//! Noise-stability sweep: disagreement with the noiseless reference over a
//! grid of noise levels, written as CSV.
//!
//! cargo run --release --example stability_sweep

use quasigas::analysis::Metric;
use quasigas::ca1d::LocalRule;
use quasigas::sweep::{build_reference, run_stability, search_reference_patch, spearman, stability_csv, BoundaryKind, InitSpec, StabilityConfig};
use quasigas::tileset::TileSet;

fn main() -> quasigas::Result<()> {
    let ts = TileSet::fixture("ammann16")?;
    let rule = LocalRule::from_tileset(&ts)?;
    let (extents, steps) = ([16, 16, 16], 64);
    let patch = search_reference_patch(&ts, extents[2], steps, 100_000_000)?;
    let reference = build_reference(&rule, &InitSpec::Clone(patch), extents, steps, BoundaryKind::Reference)?;

    let cfg = StabilityConfig {
        extents,
        steps,
        epsilons: vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05],
        seeds: (0..5).collect(),
        r: 2,
        metric: Metric::L1,
        report_every: Some(32),
    };
    let rows = run_stability(&rule, &reference, &cfg)?;
    print!("{}", stability_csv(&[("size".into(), "16x16x16".into()), ("steps".into(), "64".into())], &rows));

    let last: Vec<_> = rows.iter().filter(|r| r.t == steps).collect();
    let eps: Vec<f64> = last.iter().map(|r| r.epsilon).collect();
    let rate: Vec<f64> = last.iter().map(|r| r.disagreement_rate).collect();
    eprintln!("spearman(epsilon, rate) = {:.4}", spearman(&eps, &rate));
    Ok(())
}
