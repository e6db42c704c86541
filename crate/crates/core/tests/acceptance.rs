//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Optional arguments select criteria by
//! number or name substring.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::time::Instant;

use quasigas::analysis::{clusters, disagreements, sea_island_check, DisagreementSet, MajorityAccumulator, Metric};
use quasigas::ca1d::{reference_from_patch, run1d, step1d, Alphabet, Boundary, Config1D, LocalRule};
use quasigas::cli::{stability_sweep, RunConfig};
use quasigas::gibbs::{gibbs_conditional, is_error_free, phi, temperature_map, SupportPattern};
use quasigas::pca::{error_set, f_tilde, sample_trajectory, NoiseParams, RngPolicy, SpaceTimeConfig};
use quasigas::stack3d::{clone3d, erosion_probe, stacked_step, Config3D, ErosionOutcome, Flip};
use quasigas::sweep::{build_reference, run_stability, search_reference_patch, spearman, BoundaryKind, InitSpec, Reference, StabilityConfig};
use quasigas::tileset::{check_deterministic, find_patch, find_torus_tiling, Direction, SearchOutcome};
use quasigas::Symbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::{ammann, bfs_partition, big_patch, oracle_spanning, Torus, BIG_PATCH};

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rule() -> LocalRule {
    LocalRule::from_tileset(&ammann()).unwrap()
}

const SPACE: [usize; 3] = [16, 16, 16];
const HORIZON: usize = 64;

fn stability_reference(rule: &LocalRule) -> Reference {
    let patch = search_reference_patch(&ammann(), SPACE[2], HORIZON, 100_000_000).unwrap();
    build_reference(rule, &InitSpec::Clone(patch), SPACE, HORIZON, BoundaryKind::Reference).unwrap()
}

fn tile_gates() -> Verdict {
    let ts = ammann();
    let nw = check_deterministic(&ts, Direction::NW).is_deterministic();
    let se = check_deterministic(&ts, Direction::SE).is_deterministic();
    let torus: Vec<(usize, usize)> = (1..=4)
        .flat_map(|p| (1..=4).map(move |q| (p, q)))
        .filter(|&(p, q)| find_torus_tiling(&ts, p, q).unwrap().is_some())
        .collect();
    let patch = match find_patch(&ts, 8, 8, 10_000_000).unwrap() {
        SearchOutcome::Found(p) => p.is_valid(&ts),
        _ => false,
    };
    Verdict::new(
        ts.len() == 16 && nw && se && torus.is_empty() && patch,
        format!("tiles={} nw={nw} se={se} torus_tilings={torus:?} patch8x8={patch}", ts.len()),
    )
}

fn blank_dynamics() -> Verdict {
    let rule = rule();
    let blank = rule.blank();
    let patch = big_patch();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sites = BIG_PATCH.1 - 1;
    let mut bad = Vec::new();
    for case in 0..100 {
        let n = rng.gen_range(1..=16);
        let (w, h) = (n + sites + 1, sites + 1);
        let col = rng.gen_range(0..=BIG_PATCH.0 - w);
        let sub = patch.sub_patch(col, 0, w, h).unwrap();
        let reference = reference_from_patch(&sub, sites, n).unwrap();
        let k = rng.gen_range(0..sites);
        let mut x = reference.initial();
        x.cells[k] = blank;
        let traj = run1d(&rule, &x, n).unwrap();
        for s in 0..=n {
            for l in 0..sites {
                let in_cone = l <= k && l + s >= k;
                let got = traj.get(s, l);
                let ok = if in_cone { got == blank } else { got == reference.get(s, l) && got != blank };
                if !ok {
                    bad.push((case, s, l));
                }
            }
        }
        let cone: BTreeSet<(isize, usize)> =
            quasigas::ca1d::blank_cone(k as isize, 0, n).into_iter().filter(|&(l, _)| l >= 0).collect();
        let seen: BTreeSet<(isize, usize)> = (0..=n)
            .flat_map(|s| (0..sites).map(move |l| (l, s)))
            .filter(|&(l, s)| traj.get(s, l) == blank)
            .map(|(l, s)| (l as isize, s))
            .collect();
        if cone != seen {
            bad.push((case, usize::MAX, k));
        }
    }
    Verdict::new(bad.is_empty(), format!("100 cases, {} mismatching cells", bad.len()))
}

fn random_boundary(rng: &mut ChaCha8Rng, alphabet: &Alphabet, steps: usize) -> Boundary {
    match rng.gen_range(0..3) {
        0 => Boundary::Periodic,
        1 => Boundary::FeedBlank,
        _ => Boundary::stream((0..steps).map(|_| rng.gen_range(0..alphabet.size() as Symbol)).collect::<Vec<_>>()),
    }
}

fn commuting_diagram() -> Verdict {
    let rule = rule();
    let alphabet = *rule.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let steps = 4;
    let mut failures = 0;
    for _ in 0..200 {
        let (na, nb, nl) = (rng.gen_range(1..=8), rng.gen_range(1..=8), rng.gen_range(1..=32));
        let cells = (0..nl).map(|_| rng.gen_range(0..alphabet.size() as Symbol)).collect();
        let boundary = random_boundary(&mut rng, &alphabet, steps);
        let mut x = Config1D::new(&alphabet, cells, boundary).unwrap();
        let mut y = clone3d(&x, na, nb).unwrap();
        for _ in 0..steps {
            x = step1d(&rule, &x).unwrap();
            y = stacked_step(&rule, &y).unwrap();
            if y != clone3d(&x, na, nb).unwrap() {
                failures += 1;
                break;
            }
        }
    }
    Verdict::new(failures == 0, format!("200 configs x {steps} steps, {failures} failures"))
}

fn erosion() -> Verdict {
    let ts = ammann();
    let rule = rule();
    let (nl, steps, margin) = (SPACE[2], 12, 1);
    let patch = search_reference_patch(&ts, nl, steps, 10_000_000).unwrap();
    let x = reference_from_patch(&patch, nl, steps).unwrap().initial();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0;
    let mut failed = 0;
    for set in 0..50 {
        let size = rng.gen_range(1..=8);
        let mut seen = BTreeSet::new();
        while seen.len() < size {
            let pos: [usize; 3] = if set % 2 == 0 {
                std::array::from_fn(|_| rng.gen_range(margin..SPACE[0] - margin))
            } else {
                // Clustered sets: all flips in a 5^3 box.
                let c = [6usize, 8, 7];
                std::array::from_fn(|k| c[k] + rng.gen_range(0..5) - 2)
            };
            seen.insert(pos);
        }
        let flips: Vec<Flip> = seen
            .into_iter()
            .map(|[a, b, i]| {
                let current = x.cells[i];
                let mut symbol = rng.gen_range(0..rule.alphabet().size() as Symbol - 1);
                if symbol >= current {
                    symbol += 1;
                }
                Flip { a, b, i, symbol }
            })
            .collect();
        match erosion_probe(&rule, &x, [SPACE[0], SPACE[1]], &flips, margin, steps).unwrap() {
            ErosionOutcome::Recovered { t } => worst = worst.max(t),
            ErosionOutcome::NotRecovered { .. } => failed += 1,
        }
    }
    Verdict::new(failed == 0, format!("50 flip sets, {failed} not recovered, slowest recovery t={worst}"))
}

fn noise_rate() -> Verdict {
    let rule = rule();
    let ts = ammann();
    let steps = 16;
    let patch = search_reference_patch(&ts, SPACE[2], steps, 10_000_000).unwrap();
    let reference = build_reference(&rule, &InitSpec::Clone(patch), SPACE, steps, BoundaryKind::Reference).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for eps in [0.002, 0.01, 0.05] {
        let np = NoiseParams::for_rule(&rule, eps).unwrap();
        let (errors, checked) = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let x = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(seed), steps).unwrap();
                let e = error_set(&rule, &x);
                (e.cells.len(), e.checked)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let freq = errors as f64 / checked as f64;
        let sigma = (eps * (1.0 - eps) / checked as f64).sqrt();
        let z = (freq - eps) / sigma;
        pass &= z.abs() <= 3.0;
        detail.push(format!("eps={eps}: freq={freq:.6} z={z:+.2}"));
    }
    Verdict::new(pass, detail.join("; "))
}

fn stability_curve() -> Verdict {
    let rule = rule();
    let reference = stability_reference(&rule);
    let np = NoiseParams::for_rule(&rule, 0.002).unwrap();
    let per_seed: Vec<(f64, bool)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let x = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(seed), HORIZON).unwrap();
            let rate = disagreements(&x, &reference.trajectory).unwrap().rate();
            let v = sea_island_check(&x, &reference.trajectory, 2, Metric::L1, usize::MAX).unwrap();
            (rate, v.pass)
        })
        .collect();
    let max_rate = per_seed.iter().map(|p| p.0).fold(0.0, f64::max);
    let passes = per_seed.iter().filter(|p| p.1).count();

    let grid = vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05];
    let cfg = StabilityConfig {
        extents: SPACE,
        steps: HORIZON,
        epsilons: grid,
        seeds: (0..20).collect(),
        r: 2,
        metric: Metric::L1,
        report_every: None,
    };
    let rows = run_stability(&rule, &reference, &cfg).unwrap();
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let rates: Vec<f64> = rows.iter().map(|r| r.disagreement_rate).collect();
    let rho = spearman(&eps, &rates);
    Verdict::new(
        max_rate < 0.1 && passes * 10 >= 9 * 20 && rho > 0.9,
        format!("max_rate={max_rate:.5} sea_island={passes}/20 spearman={rho:.4}"),
    )
}

fn support_pattern(rule: &LocalRule, error: bool) -> SupportPattern {
    let nbhd = [0, 4, 0, 12, 12, 8];
    let det = f_tilde(rule, &nbhd);
    let mut p = [0; 7];
    p[..6].copy_from_slice(&nbhd);
    p[6] = if error { (det + 1) % rule.alphabet().size() as Symbol } else { det };
    p
}

fn temperature() -> Verdict {
    let rule = rule();
    let m = rule.alphabet().size();
    let mut worst = 0.0f64;
    let mut monotone = true;
    for e0 in [0.1, 0.5, 0.9, 0.3] {
        let tm = temperature_map(e0, 1.0, m).unwrap();
        worst = worst.max(tm.alpha.abs()).max((tm.epsilon - e0).abs());
    }
    let half = temperature_map(0.5, 2.0, m).unwrap();
    worst = worst.max((half.epsilon - 1.0 / 17.0).abs());
    let free = support_pattern(&rule, false);
    let wrong = support_pattern(&rule, true);
    let classes_ok = is_error_free(&rule, &free) && !is_error_free(&rule, &wrong);
    for e0 in [0.1, 0.5, 0.9] {
        let betas: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
        let eps: Vec<f64> = betas.iter().map(|&b| temperature_map(e0, b, m).unwrap().epsilon).collect();
        monotone &= eps.windows(2).all(|w| w[1] < w[0]);
        let base = NoiseParams::new(e0, m).unwrap();
        for &beta in &betas {
            let tm = temperature_map(e0, beta, m).unwrap();
            let np = NoiseParams::new(tm.epsilon, m).unwrap();
            for p in [&free, &wrong] {
                worst = worst.max((beta * phi(&rule, &base, p) - (tm.alpha + phi(&rule, &np, p))).abs());
            }
        }
    }
    Verdict::new(
        worst < 1e-12 && monotone && classes_ok,
        format!("max_abs_error={worst:.3e} strictly_decreasing={monotone}"),
    )
}

fn torus_of(x: &SpaceTimeConfig) -> Torus {
    Torus { dims: x.space_extents(), rows: (0..=x.steps()).map(|t| x.row(t).to_vec()).collect() }
}

fn dlr() -> Verdict {
    let ts = ammann();
    let rule = rule();
    let m = rule.alphabet().size();
    let dims = [2, 2, 2];
    let steps = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut worst_z = 0.0f64;
    for eps in [0.1, 0.3] {
        let np = NoiseParams::new(eps, m).unwrap();
        let init_cells: Vec<Symbol> = (0..8).map(|_| rng.gen_range(0..m as Symbol)).collect();
        let init = Config3D::new(dims, init_cells, Boundary::Periodic).unwrap();
        let mut windows: Vec<SpaceTimeConfig> =
            (0..4).map(|s| sample_trajectory(&rule, &init, &np, &RngPolicy::new(s), steps).unwrap()).collect();
        let zero = NoiseParams::new(0.0, m).unwrap();
        let reference = sample_trajectory(&rule, &init, &zero, &RngPolicy::new(0), steps).unwrap();
        windows.push(reference.clone());
        for x in &windows {
            let oracle = torus_of(x);
            for t in 1..=steps {
                for a in 0..2 {
                    for b in 0..2 {
                        for i in 0..2 {
                            let local = gibbs_conditional(&rule, x, [a, b, i, t], eps).unwrap();
                            let exact = oracle.path_conditional(&ts, eps, [a, b, i, t]);
                            for (p, q) in local.iter().zip(&exact) {
                                worst = worst.max((p - q).abs());
                            }
                        }
                    }
                }
            }
        }

        // Monte Carlo: condition on every other cell matching the reference.
        let cell = [0, 0, 0, 1];
        let predicted = gibbs_conditional(&rule, &reference, cell, eps).unwrap();
        let samples: u64 = if eps < 0.2 { 40_000 } else { 400_000 };
        let counts = (0..samples)
            .into_par_iter()
            .fold(
                || vec![0u64; m],
                |mut acc, seed| {
                    let x = sample_trajectory(&rule, &init, &np, &RngPolicy::new(1_000 + seed), steps).unwrap();
                    let mut y = x.clone();
                    y.set(cell[0], cell[1], cell[2], cell[3], reference.get(cell[0], cell[1], cell[2], cell[3]));
                    if y == reference {
                        acc[x.get(cell[0], cell[1], cell[2], cell[3]) as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(|| vec![0u64; m], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        let n: u64 = counts.iter().sum();
        for (s, &c) in counts.iter().enumerate() {
            let p = predicted[s];
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            worst_z = worst_z.max(((c as f64 / n as f64) - p).abs() / sigma);
        }
    }
    Verdict::new(
        worst < 1e-10 && worst_z <= 3.0,
        format!("max_residual={worst:.3e} monte_carlo_max_z={worst_z:.2}"),
    )
}

fn cluster_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..100 {
        let extents: [usize; 4] = std::array::from_fn(|_| rng.gen_range(1..=12));
        let volume: usize = extents.iter().product();
        let size = rng.gen_range(0..=200.min(volume));
        let mut cells = BTreeSet::new();
        while cells.len() < size {
            cells.insert(std::array::from_fn(|k| rng.gen_range(0..extents[k])));
        }
        let cells: Vec<[usize; 4]> = cells.into_iter().collect();
        let d = DisagreementSet::new(extents, cells.clone(), "random").unwrap();
        for r in 1..=3 {
            for metric in [Metric::L1, Metric::Linf] {
                let rep = clusters(&d, r, metric).unwrap();
                let oracle = bfs_partition(&cells, r, metric);
                let max = oracle.iter().map(Vec::len).max().unwrap_or(0);
                if rep.clusters != oracle || rep.max_size != max || rep.spanning != oracle_spanning(&oracle, extents) {
                    mismatches += 1;
                }
            }
        }
    }
    Verdict::new(mismatches == 0, format!("600 comparisons, {mismatches} mismatches"))
}

fn non_periodicity() -> Verdict {
    let rule = rule();
    let reference = stability_reference(&rule);
    let z = &reference.trajectory;
    let report = quasigas::analysis::periodicity_scan(z, [4; 4]);
    let clone_periods = report.is_period([1, 0, 0, 0]) && report.is_period([0, 1, 0, 0]);
    let spurious: Vec<[isize; 4]> = report.periods().filter(|p| p[2] != 0 || p[3] != 0).collect();

    let np = NoiseParams::for_rule(&rule, 0.002).unwrap();
    let acc = (0..50u64)
        .into_par_iter()
        .fold(
            || MajorityAccumulator::new(z.extents4(), rule.alphabet().size()),
            |mut acc, seed| {
                let x = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(seed), HORIZON).unwrap();
                acc.add(&x).unwrap();
                acc
            },
        )
        .reduce_with(|mut a, b| {
            a.merge(&b).unwrap();
            a
        })
        .unwrap();
    let field = acc.finish().unwrap();
    let [na, nb, nl, nt] = z.extents4();
    let mut wrong = 0;
    let mut min_freq = 1.0f64;
    for a in 0..na {
        for b in 0..nb {
            for i in 0..nl {
                for t in 0..nt {
                    let k = field.index([a, b, i, t]);
                    wrong += usize::from(field.modal[k] != z.get(a, b, i, t));
                    min_freq = min_freq.min(field.frequency[k]);
                }
            }
        }
    }
    Verdict::new(
        clone_periods && spurious.is_empty() && wrong == 0 && min_freq >= 0.9,
        format!(
            "clone_periods={clone_periods} spurious={spurious:?} modal_mismatches={wrong} min_modal_freq={min_freq:.2}"
        ),
    )
}

fn reproducibility() -> Verdict {
    let base = std::env::temp_dir().join(format!("quasigas-accept-{}", std::process::id()));
    // The output directory is part of the echoed config, so every run
    // writes to the same place.
    let run = |threads: usize| -> Vec<u8> {
        let dir = base.join("sweep");
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("size", "8x8x16"),
            ("steps", "32"),
            ("epsilon-grid", "0.002,0.01,0.05"),
            ("seeds", "0..6"),
            ("report-every", "8"),
        ] {
            cfg.insert(k, v.to_string());
        }
        cfg.insert("out", dir.display().to_string());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| stability_sweep(cfg)).unwrap();
        fs::read(dir.join("stability.csv")).unwrap()
    };
    let one = run(1);
    let four = run(4);
    let again = run(4);
    let _ = fs::remove_dir_all(&base);
    Verdict::new(
        one == four && four == again && !one.is_empty(),
        format!("{} bytes, 1 vs 4 threads identical={}, rerun identical={}", one.len(), one == four, four == again),
    )
}

fn main() {
    let criteria: [Check; 11] = [
        ("tile-set gates", tile_gates),
        ("blank dynamics", blank_dynamics),
        ("commuting diagram", commuting_diagram),
        ("erosion", erosion),
        ("noise rate", noise_rate),
        ("stability curve", stability_curve),
        ("temperature map", temperature),
        ("dlr conditionals", dlr),
        ("cluster oracle", cluster_oracle),
        ("non-periodicity", non_periodicity),
        ("reproducibility", reproducibility),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let number = (k + 1).to_string();
        if !filters.is_empty() && !filters.iter().any(|f| *f == number || name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let v = check();
        println!(
            "criterion {number:>2} {name:<18} {} [{:.1}s] {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(number);
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

