//! Reference trajectories and the noise-stability sweep.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analysis::{clusters, disagreements, Metric};
use crate::ca1d::{reference_from_patch, reference_patch_size, run1d, Boundary, Config1D, LocalRule, WindowSpec};
use crate::fmt::sig12;
use crate::pca::{sample_trajectory, NoiseParams, RngPolicy, SpaceTimeConfig};
use crate::stack3d::{clone3d, Config3D};
use crate::tileset::{find_patch, Patch, SearchOutcome, TileSet};
use crate::{ca1d, Error, Result};

/// Right-edge policy along `i`, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    Blank,
    /// Feed the reference trajectory's column just past the window.
    Reference,
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "blank" => Ok(Self::Blank),
            "reference" => Ok(Self::Reference),
            other => Err(Error::InvalidParameter(format!("boundary `{other}`"))),
        }
    }
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Periodic => "periodic",
            Self::Blank => "blank",
            Self::Reference => "reference",
        }
    }
}

/// Initial condition of an experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitSpec {
    Blank,
    /// Clone of a row read off this tiling patch.
    Clone(Patch),
}

/// The cloned initial state and the noiseless trajectory it generates.
#[derive(Clone, Debug)]
pub struct Reference {
    pub init: Config3D,
    pub line: ca1d::Trajectory1D,
    pub trajectory: SpaceTimeConfig,
}

/// Builds the initial state `κ(x)` and the deterministic reference on an
/// `A x B x L` window over `steps` steps.
pub fn build_reference(
    rule: &LocalRule,
    init: &InitSpec,
    extents: [usize; 3],
    steps: usize,
    boundary: BoundaryKind,
) -> Result<Reference> {
    let [na, nb, nl] = extents;
    let x = match (init, boundary) {
        (InitSpec::Blank, BoundaryKind::Periodic) => Config1D::blank(rule.alphabet(), nl, Boundary::Periodic)?,
        (InitSpec::Blank, _) => Config1D::blank(rule.alphabet(), nl, Boundary::FeedBlank)?,
        (InitSpec::Clone(patch), BoundaryKind::Reference) => reference_from_patch(patch, nl, steps)?.initial(),
        (InitSpec::Clone(patch), kind) => {
            let row = ca1d::patch_to_trajectory(patch, Some(WindowSpec::anchored(nl, 0)))?.rows.remove(0);
            let b = if kind == BoundaryKind::Periodic { Boundary::Periodic } else { Boundary::FeedBlank };
            Config1D::new(rule.alphabet(), row, b)?
        }
    };
    let line = run1d(rule, &x, steps)?;
    let init = clone3d(&x, na, nb)?;
    let rows = line.rows.iter().map(|r| r.repeat(na * nb)).collect();
    let trajectory = SpaceTimeConfig::new(extents, rows, x.boundary.clone())?;
    Ok(Reference { init, line, trajectory })
}

/// Searches a tiling patch large enough to feed an `L`-site window for
/// `steps` steps.
pub fn search_reference_patch(ts: &TileSet, sites: usize, steps: usize, budget: u64) -> Result<Patch> {
    let (w, h) = reference_patch_size(sites, steps);
    match find_patch(ts, w, h, budget)? {
        SearchOutcome::Found(p) => Ok(p),
        SearchOutcome::ProvenAbsent => Err(Error::InvalidParameter(format!("no {w}x{h} patch exists"))),
        SearchOutcome::BudgetExhausted { nodes } => {
            Err(Error::InvalidParameter(format!("no {w}x{h} patch within {nodes} nodes")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityConfig {
    pub extents: [usize; 3],
    pub steps: usize,
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub r: usize,
    pub metric: Metric,
    /// Emit one row per seed for every multiple of this many steps (and at
    /// the final step). `None` reports the final step only.
    pub report_every: Option<usize>,
}

/// One `epsilon,seed,t,disagreement_rate,n_clusters,max_cluster,spanning` row.
/// Statistics cover the space-time window `0..=t`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub epsilon: f64,
    pub seed: u64,
    pub t: usize,
    pub disagreement_rate: f64,
    pub n_clusters: usize,
    pub max_cluster: usize,
    pub spanning: bool,
}

pub const STABILITY_HEADER: &str = "epsilon,seed,t,disagreement_rate,n_clusters,max_cluster,spanning";

impl StabilityRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            sig12(self.epsilon),
            self.seed,
            self.t,
            sig12(self.disagreement_rate),
            self.n_clusters,
            self.max_cluster,
            self.spanning
        )
    }
}

fn checkpoints(steps: usize, every: Option<usize>) -> Vec<usize> {
    let mut ts: Vec<usize> = match every {
        Some(k) if k > 0 => (1..=steps / k).map(|j| j * k).collect(),
        _ => Vec::new(),
    };
    if ts.last() != Some(&steps) {
        ts.push(steps);
    }
    ts
}

/// Samples one noisy trajectory per `(epsilon, seed)` from the reference's
/// initial state and compares it with the reference. Runs in parallel; the
/// output order and content do not depend on the thread count.
pub fn run_stability(rule: &LocalRule, reference: &Reference, cfg: &StabilityConfig) -> Result<Vec<StabilityRow>> {
    if reference.trajectory.steps() < cfg.steps || reference.init.extents() != cfg.extents {
        return Err(Error::WindowTooLarge {
            requested: format!("{:?} x {} steps", cfg.extents, cfg.steps),
            available: format!("{:?} x {} steps", reference.init.extents(), reference.trajectory.steps()),
        });
    }
    let jobs: Vec<(f64, u64)> =
        cfg.epsilons.iter().flat_map(|&e| cfg.seeds.iter().map(move |&s| (e, s))).collect();
    let per_job = jobs
        .par_iter()
        .map(|&(epsilon, seed)| -> Result<Vec<StabilityRow>> {
            let np = NoiseParams::for_rule(rule, epsilon)?;
            let x = sample_trajectory(rule, &reference.init, &np, &RngPolicy::new(seed), cfg.steps)?;
            let z = reference.trajectory.truncated(cfg.steps);
            checkpoints(cfg.steps, cfg.report_every)
                .into_iter()
                .map(|t| {
                    let d = disagreements(&x.truncated(t), &z.truncated(t))?;
                    let rep = clusters(&d, cfg.r, cfg.metric)?;
                    Ok(StabilityRow {
                        epsilon,
                        seed,
                        t,
                        disagreement_rate: d.rate(),
                        n_clusters: rep.clusters.len(),
                        max_cluster: rep.max_size,
                        spanning: rep.spanning,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// CSV text: `# key=value` config lines, the header, then the rows.
pub fn stability_csv(header: &[(String, String)], rows: &[StabilityRow]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(STABILITY_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut k = 0;
        while k < idx.len() {
            let mut j = k;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[k]] {
                j += 1;
            }
            let avg = (k + j) as f64 / 2.0 + 1.0;
            for &i in &idx[k..=j] {
                out[i] = avg;
            }
            k = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
