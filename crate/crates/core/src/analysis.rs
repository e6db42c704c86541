//! Comparing space-time windows: disagreement sets, their range-`r`
//! clusters, periodicity scans, and the per-cell modal field of a sample.
//!
//! A finite window cannot show that a cluster is infinite. Clusters that
//! touch two opposite faces of the window are flagged as spanning, and the
//! sea-island verdict uses that flag plus an explicit size threshold.

use std::fmt::Write as _;

use crate::pca::SpaceTimeConfig;
use crate::tileset::Patch;
use crate::{Error, Result, Symbol};

/// Space-time coordinate `(a, b, i, t)`.
pub type Cell4 = [usize; 4];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisagreementSet {
    pub extents: [usize; 4],
    /// Sorted lexicographically.
    pub cells: Vec<Cell4>,
    pub reference: String,
}

impl DisagreementSet {
    pub fn new(extents: [usize; 4], mut cells: Vec<Cell4>, reference: impl Into<String>) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| c.iter().zip(&extents).any(|(v, n)| v >= n)) {
            return Err(Error::InvalidParameter(format!("cell {c:?} outside {extents:?}")));
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(Self { extents, cells, reference: reference.into() })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.cells.len() as f64 / self.extents.iter().product::<usize>() as f64
    }
}

/// Cells where `x` and `z` differ.
pub fn disagreements(x: &SpaceTimeConfig, z: &SpaceTimeConfig) -> Result<DisagreementSet> {
    if x.extents4() != z.extents4() {
        return Err(Error::ExtentMismatch(x.extents4(), z.extents4()));
    }
    let [na, nb, nl, nt] = x.extents4();
    let mut cells = Vec::new();
    for a in 0..na {
        for b in 0..nb {
            for i in 0..nl {
                for t in 0..nt {
                    if x.get(a, b, i, t) != z.get(a, b, i, t) {
                        cells.push([a, b, i, t]);
                    }
                }
            }
        }
    }
    Ok(DisagreementSet { extents: x.extents4(), cells, reference: "reference".into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    L1,
    Linf,
}

impl Metric {
    pub fn distance(&self, p: &Cell4, q: &Cell4) -> usize {
        let diffs = p.iter().zip(q).map(|(a, b)| a.abs_diff(*b));
        match self {
            Metric::L1 => diffs.sum(),
            Metric::Linf => diffs.max().unwrap_or(0),
        }
    }

    fn norm(&self, v: &[isize; 4]) -> usize {
        let abs = v.iter().map(|x| x.unsigned_abs());
        match self {
            Metric::L1 => abs.sum(),
            Metric::Linf => abs.max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterReport {
    pub r: usize,
    pub metric: Metric,
    pub extents: [usize; 4],
    /// Each cluster sorted; clusters ordered by their smallest cell.
    pub clusters: Vec<Vec<Cell4>>,
    pub max_size: usize,
    /// Some cluster touches both faces of an axis with extent at least 2.
    pub spanning: bool,
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Nonzero offsets within distance `r`, one of each `±v` pair.
fn half_ball(r: usize, metric: Metric) -> Vec<[isize; 4]> {
    let r = r as isize;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for i in -r..=r {
                for t in -r..=r {
                    let v = [a, b, i, t];
                    let positive = v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
                    if positive && metric.norm(&v) as isize <= r {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

fn shifted(c: &Cell4, v: &[isize; 4], extents: &[usize; 4]) -> Option<Cell4> {
    let mut out = [0; 4];
    for k in 0..4 {
        let x = c[k] as isize + v[k];
        if x < 0 || x >= extents[k] as isize {
            return None;
        }
        out[k] = x as usize;
    }
    Some(out)
}

fn linear(c: &Cell4, extents: &[usize; 4]) -> usize {
    ((c[0] * extents[1] + c[1]) * extents[2] + c[2]) * extents[3] + c[3]
}

/// Union-find decomposition of `d` under the `distance <= r` adjacency.
/// Window coordinates do not wrap.
pub fn clusters(d: &DisagreementSet, r: usize, metric: Metric) -> Result<ClusterReport> {
    if r == 0 {
        return Err(Error::InvalidParameter("cluster range must be at least 1".into()));
    }
    let ext = d.extents;
    let volume: usize = ext.iter().product();
    let mut slot = vec![u32::MAX; volume];
    for (k, c) in d.cells.iter().enumerate() {
        slot[linear(c, &ext)] = k as u32;
    }
    let offsets = half_ball(r, metric);
    let mut dsu = DisjointSet::new(d.cells.len());
    for (k, c) in d.cells.iter().enumerate() {
        for v in &offsets {
            if let Some(n) = shifted(c, v, &ext) {
                let j = slot[linear(&n, &ext)];
                if j != u32::MAX {
                    dsu.union(k, j as usize);
                }
            }
        }
    }
    // Cells are sorted, so first-seen roots come in order of smallest cell.
    let mut cluster_of_root: Vec<Option<usize>> = vec![None; d.cells.len()];
    let mut groups: Vec<Vec<Cell4>> = Vec::new();
    for (k, c) in d.cells.iter().enumerate() {
        let root = dsu.find(k);
        let g = *cluster_of_root[root].get_or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(*c);
    }
    let spans = |g: &Vec<Cell4>| {
        (0..4).any(|ax| {
            ext[ax] >= 2 && g.iter().any(|c| c[ax] == 0) && g.iter().any(|c| c[ax] == ext[ax] - 1)
        })
    };
    Ok(ClusterReport {
        r,
        metric,
        extents: ext,
        max_size: groups.iter().map(Vec::len).max().unwrap_or(0),
        spanning: groups.iter().any(spans),
        clusters: groups,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeaIslandVerdict {
    pub pass: bool,
    pub size_threshold: usize,
    pub report: ClusterReport,
}

/// Passes iff no range-`r` disagreement cluster spans the window and none
/// exceeds `size_threshold` cells.
pub fn sea_island_check(
    x: &SpaceTimeConfig,
    z: &SpaceTimeConfig,
    r: usize,
    metric: Metric,
    size_threshold: usize,
) -> Result<SeaIslandVerdict> {
    let report = clusters(&disagreements(x, z)?, r, metric)?;
    Ok(SeaIslandVerdict { pass: !report.spanning && report.max_size <= size_threshold, size_threshold, report })
}

/// A finite 4D array of symbols.
pub trait Lattice4 {
    fn extents4(&self) -> [usize; 4];
    fn at(&self, k: Cell4) -> Symbol;
}

impl Lattice4 for SpaceTimeConfig {
    fn extents4(&self) -> [usize; 4] {
        SpaceTimeConfig::extents4(self)
    }

    fn at(&self, k: Cell4) -> Symbol {
        self.get(k[0], k[1], k[2], k[3])
    }
}

/// A patch is scanned as a `1 x 1 x width x height` array indexed
/// `(_, _, col, row)`.
impl Lattice4 for Patch {
    fn extents4(&self) -> [usize; 4] {
        [1, 1, self.width, self.height]
    }

    fn at(&self, k: Cell4) -> Symbol {
        self.get(k[2], k[3]) as Symbol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodVerdict {
    Period,
    /// `z[k + p] != z[k]` at this `k`.
    Broken { witness: Cell4 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodEntry {
    pub p: [isize; 4],
    pub verdict: PeriodVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodReport {
    pub bound: [usize; 4],
    pub entries: Vec<PeriodEntry>,
}

impl PeriodReport {
    /// Looks `p` (or `-p`) up among the tested vectors.
    pub fn verdict(&self, p: [isize; 4]) -> Option<PeriodVerdict> {
        let neg = p.map(|x| -x);
        self.entries.iter().find(|e| e.p == p || e.p == neg).map(|e| e.verdict)
    }

    pub fn is_period(&self, p: [isize; 4]) -> bool {
        self.verdict(p) == Some(PeriodVerdict::Period)
    }

    pub fn periods(&self) -> impl Iterator<Item = [isize; 4]> + '_ {
        self.entries.iter().filter(|e| e.verdict == PeriodVerdict::Period).map(|e| e.p)
    }

    /// CSV with columns `p1,p2,p3,p4,is_period,witness`; witnesses are
    /// written `a:b:i:t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p1,p2,p3,p4,is_period,witness\n");
        for e in &self.entries {
            let [p1, p2, p3, p4] = e.p;
            let (flag, witness) = match e.verdict {
                PeriodVerdict::Period => ("true", String::new()),
                PeriodVerdict::Broken { witness: [a, b, i, t] } => ("false", format!("{a}:{b}:{i}:{t}")),
            };
            let _ = writeln!(out, "{p1},{p2},{p3},{p4},{flag},{witness}");
        }
        out
    }
}

fn test_period(z: &impl Lattice4, p: [isize; 4]) -> PeriodVerdict {
    let ext = z.extents4();
    let lo: Vec<usize> = p.iter().map(|&v| (-v).max(0) as usize).collect();
    let hi: Vec<usize> = p.iter().zip(&ext).map(|(&v, &n)| (n as isize - v.max(0)) as usize).collect();
    for a in lo[0]..hi[0] {
        for b in lo[1]..hi[1] {
            for i in lo[2]..hi[2] {
                for t in lo[3]..hi[3] {
                    let k = [a, b, i, t];
                    let kp = [0, 1, 2, 3].map(|j| (k[j] as isize + p[j]) as usize);
                    if z.at(kp) != z.at(k) {
                        return PeriodVerdict::Broken { witness: k };
                    }
                }
            }
        }
    }
    PeriodVerdict::Period
}

/// Tests every nonzero `p` with `|p_j| <= bound[j]` (one of each `±p`)
/// whose shifted overlap with the window is non-empty. A zero bound pins
/// that component to 0.
pub fn periodicity_scan(z: &impl Lattice4, bound: [usize; 4]) -> PeriodReport {
    let ext = z.extents4();
    let range = |j: usize| {
        let b = bound[j].min(ext[j].saturating_sub(1)) as isize;
        -b..=b
    };
    let mut entries = Vec::new();
    for p1 in range(0) {
        for p2 in range(1) {
            for p3 in range(2) {
                for p4 in range(3) {
                    let p = [p1, p2, p3, p4];
                    if !p.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0) {
                        continue;
                    }
                    entries.push(PeriodEntry { p, verdict: test_period(z, p) });
                }
            }
        }
    }
    PeriodReport { bound, entries }
}

/// Per-cell modal symbol and its empirical frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorityField {
    pub extents: [usize; 4],
    pub modal: Vec<Symbol>,
    pub frequency: Vec<f64>,
}

impl MajorityField {
    pub fn index(&self, k: Cell4) -> usize {
        linear(&k, &self.extents)
    }
}

/// Streaming per-cell symbol counts.
#[derive(Clone, Debug)]
pub struct MajorityAccumulator {
    extents: [usize; 4],
    alphabet_size: usize,
    counts: Vec<u32>,
    samples: usize,
}

impl MajorityAccumulator {
    pub fn new(extents: [usize; 4], alphabet_size: usize) -> Self {
        let volume: usize = extents.iter().product();
        Self { extents, alphabet_size, counts: vec![0; volume * alphabet_size], samples: 0 }
    }

    pub fn add(&mut self, x: &SpaceTimeConfig) -> Result<()> {
        if x.extents4() != self.extents {
            return Err(Error::ExtentMismatch(self.extents, x.extents4()));
        }
        let [na, nb, nl, nt] = self.extents;
        for a in 0..na {
            for b in 0..nb {
                for i in 0..nl {
                    for t in 0..nt {
                        let s = x.get(a, b, i, t) as usize;
                        if s >= self.alphabet_size {
                            return Err(Error::SymbolOutOfRange { symbol: s as Symbol, size: self.alphabet_size });
                        }
                        let k = linear(&[a, b, i, t], &self.extents);
                        self.counts[k * self.alphabet_size + s] += 1;
                    }
                }
            }
        }
        self.samples += 1;
        Ok(())
    }

    /// Adds the counts of another accumulator over the same window.
    pub fn merge(&mut self, other: &MajorityAccumulator) -> Result<()> {
        if other.extents != self.extents || other.alphabet_size != self.alphabet_size {
            return Err(Error::ExtentMismatch(self.extents, other.extents));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.samples += other.samples;
        Ok(())
    }

    /// Ties go to the smaller symbol id.
    pub fn finish(&self) -> Result<MajorityField> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        let (modal, frequency) = self
            .counts
            .chunks(self.alphabet_size)
            .map(|c| {
                let (best, &n) = c.iter().enumerate().rev().max_by_key(|(_, &n)| n).expect("non-empty alphabet");
                (best as Symbol, n as f64 / self.samples as f64)
            })
            .unzip();
        Ok(MajorityField { extents: self.extents, modal, frequency })
    }
}

pub fn empirical_majority_field(samples: &[SpaceTimeConfig]) -> Result<MajorityField> {
    let first = samples.first().ok_or_else(|| Error::InvalidParameter("no samples".into()))?;
    let alphabet_size = samples
        .iter()
        .flat_map(|x| (0..=x.steps()).flat_map(move |t| x.row(t).iter().copied()))
        .max()
        .map_or(1, |s| s as usize + 1);
    let mut acc = MajorityAccumulator::new(first.extents4(), alphabet_size);
    for x in samples {
        acc.add(x)?;
    }
    acc.finish()
}
