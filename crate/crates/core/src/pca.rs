//! The noisy stacked automaton: every cell first takes the value of the
//! stacked rule and is then replaced, with probability `epsilon`, by a
//! uniformly chosen different symbol.
//!
//! Randomness is counter based. The draw for cell `(a, b, i)` at time `t`
//! is word `2 * pack(a, b, i)` of the ChaCha8 stream `t` under a key derived
//! from the master seed, so the result never depends on evaluation order or
//! thread count.

use std::io::{BufRead, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ca1d::{Boundary, LocalRule};
use crate::stack3d::{majority, stacked_step, Config3D};
use crate::{Error, Result, Symbol};

/// Offsets `(a, b, i)` read by the stacked rule, in pattern order.
pub const NEIGHBORHOOD: [[usize; 3]; 6] =
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1]];

/// Symbols on [`NEIGHBORHOOD`] at the previous time step.
pub type Pattern = [Symbol; 6];

/// The stacked rule evaluated on a neighbourhood pattern.
#[inline]
pub fn f_tilde(rule: &LocalRule, p: &Pattern) -> Symbol {
    rule.apply(majority(p[0], p[1], p[2]), majority(p[3], p[4], p[5]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    epsilon: f64,
    alphabet_size: usize,
}

impl NoiseParams {
    pub fn new(epsilon: f64, alphabet_size: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1)")));
        }
        if alphabet_size < 2 {
            return Err(Error::InvalidParameter(format!("alphabet of size {alphabet_size}")));
        }
        Ok(Self { epsilon, alphabet_size })
    }

    pub fn for_rule(rule: &LocalRule, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, rule.alphabet().size())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Probability of each particular wrong symbol, `epsilon / (m - 1)`.
    pub fn off_diagonal(&self) -> f64 {
        self.epsilon / (self.alphabet_size - 1) as f64
    }
}

/// The noise matrix: `1 - epsilon` on the diagonal, `epsilon / (m - 1)` off it.
pub fn theta(np: &NoiseParams, a: Symbol, b: Symbol) -> f64 {
    if a == b {
        1.0 - np.epsilon
    } else {
        np.off_diagonal()
    }
}

/// Transition probability of outcome `b` given the neighbourhood pattern.
pub fn psi(rule: &LocalRule, np: &NoiseParams, p: &Pattern, b: Symbol) -> f64 {
    theta(np, f_tilde(rule, p), b)
}

/// Seeded counter-based randomness keyed by space-time coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngPolicy {
    pub seed: u64,
}

const COORD_BITS: u32 = 21;

impl RngPolicy {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn base(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn position(a: usize, b: usize, i: usize) -> u128 {
        let packed = ((a as u128) << (2 * COORD_BITS)) | ((b as u128) << COORD_BITS) | i as u128;
        packed * 2
    }

    /// Generator positioned at cell `(a, b, 0)` of time `t`; successive
    /// `next_u64` calls yield cells `i = 0, 1, ...`.
    fn line(&self, base: &ChaCha8Rng, a: usize, b: usize, t: usize) -> ChaCha8Rng {
        let mut rng = base.clone();
        rng.set_stream(t as u64);
        rng.set_word_pos(Self::position(a, b, 0));
        rng
    }

    /// The raw draw for one cell.
    pub fn cell_u64(&self, a: usize, b: usize, i: usize, t: usize) -> u64 {
        let mut rng = self.base();
        rng.set_stream(t as u64);
        rng.set_word_pos(Self::position(a, b, i));
        rng.next_u64()
    }
}

/// Maps a raw draw to the noisy output for a cell whose rule value is `det`.
#[inline]
fn perturb(raw: u64, det: Symbol, np: &NoiseParams) -> Symbol {
    let u = (raw >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    if u >= np.epsilon {
        return det;
    }
    // Conditioned on u < epsilon, u / epsilon is again uniform.
    let others = np.alphabet_size - 1;
    let k = (((u / np.epsilon) * others as f64) as usize).min(others - 1) as Symbol;
    k + Symbol::from(k >= det)
}

fn check_extents(y: &Config3D) -> Result<()> {
    if y.extents().iter().any(|&n| n >= 1 << COORD_BITS) {
        return Err(Error::InvalidParameter(format!("extents {:?} too large", y.extents())));
    }
    Ok(())
}

/// Advances the state at time `t` to time `t + 1`. Noise for the new cells
/// is keyed by `(seed, a, b, i, t + 1)`.
pub fn pca_step(rule: &LocalRule, y: &Config3D, np: &NoiseParams, rng: &RngPolicy, t: usize) -> Result<Config3D> {
    check_extents(y)?;
    let det = stacked_step(rule, y)?;
    if np.epsilon == 0.0 {
        return Ok(det);
    }
    let [_, nb, nl] = det.extents();
    let boundary = det.boundary_i.clone();
    let extents = det.extents();
    let mut cells = det.into_cells();
    let base = rng.base();
    cells.par_chunks_mut(nl).enumerate().for_each(|(line_idx, line)| {
        let mut gen = rng.line(&base, line_idx / nb, line_idx % nb, t + 1);
        for cell in line.iter_mut() {
            *cell = perturb(gen.next_u64(), *cell, np);
        }
    });
    Config3D::new(extents, cells, boundary)
}

/// A finite window `(a, b, i, t)` of a space-time trajectory, stored one
/// time row at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceTimeConfig {
    extents: [usize; 3],
    rows: Vec<Vec<Symbol>>,
    /// Boundary policy along `i` in force at `t = 0`.
    pub boundary_i: Boundary,
}

impl SpaceTimeConfig {
    pub fn new(extents: [usize; 3], rows: Vec<Vec<Symbol>>, boundary_i: Boundary) -> Result<Self> {
        let vol: usize = extents.iter().product();
        if vol == 0 || rows.is_empty() || rows.iter().any(|r| r.len() != vol) {
            return Err(Error::InvalidParameter(format!("space-time window {extents:?}")));
        }
        Ok(Self { extents, rows, boundary_i })
    }

    pub fn from_initial(init: &Config3D) -> Self {
        Self { extents: init.extents(), rows: vec![init.cells().to_vec()], boundary_i: init.boundary_i.clone() }
    }

    /// Appends the next time row.
    pub fn push(&mut self, row: &Config3D) -> Result<()> {
        if row.extents() != self.extents {
            return Err(Error::ExtentMismatch(self.extents4(), {
                let [a, b, l] = row.extents();
                [a, b, l, 1]
            }));
        }
        self.rows.push(row.cells().to_vec());
        Ok(())
    }

    pub fn space_extents(&self) -> [usize; 3] {
        self.extents
    }

    /// `[A, B, L, T + 1]`.
    pub fn extents4(&self) -> [usize; 4] {
        let [a, b, l] = self.extents;
        [a, b, l, self.rows.len()]
    }

    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn volume(&self) -> usize {
        self.extents4().iter().product()
    }

    #[inline]
    fn index(&self, a: usize, b: usize, i: usize) -> usize {
        (a * self.extents[1] + b) * self.extents[2] + i
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, i: usize, t: usize) -> Symbol {
        self.rows[t][self.index(a, b, i)]
    }

    pub fn set(&mut self, a: usize, b: usize, i: usize, t: usize, s: Symbol) {
        let k = self.index(a, b, i);
        self.rows[t][k] = s;
    }

    /// The window restricted to times `0..=t`.
    pub fn truncated(&self, t: usize) -> SpaceTimeConfig {
        let rows = self.rows[..=t.min(self.steps())].to_vec();
        SpaceTimeConfig { extents: self.extents, rows, boundary_i: self.boundary_i.clone() }
    }

    pub fn row(&self, t: usize) -> &[Symbol] {
        &self.rows[t]
    }

    /// The spatial configuration at time `t`, with its boundary advanced.
    pub fn config_at(&self, t: usize) -> Config3D {
        Config3D::new(self.extents, self.rows[t].clone(), self.boundary_i.advanced(t))
            .expect("rows have validated extents")
    }

    /// The neighbourhood pattern at time `t - 1` read by cell `(a, b, i)` at
    /// time `t`. Cells past the right `i` edge take the fed value; `None`
    /// when `t == 0` or the feed stream does not reach `t - 1`.
    pub fn neighborhood(&self, blank: Symbol, a: usize, b: usize, i: usize, t: usize) -> Option<Pattern> {
        if t == 0 {
            return None;
        }
        let [na, nb, nl] = self.extents;
        let prev = t - 1;
        let fed = if i + 1 == nl { self.boundary_i.fed_symbol(blank, prev).ok()? } else { None };
        let mut p = [0; 6];
        for (slot, [da, db, di]) in p.iter_mut().zip(NEIGHBORHOOD) {
            let (aa, bb, ii) = ((a + da) % na, (b + db) % nb, i + di);
            *slot = match (ii < nl, fed) {
                (true, _) => self.get(aa, bb, ii, prev),
                (false, Some(s)) => s,
                (false, None) => self.get(aa, bb, 0, prev),
            };
        }
        Some(p)
    }

    /// `f̃` of the cell's neighbourhood, when resolvable.
    pub fn rule_value(&self, rule: &LocalRule, a: usize, b: usize, i: usize, t: usize) -> Option<Symbol> {
        self.neighborhood(rule.blank(), a, b, i, t).map(|p| f_tilde(rule, &p))
    }

    /// Text header `A B L N`, a boundary line (`periodic`, `blank`, or
    /// `reference s0 s1 ...` from the current cursor), then `N` rows of
    /// `A·B·L` bytes in [`Config3D`] order.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        let [a, b, l] = self.extents;
        writeln!(w, "{a} {b} {l} {}", self.rows.len())?;
        match &self.boundary_i {
            Boundary::Periodic => writeln!(w, "periodic")?,
            Boundary::FeedBlank => writeln!(w, "blank")?,
            Boundary::FeedStream { symbols, cursor } => {
                let rest: Vec<String> = symbols[*cursor..].iter().map(u8::to_string).collect();
                writeln!(w, "reference {}", rest.join(" "))?;
            }
        }
        for row in &self.rows {
            w.write_all(row)?;
        }
        Ok(())
    }

    pub fn read_dump(mut r: impl BufRead) -> Result<Self> {
        let bad = |what: String| Error::MalformedDump(what);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let dims = header
            .split_whitespace()
            .map(|f| f.parse::<usize>().map_err(|e| bad(format!("header `{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let [a, b, l, n] = dims[..] else {
            return Err(bad(format!("header `{}`", header.trim_end())));
        };
        let mut bline = String::new();
        r.read_line(&mut bline)?;
        let mut words = bline.split_whitespace();
        let boundary = match words.next() {
            Some("periodic") => Boundary::Periodic,
            Some("blank") => Boundary::FeedBlank,
            Some("reference") => Boundary::stream(
                words
                    .map(|w| w.parse::<u8>().map_err(|e| bad(format!("reference `{w}`: {e}"))))
                    .collect::<Result<Vec<_>>>()?,
            ),
            other => return Err(bad(format!("boundary `{other:?}`"))),
        };
        let vol = a * b * l;
        let mut rows = Vec::with_capacity(n);
        for t in 0..n {
            let mut row = vec![0u8; vol];
            r.read_exact(&mut row).map_err(|e| bad(format!("row {t}: {e}")))?;
            rows.push(row);
        }
        Self::new([a, b, l], rows, boundary)
    }
}

/// Samples `steps` noisy steps starting from `init`.
pub fn sample_trajectory(
    rule: &LocalRule,
    init: &Config3D,
    np: &NoiseParams,
    rng: &RngPolicy,
    steps: usize,
) -> Result<SpaceTimeConfig> {
    let mut out = SpaceTimeConfig::from_initial(init);
    let mut cur = init.clone();
    for t in 0..steps {
        cur = pca_step(rule, &cur, np, rng, t)?;
        out.push(&cur)?;
    }
    Ok(out)
}

/// Cells violating the stacked rule, plus cells whose neighbourhood could
/// not be resolved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ErrorSet {
    pub cells: Vec<[usize; 4]>,
    pub excluded: Vec<[usize; 4]>,
    /// Number of cells checked (resolved cells with `t >= 1`).
    pub checked: usize,
}

/// All `(a, b, i, t)` with `t >= 1` where `X` differs from `f̃` applied
/// to its own previous row.
pub fn error_set(rule: &LocalRule, x: &SpaceTimeConfig) -> ErrorSet {
    let [na, nb, nl, nt] = x.extents4();
    let mut out = ErrorSet::default();
    for t in 1..nt {
        for a in 0..na {
            for b in 0..nb {
                for i in 0..nl {
                    match x.rule_value(rule, a, b, i, t) {
                        Some(v) => {
                            out.checked += 1;
                            if v != x.get(a, b, i, t) {
                                out.cells.push([a, b, i, t]);
                            }
                        }
                        None => out.excluded.push([a, b, i, t]),
                    }
                }
            }
        }
    }
    out
}
