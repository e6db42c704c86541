//! The one-dimensional automaton `(Fx)_i = f(x_i, x_{i+1})` over tiles plus
//! a blank symbol, where `f(a, b) = rho(a, b)` when defined and blank
//! otherwise.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::tileset::{Patch, RhoTable, TileSet};
use crate::{Error, Result, Symbol};

/// Tiles `0..n_tiles` plus the blank symbol `n_tiles`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    n_tiles: usize,
}

impl Alphabet {
    pub fn new(n_tiles: usize) -> Result<Self> {
        if n_tiles == 0 || n_tiles > crate::tileset::MAX_TILES {
            return Err(Error::InvalidParameter(format!("alphabet over {n_tiles} tiles")));
        }
        Ok(Self { n_tiles })
    }

    pub fn n_tiles(&self) -> usize {
        self.n_tiles
    }

    /// `|Σ̄|`, the tile count plus one.
    pub fn size(&self) -> usize {
        self.n_tiles + 1
    }

    pub fn blank(&self) -> Symbol {
        self.n_tiles as Symbol
    }

    pub fn is_blank(&self, s: Symbol) -> bool {
        s as usize == self.n_tiles
    }

    pub fn check(&self, s: Symbol) -> Result<()> {
        if (s as usize) < self.size() {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange { symbol: s, size: self.size() })
        }
    }
}

/// Direct evaluation of the blank-extended rule from the successor table.
pub fn f_bar(alphabet: &Alphabet, rho: &RhoTable, a: Symbol, b: Symbol) -> Symbol {
    if alphabet.is_blank(a) || alphabet.is_blank(b) {
        return alphabet.blank();
    }
    match rho.get(a as usize, b as usize) {
        Ok(Some(u)) => u as Symbol,
        _ => alphabet.blank(),
    }
}

/// The blank-extended rule tabulated over `Σ̄ × Σ̄`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRule {
    alphabet: Alphabet,
    table: Vec<Symbol>,
}

impl LocalRule {
    pub fn from_rho(rho: &RhoTable) -> Result<Self> {
        let alphabet = Alphabet::new(rho.n_tiles())?;
        let m = alphabet.size();
        let mut table = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                table.push(f_bar(&alphabet, rho, a as Symbol, b as Symbol));
            }
        }
        Ok(Self { alphabet, table })
    }

    /// Fails unless the tile set is NW-deterministic.
    pub fn from_tileset(ts: &TileSet) -> Result<Self> {
        Self::from_rho(&RhoTable::new(ts)?)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn blank(&self) -> Symbol {
        self.alphabet.blank()
    }

    #[inline]
    pub fn apply(&self, a: Symbol, b: Symbol) -> Symbol {
        self.table[a as usize * self.alphabet.size() + b as usize]
    }
}

/// How the missing right neighbour of the last cell is resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Wrap around to cell 0.
    Periodic,
    /// A blank enters from the right at every step.
    FeedBlank,
    /// `symbols[cursor]` enters at the next step; the cursor advances by one
    /// per step.
    FeedStream { symbols: Arc<[Symbol]>, cursor: usize },
}

impl Boundary {
    pub fn stream(symbols: impl Into<Arc<[Symbol]>>) -> Self {
        Boundary::FeedStream { symbols: symbols.into(), cursor: 0 }
    }

    /// The fed symbol `offset` steps from now; `None` for periodic
    /// boundaries (the neighbour is a cell, not a fed value).
    pub fn fed_symbol(&self, blank: Symbol, offset: usize) -> Result<Option<Symbol>> {
        match self {
            Boundary::Periodic => Ok(None),
            Boundary::FeedBlank => Ok(Some(blank)),
            Boundary::FeedStream { symbols, cursor } => symbols
                .get(cursor + offset)
                .copied()
                .map(Some)
                .ok_or(Error::StreamExhausted { step: cursor + offset }),
        }
    }

    /// The boundary as seen `by` steps later.
    pub fn advanced(&self, by: usize) -> Self {
        match self {
            Boundary::FeedStream { symbols, cursor } => {
                Boundary::FeedStream { symbols: symbols.clone(), cursor: cursor + by }
            }
            other => other.clone(),
        }
    }

    /// Short name used in dumps and configs.
    pub fn kind(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::FeedBlank => "blank",
            Boundary::FeedStream { .. } => "reference",
        }
    }
}

/// A finite row of symbols with its right-edge policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config1D {
    pub cells: Vec<Symbol>,
    pub boundary: Boundary,
}

impl Config1D {
    pub fn new(alphabet: &Alphabet, cells: Vec<Symbol>, boundary: Boundary) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidParameter("empty configuration".into()));
        }
        for &s in &cells {
            alphabet.check(s)?;
        }
        if let Boundary::FeedStream { symbols, .. } = &boundary {
            for &s in symbols.iter() {
                alphabet.check(s)?;
            }
        }
        Ok(Self { cells, boundary })
    }

    pub fn blank(alphabet: &Alphabet, len: usize, boundary: Boundary) -> Result<Self> {
        Self::new(alphabet, vec![alphabet.blank(); len], boundary)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// One synchronous update of every cell.
pub fn step1d(rule: &LocalRule, x: &Config1D) -> Result<Config1D> {
    let n = x.cells.len();
    let edge = x.boundary.fed_symbol(rule.blank(), 0)?.unwrap_or(x.cells[0]);
    let cells = (0..n)
        .map(|i| {
            let right = if i + 1 < n { x.cells[i + 1] } else { edge };
            rule.apply(x.cells[i], right)
        })
        .collect();
    Ok(Config1D { cells, boundary: x.boundary.advanced(1) })
}

/// A finite space-time window, `rows[t][i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory1D {
    pub rows: Vec<Vec<Symbol>>,
    /// Boundary policy in force at row 0.
    pub boundary: Boundary,
}

impl Trajectory1D {
    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn sites(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, t: usize, i: usize) -> Symbol {
        self.rows[t][i]
    }

    pub fn initial(&self) -> Config1D {
        Config1D { cells: self.rows[0].clone(), boundary: self.boundary.clone() }
    }

    /// Cells `(t + 1, i)` whose two parents and itself are tiles but which
    /// disagree with the successor table. Empty for any tiling window.
    pub fn tiling_violations(&self, rule: &LocalRule) -> Vec<(usize, usize)> {
        let alpha = rule.alphabet();
        let mut bad = Vec::new();
        for t in 0..self.steps() {
            for i in 0..self.sites() - 1 {
                let (a, b, c) = (self.rows[t][i], self.rows[t][i + 1], self.rows[t + 1][i]);
                if !alpha.is_blank(a) && !alpha.is_blank(b) && !alpha.is_blank(c) && rule.apply(a, b) != c {
                    bad.push((t + 1, i));
                }
            }
        }
        bad
    }

    /// Text dump: one row per line, base-10 ids, blank rendered as `.`.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|&s| if alphabet.is_blank(s) { ".".into() } else { s.to_string() })
                .collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }
}

/// Iterates [`step1d`] `steps` times, keeping every row.
pub fn run1d(rule: &LocalRule, x: &Config1D, steps: usize) -> Result<Trajectory1D> {
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(x.cells.clone());
    let mut cur = x.clone();
    for _ in 0..steps {
        cur = step1d(rule, &cur)?;
        rows.push(cur.cells.clone());
    }
    Ok(Trajectory1D { rows, boundary: x.boundary.clone() })
}

/// Space-time cells forced blank by a blank at `(k, t)`:
/// `{(l, s) : t <= s <= horizon, k - (s - t) <= l <= k}`.
pub fn blank_cone(k: isize, t: usize, horizon: usize) -> Vec<(isize, usize)> {
    (t..=horizon)
        .flat_map(|s| {
            let lo = k - (s - t) as isize;
            (lo..=k).map(move |l| (l, s))
        })
        .collect()
}

/// Placement of a trajectory window inside a patch: cell `(t, i)` sits at
/// column `t + i - col_offset` and row `row_offset - i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpec {
    pub sites: usize,
    pub steps: usize,
    pub col_offset: isize,
    pub row_offset: isize,
}

impl WindowSpec {
    /// Window of the given size anchored at the patch's left column, with
    /// site 0 on row `sites - 1`.
    pub fn anchored(sites: usize, steps: usize) -> Self {
        Self { sites, steps, col_offset: 0, row_offset: sites as isize - 1 }
    }

    /// The anchored window with the most cells that fits in the patch.
    pub fn largest_for(patch: &Patch) -> Self {
        let w = patch.width;
        let sites = w.div_ceil(2).clamp(1, patch.height);
        Self::anchored(sites, w - sites)
    }

    pub fn position(&self, t: usize, i: usize) -> (isize, isize) {
        (t as isize + i as isize - self.col_offset, self.row_offset - i as isize)
    }
}

/// Reads a trajectory window off a valid patch by the anti-diagonal
/// reindexing of [`WindowSpec`]: `rows[t][i]` is left of `rows[t+1][i]` and
/// `rows[t][i+1]` is above it, so `rows[t+1][i] = rho(rows[t][i], rows[t][i+1])`.
pub fn patch_to_trajectory(patch: &Patch, spec: Option<WindowSpec>) -> Result<Trajectory1D> {
    let spec = spec.unwrap_or_else(|| WindowSpec::largest_for(patch));
    if spec.sites == 0 {
        return Err(Error::InvalidParameter("window with no sites".into()));
    }
    let corners = [
        spec.position(0, 0),
        spec.position(spec.steps, spec.sites - 1),
        spec.position(0, spec.sites - 1),
        spec.position(spec.steps, 0),
    ];
    let fits = corners.iter().all(|&(c, r)| {
        (0..patch.width as isize).contains(&c) && (0..patch.height as isize).contains(&r)
    });
    if !fits {
        return Err(Error::WindowTooLarge {
            requested: format!("{spec:?}"),
            available: format!("{}x{}", patch.width, patch.height),
        });
    }
    let rows = (0..=spec.steps)
        .map(|t| {
            (0..spec.sites)
                .map(|i| {
                    let (c, r) = spec.position(t, i);
                    patch.get(c as usize, r as usize) as Symbol
                })
                .collect()
        })
        .collect();
    Ok(Trajectory1D { rows, boundary: Boundary::FeedBlank })
}

/// Extracts a `sites`-wide, `steps`-long tiling trajectory together with the
/// column just past its right edge, which becomes a feed-stream boundary.
/// Running [`run1d`] on the returned initial row reproduces the window.
pub fn reference_from_patch(patch: &Patch, sites: usize, steps: usize) -> Result<Trajectory1D> {
    let wide = patch_to_trajectory(patch, Some(WindowSpec::anchored(sites + 1, steps)))?;
    let feed: Vec<Symbol> = wide.rows.iter().map(|r| r[sites]).collect();
    let rows = wide.rows.into_iter().map(|mut r| {
        r.truncate(sites);
        r
    });
    Ok(Trajectory1D { rows: rows.collect(), boundary: Boundary::stream(feed) })
}

/// Patch dimensions needed by [`reference_from_patch`].
pub fn reference_patch_size(sites: usize, steps: usize) -> (usize, usize) {
    (steps + sites + 1, sites + 1)
}
