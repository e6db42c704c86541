//! Brute-force oracles shared by the integration tests. They read tile
//! colours directly and never call the library's rule tables.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::OnceLock;

use quasigas::analysis::{Cell4, Metric};
use quasigas::tileset::{find_patch, Patch, SearchOutcome, TileSet};
use quasigas::Symbol;

pub fn ammann() -> TileSet {
    TileSet::fixture("ammann16").unwrap()
}

/// The tile whose west edge matches `a`'s east edge and whose north edge
/// matches `b`'s south edge, by linear scan.
pub fn oracle_rho(ts: &TileSet, a: usize, b: usize) -> Option<usize> {
    let (ta, tb) = (&ts.tiles()[a], &ts.tiles()[b]);
    let hits: Vec<usize> =
        ts.tiles().iter().filter(|u| u.west == ta.east && u.north == tb.south).map(|u| u.id).collect();
    assert!(hits.len() <= 1, "oracle found {} successors for ({a}, {b})", hits.len());
    hits.first().copied()
}

/// Blank-extended rule with blank `= ts.len()`.
pub fn oracle_fbar(ts: &TileSet, a: Symbol, b: Symbol) -> Symbol {
    let blank = ts.len() as Symbol;
    if a == blank || b == blank {
        return blank;
    }
    oracle_rho(ts, a as usize, b as usize).map_or(blank, |u| u as Symbol)
}

pub fn oracle_majority(c: Symbol, e: Symbol, n: Symbol) -> Symbol {
    if c == e || c == n {
        c
    } else if e == n {
        e
    } else {
        c
    }
}

/// Stacked rule on the neighbourhood `(000, 100, 010, 001, 101, 011)`.
pub fn oracle_ftilde(ts: &TileSet, p: &[Symbol; 6]) -> Symbol {
    oracle_fbar(ts, oracle_majority(p[0], p[1], p[2]), oracle_majority(p[3], p[4], p[5]))
}

/// Fully periodic space-time array indexed `[t][a][b][i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Torus {
    pub dims: [usize; 3],
    pub rows: Vec<Vec<Symbol>>,
}

impl Torus {
    pub fn at(&self, a: usize, b: usize, i: usize, t: usize) -> Symbol {
        let [na, nb, nl] = self.dims;
        self.rows[t][((a % na) * nb + (b % nb)) * nl + (i % nl)]
    }

    pub fn set(&mut self, a: usize, b: usize, i: usize, t: usize, s: Symbol) {
        let [_, nb, nl] = self.dims;
        self.rows[t][(a * nb + b) * nl + i] = s;
    }

    pub fn pattern(&self, a: usize, b: usize, i: usize, t: usize) -> [Symbol; 6] {
        [
            self.at(a, b, i, t),
            self.at(a + 1, b, i, t),
            self.at(a, b + 1, i, t),
            self.at(a, b, i + 1, t),
            self.at(a + 1, b, i + 1, t),
            self.at(a, b + 1, i + 1, t),
        ]
    }

    /// Probability of rows `1..` given row 0 under the noisy stacked rule.
    pub fn path_probability(&self, ts: &TileSet, epsilon: f64) -> f64 {
        let m = ts.len() + 1;
        let [na, nb, nl] = self.dims;
        let mut p = 1.0;
        for t in 1..self.rows.len() {
            for a in 0..na {
                for b in 0..nb {
                    for i in 0..nl {
                        let det = oracle_ftilde(ts, &self.pattern(a, b, i, t - 1));
                        p *= if det == self.at(a, b, i, t) { 1.0 - epsilon } else { epsilon / (m - 1) as f64 };
                    }
                }
            }
        }
        p
    }

    /// Conditional law of one cell given all others, by reweighting.
    pub fn path_conditional(&self, ts: &TileSet, epsilon: f64, cell: [usize; 4]) -> Vec<f64> {
        let [a, b, i, t] = cell;
        let mut work = self.clone();
        let weights: Vec<f64> = (0..=ts.len() as Symbol)
            .map(|s| {
                work.set(a, b, i, t, s);
                work.path_probability(ts, epsilon)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }
}

pub fn distance(metric: Metric, p: &Cell4, q: &Cell4) -> usize {
    let d = p.iter().zip(q).map(|(x, y)| x.abs_diff(*y));
    match metric {
        Metric::L1 => d.sum(),
        Metric::Linf => d.max().unwrap_or(0),
    }
}

/// Components of the graph joining cells within distance `r`, by BFS over
/// all pairs. Clusters sorted, ordered by smallest cell.
pub fn bfs_partition(cells: &[Cell4], r: usize, metric: Metric) -> Vec<Vec<Cell4>> {
    let mut seen = vec![false; cells.len()];
    let mut out = Vec::new();
    for start in 0..cells.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(cells[u]);
            for v in 0..cells.len() {
                if !seen[v] && distance(metric, &cells[u], &cells[v]) <= r {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out.sort();
    out
}

/// Some component touches both faces of an axis of extent at least 2.
pub fn oracle_spanning(partition: &[Vec<Cell4>], extents: [usize; 4]) -> bool {
    partition.iter().any(|comp| {
        (0..4).any(|ax| {
            extents[ax] >= 2
                && comp.iter().any(|c| c[ax] == 0)
                && comp.iter().any(|c| c[ax] == extents[ax] - 1)
        })
    })
}

pub const BIG_PATCH: (usize, usize) = (120, 40);

/// A large valid patch, searched once per test binary.
pub fn big_patch() -> &'static Patch {
    static PATCH: OnceLock<Patch> = OnceLock::new();
    PATCH.get_or_init(|| {
        let ts = ammann();
        match find_patch(&ts, BIG_PATCH.0, BIG_PATCH.1, 100_000_000).unwrap() {
            SearchOutcome::Found(p) => p,
            other => panic!("no {BIG_PATCH:?} patch: {other:?}"),
        }
    })
}
