//! The stacked automaton on `(a, b, i)` configurations: Toom's
//! north-east-center majority vote in every `(a, b)` plane, then the line
//! rule along every `i` line.
//!
//! The `a` and `b` axes always wrap. The `i` axis uses a [`Boundary`]; for
//! a feed stream the fed value stands for the already corrected cell at
//! index `L`, shared by every `(a, b)` line.

use std::io::{BufRead, Write};

use crate::ca1d::{run1d, Boundary, Config1D, LocalRule};
use crate::{Error, Result, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config3D {
    extents: [usize; 3],
    cells: Vec<Symbol>,
    pub boundary_i: Boundary,
}

impl Config3D {
    pub fn new(extents: [usize; 3], cells: Vec<Symbol>, boundary_i: Boundary) -> Result<Self> {
        let [a, b, l] = extents;
        if a == 0 || b == 0 || l == 0 || cells.len() != a * b * l {
            return Err(Error::InvalidParameter(format!(
                "extents {extents:?} with {} cells",
                cells.len()
            )));
        }
        Ok(Self { extents, cells, boundary_i })
    }

    pub fn filled(extents: [usize; 3], symbol: Symbol, boundary_i: Boundary) -> Result<Self> {
        Self::new(extents, vec![symbol; extents.iter().product()], boundary_i)
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Symbol> {
        self.cells
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, i: usize) -> usize {
        (a * self.extents[1] + b) * self.extents[2] + i
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, i: usize) -> Symbol {
        self.cells[self.index(a, b, i)]
    }

    pub fn set(&mut self, a: usize, b: usize, i: usize, s: Symbol) {
        let k = self.index(a, b, i);
        self.cells[k] = s;
    }

    /// The line `L_{a,b}`.
    pub fn line(&self, a: usize, b: usize) -> &[Symbol] {
        let start = self.index(a, b, 0);
        &self.cells[start..start + self.extents[2]]
    }

    /// Recovers `x` when the configuration is constant along `a` and `b`.
    pub fn as_clone(&self) -> Option<Config1D> {
        let first = self.line(0, 0);
        let constant = self.cells.chunks(self.extents[2]).all(|line| line == first);
        constant.then(|| Config1D { cells: first.to_vec(), boundary: self.boundary_i.clone() })
    }

    /// Binary dump: a `A B L` decimal header line, then one byte per cell
    /// with `a` outermost and `i` innermost. The boundary is not stored.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        let [a, b, l] = self.extents;
        writeln!(w, "{a} {b} {l}")?;
        w.write_all(&self.cells)?;
        Ok(())
    }

    /// Reads a dump written by [`Config3D::write_dump`].
    pub fn read_dump(mut r: impl BufRead, boundary_i: Boundary) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let dims = header
            .split_whitespace()
            .map(|f| f.parse::<usize>().map_err(|e| Error::MalformedDump(format!("header `{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let [a, b, l] = dims[..] else {
            return Err(Error::MalformedDump(format!("header `{}`", header.trim_end())));
        };
        let mut cells = vec![0u8; a * b * l];
        r.read_exact(&mut cells)
            .map_err(|e| Error::MalformedDump(format!("body: {e}")))?;
        Self::new([a, b, l], cells, boundary_i)
    }
}

/// Majority of three with the center winning a three-way tie.
#[inline]
pub fn majority(center: Symbol, east: Symbol, north: Symbol) -> Symbol {
    if east == north {
        east
    } else {
        center
    }
}

/// `y'_{a,b,i} = maj(y_{a,b,i}, y_{a+1,b,i}, y_{a,b+1,i})`, wrapping in `a`
/// and `b`.
pub fn toom_correct(y: &Config3D) -> Config3D {
    let [na, nb, nl] = y.extents;
    let mut cells = Vec::with_capacity(y.cells.len());
    for a in 0..na {
        let a1 = (a + 1) % na;
        for b in 0..nb {
            let b1 = (b + 1) % nb;
            let (c, e, n) = (y.line(a, b), y.line(a1, b), y.line(a, b1));
            cells.extend((0..nl).map(|i| majority(c[i], e[i], n[i])));
        }
    }
    Config3D { extents: y.extents, cells, boundary_i: y.boundary_i.clone() }
}

/// One step of the stacked automaton. The majority phase completes for
/// every cell before the line rule reads any corrected value.
pub fn stacked_step(rule: &LocalRule, y: &Config3D) -> Result<Config3D> {
    let fed = y.boundary_i.fed_symbol(rule.blank(), 0)?;
    let corrected = toom_correct(y);
    let nl = y.extents[2];
    let mut cells = Vec::with_capacity(y.cells.len());
    for line in corrected.cells.chunks(nl) {
        let edge = fed.unwrap_or(line[0]);
        cells.extend((0..nl).map(|i| rule.apply(line[i], if i + 1 < nl { line[i + 1] } else { edge })));
    }
    Ok(Config3D { extents: y.extents, cells, boundary_i: y.boundary_i.advanced(1) })
}

/// `κ(x)`: the configuration with `x` on every line `L_{a,b}`.
pub fn clone3d(x: &Config1D, a: usize, b: usize) -> Result<Config3D> {
    let cells = x.cells.repeat(a * b);
    Config3D::new([a, b, x.cells.len()], cells, x.boundary.clone())
}

/// A single overwritten cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flip {
    pub a: usize,
    pub b: usize,
    pub i: usize,
    pub symbol: Symbol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErosionOutcome {
    /// First time at which the state equals the unperturbed trajectory.
    Recovered { t: usize },
    NotRecovered { steps: usize },
}

/// Runs the noiseless stacked automaton from `κ(x)` with `flips` applied
/// and reports when it rejoins the clone of `x`'s own trajectory. Flips
/// closer than `margin` to any face of the window are rejected.
pub fn erosion_probe(
    rule: &LocalRule,
    x: &Config1D,
    extents_ab: [usize; 2],
    flips: &[Flip],
    margin: usize,
    steps: usize,
) -> Result<ErosionOutcome> {
    let [na, nb] = extents_ab;
    let nl = x.cells.len();
    for f in flips {
        let inside = |v: usize, n: usize| v >= margin && v + margin < n;
        if !(inside(f.a, na) && inside(f.b, nb) && inside(f.i, nl)) {
            return Err(Error::FlipInMargin([f.a, f.b, f.i]));
        }
        rule.alphabet().check(f.symbol)?;
    }
    let reference = run1d(rule, x, steps)?;
    let mut state = clone3d(x, na, nb)?;
    for f in flips {
        state.set(f.a, f.b, f.i, f.symbol);
    }
    for t in 0..=steps {
        let expected = &reference.rows[t];
        if state.cells.chunks(nl).all(|line| line == expected.as_slice()) {
            return Ok(ErosionOutcome::Recovered { t });
        }
        if t < steps {
            state = stacked_step(rule, &state)?;
        }
    }
    Ok(ErosionOutcome::NotRecovered { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca1d::step1d;
    use crate::tileset::TileSet;

    fn rule() -> LocalRule {
        LocalRule::from_tileset(&TileSet::fixture("ammann16").unwrap()).unwrap()
    }

    #[test]
    fn majority_cases() {
        assert_eq!(majority(3, 3, 3), 3);
        for (c, e, n) in [(3, 3, 5), (3, 5, 3), (5, 3, 3)] {
            assert_eq!(majority(c, e, n), 3);
        }
        assert_eq!(majority(1, 2, 4), 1);
    }

    #[test]
    fn toom_fixes_an_isolated_flip() {
        let rule = rule();
        let x = Config1D::new(rule.alphabet(), vec![0, 1, 2, 3], Boundary::Periodic).unwrap();
        let clean = clone3d(&x, 4, 4).unwrap();
        let mut y = clean.clone();
        y.set(2, 1, 3, 9);
        assert_eq!(toom_correct(&y), clean);
        assert_eq!(toom_correct(&clean), clean);
    }

    #[test]
    fn clone_reads_back() {
        let rule = rule();
        let x = Config1D::new(rule.alphabet(), vec![4, 16, 2], Boundary::FeedBlank).unwrap();
        let y = clone3d(&x, 3, 2).unwrap();
        for a in 0..3 {
            for b in 0..2 {
                assert_eq!(y.line(a, b), &x.cells[..]);
            }
        }
        assert_eq!(y.as_clone().unwrap(), x);
    }

    #[test]
    fn all_blank_is_fixed() {
        let rule = rule();
        let y = Config3D::filled([3, 3, 5], rule.blank(), Boundary::FeedBlank).unwrap();
        assert_eq!(stacked_step(&rule, &y).unwrap().cells(), y.cells());
    }

    #[test]
    fn clone_commutes_on_a_small_row() {
        let rule = rule();
        let x = Config1D::new(rule.alphabet(), vec![0, 5, 9, 16, 12, 3], Boundary::Periodic).unwrap();
        let lhs = stacked_step(&rule, &clone3d(&x, 2, 3).unwrap()).unwrap();
        let rhs = clone3d(&step1d(&rule, &x).unwrap(), 2, 3).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dump_round_trips() {
        let y = Config3D::new([2, 1, 3], vec![0, 1, 2, 3, 4, 16], Boundary::Periodic).unwrap();
        let mut buf = Vec::new();
        y.write_dump(&mut buf).unwrap();
        assert!(buf.starts_with(b"2 1 3\n"));
        let back = Config3D::read_dump(&buf[..], Boundary::Periodic).unwrap();
        assert_eq!(back, y);
        assert!(Config3D::read_dump(&b"2 1 3\n\x00"[..], Boundary::Periodic).is_err());
    }

    #[test]
    fn empty_flip_set_recovers_at_zero() {
        let rule = rule();
        let x = Config1D::blank(rule.alphabet(), 8, Boundary::FeedBlank).unwrap();
        assert_eq!(
            erosion_probe(&rule, &x, [8, 8], &[], 1, 4).unwrap(),
            ErosionOutcome::Recovered { t: 0 }
        );
    }

    #[test]
    fn flips_in_margin_are_rejected() {
        let rule = rule();
        let x = Config1D::blank(rule.alphabet(), 8, Boundary::FeedBlank).unwrap();
        let flip = Flip { a: 0, b: 3, i: 3, symbol: 1 };
        assert!(matches!(
            erosion_probe(&rule, &x, [8, 8], &[flip], 1, 4),
            Err(Error::FlipInMargin([0, 3, 3]))
        ));
    }
}
