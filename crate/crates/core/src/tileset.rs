//! Wang tile sets: loading, corner determinism, and patch search.
//!
//! Adjacency convention used throughout the crate: horizontal neighbours
//! share `east(left) == west(right)`, vertical neighbours share
//! `south(upper) == north(lower)`, and patch rows are indexed downward.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use crate::{Error, Result};

const AMMANN16: &str = include_str!("../fixtures/ammann16.tiles");

/// Largest tile count representable next to the blank symbol in a `u8`.
pub const MAX_TILES: usize = 254;

/// A single Wang tile with its four edge colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tile {
    pub id: usize,
    pub north: u32,
    pub east: u32,
    pub south: u32,
    pub west: u32,
}

impl Tile {
    fn colors(&self) -> [u32; 4] {
        [self.north, self.east, self.south, self.west]
    }
}

/// An immutable, validated collection of Wang tiles with ids `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileSet {
    name: String,
    tiles: Vec<Tile>,
}

impl TileSet {
    /// Builds a tile set from tiles whose ids must be `0..n` in order.
    pub fn new(name: impl Into<String>, tiles: Vec<Tile>) -> Result<Self> {
        if tiles.is_empty() {
            return Err(Error::EmptySet);
        }
        if tiles.len() > MAX_TILES {
            return Err(Error::TooManyTiles(tiles.len()));
        }
        let mut seen: HashMap<[u32; 4], usize> = HashMap::new();
        for (pos, tile) in tiles.iter().enumerate() {
            if tile.id != pos {
                return Err(Error::MalformedLine {
                    line: pos + 1,
                    reason: format!("expected id {pos}, found {}", tile.id),
                });
            }
            if let Some(&first) = seen.get(&tile.colors()) {
                return Err(Error::DuplicateTile { first, second: tile.id });
            }
            seen.insert(tile.colors(), tile.id);
        }
        Ok(Self { name: name.into(), tiles })
    }

    /// Parses the text tile format: `id north east south west` per line,
    /// `#` comments and blank lines ignored.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut tiles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| Error::MalformedLine { line: lineno + 1, reason };
            let fields = line
                .split_whitespace()
                .map(|f| f.parse::<u32>().map_err(|e| malformed(format!("`{f}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let [id, north, east, south, west] = fields[..] else {
                return Err(malformed(format!("expected 5 fields, found {}", fields.len())));
            };
            if id as usize != tiles.len() {
                return Err(malformed(format!("expected id {}, found {id}", tiles.len())));
            }
            tiles.push(Tile { id: id as usize, north, east, south, west });
        }
        Self::new(name, tiles)
    }

    /// Looks up a bundled fixture by name.
    pub fn fixture(name: &str) -> Result<Self> {
        match name {
            "ammann16" => Self::parse(name, AMMANN16),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }

    /// Resolves a fixture name, falling back to a tile file on disk.
    pub fn load(name_or_path: &str) -> Result<Self> {
        match Self::fixture(name_or_path) {
            Err(Error::UnknownFixture(_)) => {
                let path = Path::new(name_or_path);
                if !path.exists() {
                    return Err(Error::UnknownFixture(name_or_path.to_string()));
                }
                let label = path.file_stem().map_or(name_or_path.into(), |s| s.to_string_lossy());
                Self::parse(label.into_owned(), &std::fs::read_to_string(path)?)
            }
            other => other,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tile(&self, id: usize) -> Result<&Tile> {
        self.tiles.get(id).ok_or(Error::IdOutOfRange { id, n: self.tiles.len() })
    }

    /// Serializes back into the tile file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.name);
        for t in &self.tiles {
            out.push_str(&format!("{} {} {} {} {}\n", t.id, t.north, t.east, t.south, t.west));
        }
        out
    }
}

/// Reads a tile set in the text tile format from any byte stream.
pub fn load_tileset(mut source: impl Read) -> Result<TileSet> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    TileSet::parse("stream", &text)
}

/// Corner from which the two incoming edge colors are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `(west, north)` determines the tile.
    NW,
    /// `(east, south)` determines the tile.
    SE,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::NW => "north-west",
            Direction::SE => "south-east",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminismViolation {
    /// `(west, north)` for NW, `(east, south)` for SE.
    pub colors: (u32, u32),
    pub tiles: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminismReport {
    pub direction: Direction,
    pub violations: Vec<DeterminismViolation>,
}

impl DeterminismReport {
    pub fn is_deterministic(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every incoming color pair shared by more than one tile.
pub fn check_deterministic(ts: &TileSet, direction: Direction) -> DeterminismReport {
    let mut groups: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for t in ts.tiles() {
        let key = match direction {
            Direction::NW => (t.west, t.north),
            Direction::SE => (t.east, t.south),
        };
        groups.entry(key).or_default().push(t.id);
    }
    let mut violations: Vec<_> = groups
        .into_iter()
        .filter(|(_, tiles)| tiles.len() > 1)
        .map(|(colors, tiles)| DeterminismViolation { colors, tiles })
        .collect();
    violations.sort_by_key(|v| v.colors);
    DeterminismReport { direction, violations }
}

/// The successor table `rho(a, b)`: the unique tile whose west edge matches
/// `east(a)` and whose north edge matches `south(b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoTable {
    n: usize,
    table: Vec<Option<u8>>,
}

impl RhoTable {
    /// Precomputes the table; fails unless the set is NW-deterministic.
    pub fn new(ts: &TileSet) -> Result<Self> {
        if !check_deterministic(ts, Direction::NW).is_deterministic() {
            return Err(Error::NotDeterministic("north-west"));
        }
        let by_wn: HashMap<(u32, u32), usize> =
            ts.tiles().iter().map(|t| ((t.west, t.north), t.id)).collect();
        let n = ts.len();
        let mut table = vec![None; n * n];
        for a in ts.tiles() {
            for b in ts.tiles() {
                table[a.id * n + b.id] = by_wn.get(&(a.east, b.south)).map(|&u| u as u8);
            }
        }
        Ok(Self { n, table })
    }

    pub fn n_tiles(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> Result<Option<usize>> {
        for id in [a, b] {
            if id >= self.n {
                return Err(Error::IdOutOfRange { id, n: self.n });
            }
        }
        Ok(self.table[a * self.n + b].map(usize::from))
    }
}

/// Convenience wrapper building a [`RhoTable`] for a single lookup.
pub fn rho(ts: &TileSet, a: usize, b: usize) -> Result<Option<usize>> {
    RhoTable::new(ts)?.get(a, b)
}

/// A rectangular grid of tile ids, `cells[row * width + col]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<usize>,
}

/// The first adjacency that fails in a patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchDefect {
    UnknownTile { col: usize, row: usize },
    Horizontal { col: usize, row: usize },
    Vertical { col: usize, row: usize },
}

impl Patch {
    pub fn new(width: usize, height: usize, cells: Vec<usize>) -> Result<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "patch {width}x{height} needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(Self { width, height, cells })
    }

    pub fn get(&self, col: usize, row: usize) -> usize {
        self.cells[row * self.width + col]
    }

    /// Checks every interior adjacency, and the wrap-around ones as well
    /// when `torus` is set. `(col, row)` of a defect names the left/upper
    /// cell of the failing pair.
    pub fn defect(&self, ts: &TileSet, torus: bool) -> Option<PatchDefect> {
        let tiles = ts.tiles();
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(col, row) >= tiles.len() {
                    return Some(PatchDefect::UnknownTile { col, row });
                }
            }
        }
        for row in 0..self.height {
            for col in 0..self.width {
                let here = &tiles[self.get(col, row)];
                let right = match (col + 1 < self.width, torus) {
                    (true, _) => Some(col + 1),
                    (false, true) => Some(0),
                    (false, false) => None,
                };
                if let Some(rc) = right {
                    if here.east != tiles[self.get(rc, row)].west {
                        return Some(PatchDefect::Horizontal { col, row });
                    }
                }
                let below = match (row + 1 < self.height, torus) {
                    (true, _) => Some(row + 1),
                    (false, true) => Some(0),
                    (false, false) => None,
                };
                if let Some(br) = below {
                    if here.south != tiles[self.get(col, br)].north {
                        return Some(PatchDefect::Vertical { col, row });
                    }
                }
            }
        }
        None
    }

    pub fn is_valid(&self, ts: &TileSet) -> bool {
        self.defect(ts, false).is_none()
    }

    pub fn is_valid_torus(&self, ts: &TileSet) -> bool {
        self.defect(ts, true).is_none()
    }

    pub fn sub_patch(&self, col: usize, row: usize, width: usize, height: usize) -> Result<Patch> {
        if col + width > self.width || row + height > self.height {
            return Err(Error::WindowTooLarge {
                requested: format!("{width}x{height}+{col}+{row}"),
                available: format!("{}x{}", self.width, self.height),
            });
        }
        let cells = (row..row + height)
            .flat_map(|r| (col..col + width).map(move |c| (c, r)))
            .map(|(c, r)| self.get(c, r))
            .collect();
        Patch::new(width, height, cells)
    }

    /// One row per line, ids separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.cells.chunks(self.width) {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Patch> {
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<usize>().map_err(|e| Error::MalformedLine {
                        line: lineno + 1,
                        reason: format!("`{f}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::MalformedLine {
                        line: lineno + 1,
                        reason: format!("row has {} cells, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        let width = rows.first().map_or(0, Vec::len);
        let height = rows.len();
        Patch::new(width, height, rows.concat())
    }
}

/// Result of a bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    /// The whole search space was explored without a witness.
    ProvenAbsent,
    /// The node budget ran out before the search finished.
    BudgetExhausted { nodes: u64 },
}

impl<T> SearchOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

struct CandidateIndex {
    all: Vec<usize>,
    by_west: HashMap<u32, Vec<usize>>,
    by_north: HashMap<u32, Vec<usize>>,
    by_west_north: HashMap<(u32, u32), Vec<usize>>,
}

impl CandidateIndex {
    fn new(ts: &TileSet) -> Self {
        let mut idx = CandidateIndex {
            all: (0..ts.len()).collect(),
            by_west: HashMap::new(),
            by_north: HashMap::new(),
            by_west_north: HashMap::new(),
        };
        for t in ts.tiles() {
            idx.by_west.entry(t.west).or_default().push(t.id);
            idx.by_north.entry(t.north).or_default().push(t.id);
            idx.by_west_north.entry((t.west, t.north)).or_default().push(t.id);
        }
        idx
    }

    fn get(&self, west: Option<u32>, north: Option<u32>) -> &[usize] {
        let hit = match (west, north) {
            (None, None) => return &self.all,
            (Some(w), None) => self.by_west.get(&w),
            (None, Some(n)) => self.by_north.get(&n),
            (Some(w), Some(n)) => self.by_west_north.get(&(w, n)),
        };
        hit.map_or(&[], Vec::as_slice)
    }
}

/// Visiting order for open patches: growing squares anchored at the top
/// left, then the leftover columns (or rows). Every cell comes after its left
/// and upper neighbours, so dead ends surface while the search is still small.
fn shell_order(width: usize, height: usize) -> Vec<usize> {
    let s = width.min(height);
    let mut order = Vec::with_capacity(width * height);
    for k in 0..s {
        order.extend((0..k).map(|r| r * width + k));
        order.extend((0..k).map(|c| k * width + c));
        order.push(k * width + k);
    }
    if width > s {
        order.extend((s..width).flat_map(|c| (0..height).map(move |r| r * width + c)));
    } else {
        order.extend((s..height).flat_map(|r| (0..width).map(move |c| r * width + c)));
    }
    order
}

/// Depth-first search. Given the left and upper neighbours an
/// NW-deterministic set leaves at most one candidate per cell, so branching
/// happens only along the top row and left column. Torus searches run in
/// row-major order so the wrap checks see the row and column starts.
fn search(ts: &TileSet, width: usize, height: usize, torus: bool, budget: Option<u64>) -> SearchOutcome<Patch> {
    let tiles = ts.tiles();
    let index = CandidateIndex::new(ts);
    let n = width * height;
    let order: Vec<usize> = if torus { (0..n).collect() } else { shell_order(width, height) };
    let mut cells = vec![0usize; n];
    let mut next = vec![0usize; n];
    let mut nodes = 0u64;
    let mut k = 0usize;
    loop {
        if k == n {
            return SearchOutcome::Found(Patch { width, height, cells });
        }
        let pos = order[k];
        let (row, col) = (pos / width, pos % width);
        let west = (col > 0).then(|| tiles[cells[pos - 1]].east);
        let north = (row > 0).then(|| tiles[cells[pos - width]].south);
        let cands = index.get(west, north);
        let mut placed = false;
        while next[k] < cands.len() {
            let t = cands[next[k]];
            next[k] += 1;
            nodes += 1;
            if budget.is_some_and(|b| nodes > b) {
                return SearchOutcome::BudgetExhausted { nodes: nodes - 1 };
            }
            if torus {
                let first_in_row = if col == 0 { t } else { cells[row * width] };
                if col == width - 1 && tiles[t].east != tiles[first_in_row].west {
                    continue;
                }
                let top_of_col = if row == 0 { t } else { cells[col] };
                if row == height - 1 && tiles[t].south != tiles[top_of_col].north {
                    continue;
                }
            }
            cells[pos] = t;
            placed = true;
            break;
        }
        if placed {
            k += 1;
            if k < n {
                next[k] = 0;
            }
        } else if k == 0 {
            return SearchOutcome::ProvenAbsent;
        } else {
            k -= 1;
        }
    }
}

/// Backtracking search for a `w x h` patch; `budget` bounds the number of
/// tile placements tried.
pub fn find_patch(ts: &TileSet, w: usize, h: usize, budget: u64) -> Result<SearchOutcome<Patch>> {
    if w == 0 || h == 0 {
        return Err(Error::InvalidParameter(format!("patch size {w}x{h}")));
    }
    Ok(search(ts, w, h, false, Some(budget)))
}

/// Exhaustive search for a `p x q` patch that is valid with wrap-around in
/// both axes, i.e. a periodic tiling with periods `p` and `q`.
pub fn find_torus_tiling(ts: &TileSet, p: usize, q: usize) -> Result<Option<Patch>> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidParameter(format!("torus size {p}x{q}")));
    }
    Ok(search(ts, p, q, true, None).found())
}
