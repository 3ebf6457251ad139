//! Binary β-marking configurations on a square grid and the legal grid moves.
//!
//! A [`Configuration`] is an `n × n` occupancy matrix. Three families of moves act on it:
//!
//! * commutation (T₁): swap two adjacent rows or columns, or sweep the column pairs
//!   `(1,2), (3,4), …` in one go;
//! * cyclic permutation (T₂): shift every column (or row) by one with wraparound;
//! * stabilization (T₃): insert or remove an L-shaped kink, changing the grid number by ±1.
//!
//! All positions in the public API are 1-based, matching how grid diagrams are usually drawn.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Which family of lines a move acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

/// Direction of a cyclic shift. `Forward` on columns moves column `j` to `j + 1` and the last
/// column around to the front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "bwd")]
    Backward,
}

impl Direction {
    pub fn inverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Square row-major storage shared by binary configurations and the labelled grids used to
/// recover the cell permutation induced by a move sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Lattice<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Lattice<T> {
    pub(crate) fn from_vec(n: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.n + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.n + col] = value;
    }

    pub(crate) fn data(&self) -> &[T] {
        &self.data
    }

    fn swap_cols(&mut self, col: usize) {
        for row in 0..self.n {
            self.data.swap(row * self.n + col, row * self.n + col + 1);
        }
    }

    fn swap_rows(&mut self, row: usize) {
        let n = self.n;
        let (head, tail) = self.data.split_at_mut((row + 1) * n);
        head[row * n..].swap_with_slice(&mut tail[..n]);
    }

    fn shift_cols(&mut self, dir: Direction) {
        for row in self.data.chunks_mut(self.n.max(1)) {
            match dir {
                Direction::Forward => row.rotate_right(1),
                Direction::Backward => row.rotate_left(1),
            }
        }
    }

    fn shift_rows(&mut self, dir: Direction) {
        match dir {
            Direction::Forward => self.data.rotate_right(self.n),
            Direction::Backward => self.data.rotate_left(self.n),
        }
    }

    /// Grows the lattice by one, inserting a fresh row after `row` and a fresh column after
    /// `col` (both 0-based), filled with `fill`.
    fn insert_after(&self, row: usize, col: usize, fill: T) -> Self {
        let n = self.n + 1;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let value = if r == row + 1 || c == col + 1 {
                    fill.clone()
                } else {
                    let src_r = if r > row + 1 { r - 1 } else { r };
                    let src_c = if c > col + 1 { c - 1 } else { c };
                    self.get(src_r, src_c).clone()
                };
                data.push(value);
            }
        }
        Self { n, data }
    }

    /// Shrinks the lattice by one, deleting row `row` and column `col` (0-based).
    fn remove(&self, row: usize, col: usize) -> Self {
        let n = self.n - 1;
        let mut data = Vec::with_capacity(n * n);
        for r in (0..self.n).filter(|&r| r != row) {
            for c in (0..self.n).filter(|&c| c != col) {
                data.push(self.get(r, c).clone());
            }
        }
        Self { n, data }
    }
}

/// An `n × n` binary occupancy matrix: `true` marks a grid square carrying a nonzero Betti
/// number.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    cells: Lattice<bool>,
}

impl Configuration {
    /// All-empty configuration of grid number `n`.
    pub fn empty(n: usize) -> Self {
        Self::filled(n, false)
    }

    pub fn filled(n: usize, value: bool) -> Self {
        Self { cells: Lattice::from_vec(n, vec![value; n * n]) }
    }

    /// Builds a configuration from row-major rows; every row must have as many entries as there
    /// are rows.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self, GridError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(GridError::Shape(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { cells: Lattice::from_vec(n, data) })
    }

    /// Parses rows written as `'0'`/`'1'` strings, e.g. `["1100", "1000", ...]`.
    pub fn from_bit_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, GridError> {
        let parsed = rows
            .iter()
            .map(|row| {
                row.as_ref()
                    .chars()
                    .map(|ch| match ch {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(GridError::Shape(format!("unexpected cell symbol {other:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(&parsed)
    }

    /// Builds a configuration from a flat row-major cell vector of length `n²`.
    pub fn from_cells(n: usize, cells: Vec<bool>) -> Result<Self, GridError> {
        if cells.len() != n * n {
            return Err(GridError::Shape(format!("{} cells cannot fill a grid of number {n}", cells.len())));
        }
        Ok(Self { cells: Lattice::from_vec(n, cells) })
    }

    /// Grid number.
    pub fn n(&self) -> usize {
        self.cells.n()
    }

    /// Occupancy at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> bool {
        *self.cells.get(row, col)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells.set(row, col, value);
    }

    /// Row-major cell slice.
    pub fn cells(&self) -> &[bool] {
        self.cells.data()
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.cells().chunks(self.n().max(1)).take(self.n()).map(<[bool]>::to_vec).collect()
    }

    pub fn occupied(&self) -> usize {
        self.cells().iter().filter(|&&c| c).count()
    }

    /// Fraction of occupied cells; zero for the empty grid.
    pub fn occupancy(&self) -> f64 {
        let total = self.n() * self.n();
        if total == 0 {
            0.0
        } else {
            self.occupied() as f64 / total as f64
        }
    }

    /// Copies the `size × size` window whose top-left corner is at 0-based `(row, col)`.
    pub fn window(&self, row: usize, col: usize, size: usize) -> Result<Self, GridError> {
        if row + size > self.n() || col + size > self.n() {
            return Err(GridError::Bounds(format!(
                "window of size {size} at ({}, {}) exceeds grid number {}",
                row + 1,
                col + 1,
                self.n()
            )));
        }
        let mut data = Vec::with_capacity(size * size);
        for r in row..row + size {
            for c in col..col + size {
                data.push(self.get(r, c));
            }
        }
        Ok(Self { cells: Lattice::from_vec(size, data) })
    }

    /// Mirror image with column order reversed.
    pub fn reverse_columns(&self) -> Self {
        let mut data = self.cells().to_vec();
        for row in data.chunks_mut(self.n().max(1)) {
            row.reverse();
        }
        Self { cells: Lattice::from_vec(self.n(), data) }
    }

    fn check_pair_index(&self, index: usize) -> Result<usize, GridError> {
        if index == 0 || index >= self.n() {
            return Err(GridError::Bounds(format!(
                "commutation index {index} outside 1..={}",
                self.n().saturating_sub(1)
            )));
        }
        Ok(index - 1)
    }

    fn check_site(&self, column: usize, row: usize) -> Result<(usize, usize), GridError> {
        if column == 0 || row == 0 || column > self.n() || row > self.n() {
            return Err(GridError::Bounds(format!(
                "cell (row {row}, column {column}) outside a grid of number {}",
                self.n()
            )));
        }
        Ok((row - 1, column - 1))
    }
}

/// Swaps rows or columns `index` and `index + 1` (1-based).
pub fn commute_pair(config: &Configuration, axis: Axis, index: usize) -> Result<Configuration, GridError> {
    let at = config.check_pair_index(index)?;
    let mut cells = config.cells.clone();
    match axis {
        Axis::Columns => cells.swap_cols(at),
        Axis::Rows => cells.swap_rows(at),
    }
    Ok(Configuration { cells })
}

/// Swaps column pairs `(1,2), (3,4), …`; the last column stays put when `n` is odd.
pub fn commute_all(config: &Configuration) -> Configuration {
    let mut cells = config.cells.clone();
    commute_all_lattice(&mut cells);
    Configuration { cells }
}

fn commute_all_lattice<T: Clone>(cells: &mut Lattice<T>) {
    let mut col = 0;
    while col + 1 < cells.n() {
        cells.swap_cols(col);
        col += 2;
    }
}

/// Cyclic shift of all columns (or rows) by one position with wraparound.
pub fn cyclic_permute(config: &Configuration, axis: Axis, direction: Direction) -> Configuration {
    let mut cells = config.cells.clone();
    match axis {
        Axis::Columns => cells.shift_cols(direction),
        Axis::Rows => cells.shift_rows(direction),
    }
    Configuration { cells }
}

/// Adds a kink at the occupied cell `(row, column)`: a fresh empty column is inserted after
/// `column` and a fresh empty row after `row`, then the marking is replaced by the three cells
/// `(row, column+1)`, `(row+1, column)`, `(row+1, column+1)`. The grid number grows by one.
pub fn stabilize(config: &Configuration, column: usize, row: usize) -> Result<Configuration, GridError> {
    let (r, c) = config.check_site(column, row)?;
    if !config.get(r, c) {
        return Err(GridError::Precondition(format!(
            "cannot stabilize at empty cell (row {row}, column {column})"
        )));
    }
    let mut cells = config.cells.insert_after(r, c, false);
    cells.set(r, c, false);
    cells.set(r, c + 1, true);
    cells.set(r + 1, c, true);
    cells.set(r + 1, c + 1, true);
    Ok(Configuration { cells })
}

/// Removes a kink previously added by [`stabilize`] at `(row, column)`, collapsing it back to a
/// single marked cell. The grid number shrinks by one.
pub fn destabilize(config: &Configuration, column: usize, row: usize) -> Result<Configuration, GridError> {
    let (r, c) = config.check_site(column, row)?;
    let n = config.n();
    if r + 1 >= n || c + 1 >= n {
        return Err(GridError::Bounds(format!(
            "kink at (row {row}, column {column}) needs a row and column after it in a grid of number {n}"
        )));
    }
    let corner_ok = !config.get(r, c) && config.get(r, c + 1) && config.get(r + 1, c) && config.get(r + 1, c + 1);
    // the inserted row and column carry nothing but the kink
    let column_ok = (0..n).filter(|&i| i != r && i != r + 1).all(|i| !config.get(i, c + 1));
    let row_ok = (0..n).filter(|&j| j != c && j != c + 1).all(|j| !config.get(r + 1, j));
    if !(corner_ok && column_ok && row_ok) {
        return Err(GridError::Pattern(format!(
            "no removable kink at (row {row}, column {column})"
        )));
    }
    let mut cells = config.cells.remove(r + 1, c + 1);
    cells.set(r, c, true);
    Ok(Configuration { cells })
}

/// Number of cells whose occupancy differs.
pub fn hamming(a: &Configuration, b: &Configuration) -> Result<usize, GridError> {
    if a.n() != b.n() {
        return Err(GridError::Dimension { left: a.n(), right: b.n() });
    }
    Ok(a.cells().iter().zip(b.cells()).filter(|(x, y)| x != y).count())
}

/// One legal grid move. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Move {
    CommuteCols { i: usize },
    CommuteRows { i: usize },
    CommuteAll,
    CyclicCols { dir: Direction },
    CyclicRows { dir: Direction },
    Stabilize { col: usize, row: usize },
    Destabilize { col: usize, row: usize },
}

impl Move {
    pub fn apply(&self, config: &Configuration) -> Result<Configuration, GridError> {
        match *self {
            Move::CommuteCols { i } => commute_pair(config, Axis::Columns, i),
            Move::CommuteRows { i } => commute_pair(config, Axis::Rows, i),
            Move::CommuteAll => Ok(commute_all(config)),
            Move::CyclicCols { dir } => Ok(cyclic_permute(config, Axis::Columns, dir)),
            Move::CyclicRows { dir } => Ok(cyclic_permute(config, Axis::Rows, dir)),
            Move::Stabilize { col, row } => stabilize(config, col, row),
            Move::Destabilize { col, row } => destabilize(config, col, row),
        }
    }

    /// Grid-number change caused by the move.
    pub fn size_delta(&self) -> isize {
        match self {
            Move::Stabilize { .. } => 1,
            Move::Destabilize { .. } => -1,
            _ => 0,
        }
    }

    /// Applies the move to a grid of labels, tracking where each cell travels. Kink cells are
    /// filled with `blank`; destabilization simply drops the inserted row and column.
    pub(crate) fn relabel<T: Clone>(&self, cells: &Lattice<T>, blank: T) -> Result<Lattice<T>, GridError> {
        let n = cells.n();
        let pair = |i: usize| {
            if i == 0 || i >= n {
                Err(GridError::Bounds(format!("commutation index {i} outside 1..={}", n.saturating_sub(1))))
            } else {
                Ok(i - 1)
            }
        };
        let site = |col: usize, row: usize, grow: usize| {
            if col == 0 || row == 0 || col + grow > n || row + grow > n {
                Err(GridError::Bounds(format!("cell (row {row}, column {col}) outside grid number {n}")))
            } else {
                Ok((row - 1, col - 1))
            }
        };
        let mut out = cells.clone();
        match *self {
            Move::CommuteCols { i } => out.swap_cols(pair(i)?),
            Move::CommuteRows { i } => out.swap_rows(pair(i)?),
            Move::CommuteAll => commute_all_lattice(&mut out),
            Move::CyclicCols { dir } => out.shift_cols(dir),
            Move::CyclicRows { dir } => out.shift_rows(dir),
            Move::Stabilize { col, row } => {
                let (r, c) = site(col, row, 0)?;
                out = cells.insert_after(r, c, blank);
            }
            Move::Destabilize { col, row } => {
                let (r, c) = site(col, row, 1)?;
                out = cells.remove(r + 1, c + 1);
            }
        }
        Ok(out)
    }

    /// Short label used in trace tables (`T1`, `T2`, `T3+`, `T3-`, with the position when the
    /// move has one).
    pub fn label(&self) -> String {
        match *self {
            Move::CommuteAll => "T1".into(),
            Move::CommuteCols { i } => format!("T1c{i}"),
            Move::CommuteRows { i } => format!("T1r{i}"),
            Move::CyclicCols { dir: Direction::Forward } => "T2".into(),
            Move::CyclicCols { dir: Direction::Backward } => "T2b".into(),
            Move::CyclicRows { dir: Direction::Forward } => "T2r".into(),
            Move::CyclicRows { dir: Direction::Backward } => "T2rb".into(),
            Move::Stabilize { col, row } => format!("T3+{col}.{row}"),
            Move::Destabilize { col, row } => format!("T3-{col}.{row}"),
        }
    }

    /// Inverse of [`Move::label`].
    pub fn parse_label(token: &str) -> Result<Self, GridError> {
        let bad = || GridError::Parse(format!("unrecognized move {token:?}"));
        let token = token.trim();
        let index = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let site = |s: &str| -> Result<(usize, usize), GridError> {
            let (c, r) = s.split_once('.').ok_or_else(bad)?;
            Ok((index(c)?, index(r)?))
        };
        match token {
            "T1" => Ok(Move::CommuteAll),
            "T2" => Ok(Move::CyclicCols { dir: Direction::Forward }),
            "T2b" => Ok(Move::CyclicCols { dir: Direction::Backward }),
            "T2r" => Ok(Move::CyclicRows { dir: Direction::Forward }),
            "T2rb" => Ok(Move::CyclicRows { dir: Direction::Backward }),
            _ => {
                if let Some(rest) = token.strip_prefix("T1c") {
                    Ok(Move::CommuteCols { i: index(rest)? })
                } else if let Some(rest) = token.strip_prefix("T1r") {
                    Ok(Move::CommuteRows { i: index(rest)? })
                } else if let Some(rest) = token.strip_prefix("T3+") {
                    let (col, row) = site(rest)?;
                    Ok(Move::Stabilize { col, row })
                } else if let Some(rest) = token.strip_prefix("T3-") {
                    let (col, row) = site(rest)?;
                    Ok(Move::Destabilize { col, row })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// An ordered list of moves, applied left to right. Stabilizations and destabilizations must
/// balance so that the grid number is unchanged overall.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MoveSequence {
    moves: Vec<Move>,
    exponents: Option<(usize, usize, usize)>,
}

impl MoveSequence {
    pub fn new(moves: Vec<Move>) -> Result<Self, GridError> {
        let stabilize = moves.iter().filter(|m| m.size_delta() > 0).count();
        let destabilize = moves.iter().filter(|m| m.size_delta() < 0).count();
        if stabilize != destabilize {
            return Err(GridError::Unbalanced { stabilize, destabilize });
        }
        Ok(Self { moves, exponents: None })
    }

    /// `T₁ᵃ ∘ T₂ᵇ ∘ T₃ᶜ` in application order: `a` commute-all sweeps, `b` forward column
    /// shifts, then one stabilize/destabilize pair for each kink site `(column, row)`.
    pub fn canonical(a: usize, b: usize, kink_sites: &[(usize, usize)]) -> Self {
        let mut moves = Vec::with_capacity(a + b + 2 * kink_sites.len());
        moves.extend(std::iter::repeat_n(Move::CommuteAll, a));
        moves.extend(std::iter::repeat_n(Move::CyclicCols { dir: Direction::Forward }, b));
        for &(col, row) in kink_sites {
            moves.push(Move::Stabilize { col, row });
            moves.push(Move::Destabilize { col, row });
        }
        Self { moves, exponents: Some((a, b, kink_sites.len())) }
    }

    /// Reverses column order of an `n`-grid using adjacent commutations only (bubble order).
    pub fn column_reversal(n: usize) -> Self {
        let mut moves = Vec::new();
        for pass in 0..n.saturating_sub(1) {
            for i in 1..n - pass {
                moves.push(Move::CommuteCols { i });
            }
        }
        Self { moves, exponents: None }
    }

    /// Parses a comma-separated list of move labels such as `T2,T2,T1,T1`.
    pub fn parse(spec: &str) -> Result<Self, GridError> {
        let moves = spec
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(Move::parse_label)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(moves)
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// `(a, b, c)` when built through [`MoveSequence::canonical`].
    pub fn exponents(&self) -> Option<(usize, usize, usize)> {
        self.exponents
    }

    pub fn labels(&self) -> Vec<String> {
        self.moves.iter().map(Move::label).collect()
    }

    /// Every intermediate configuration, one per move.
    pub fn states(&self, config: &Configuration) -> Result<Vec<Configuration>, GridError> {
        let mut current = config.clone();
        let mut out = Vec::with_capacity(self.moves.len());
        for mv in &self.moves {
            current = mv.apply(&current)?;
            out.push(current.clone());
        }
        Ok(out)
    }

    /// Net cell permutation on an `n`-grid: entry `k` is the original index of the cell that
    /// ends at row-major position `k`.
    pub fn net_permutation(&self, n: usize) -> Result<Vec<usize>, GridError> {
        let mut labels = Lattice::from_vec(n, (0..n * n).collect::<Vec<usize>>());
        for mv in &self.moves {
            labels = mv.relabel(&labels, usize::MAX)?;
        }
        if labels.n() != n {
            return Err(GridError::Dimension { left: n, right: labels.n() });
        }
        Ok(labels.data().to_vec())
    }

    /// Number of cells left in place by the net permutation.
    pub fn fixed_points(&self, n: usize) -> Result<usize, GridError> {
        Ok(self.net_permutation(n)?.iter().enumerate().filter(|(k, &src)| *k == src).count())
    }
}

impl Serialize for MoveSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.moves.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MoveSequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let moves = Vec::<Move>::deserialize(deserializer)?;
        MoveSequence::new(moves).map_err(serde::de::Error::custom)
    }
}

/// Applies `seq` left to right. The result has the grid number of the input.
pub fn apply_sequence(config: &Configuration, seq: &MoveSequence) -> Result<Configuration, GridError> {
    let mut current = config.clone();
    for mv in seq.moves() {
        current = mv.apply(&current)?;
    }
    Ok(current)
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration(n={}; ", self.n())?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                f.write_str(" / ")?;
            }
            for &c in row {
                f.write_str(if c { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

#[derive(Serialize, Deserialize)]
struct ConfigurationRepr {
    n: usize,
    cells: Vec<Vec<u8>>,
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let cells = self.rows().into_iter().map(|row| row.into_iter().map(u8::from).collect()).collect();
        ConfigurationRepr { n: self.n(), cells }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ConfigurationRepr::deserialize(deserializer)?;
        Configuration::try_from(repr).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<ConfigurationRepr> for Configuration {
    type Error = GridError;

    fn try_from(repr: ConfigurationRepr) -> Result<Self, Self::Error> {
        if repr.cells.len() != repr.n {
            return Err(GridError::Shape(format!("declared n = {} but found {} rows", repr.n, repr.cells.len())));
        }
        let rows = repr
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| match v {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(GridError::Shape(format!("cell value {other} is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Configuration::from_rows(&rows)
    }
}
