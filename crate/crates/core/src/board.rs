//! Board geometry: dimensions, cells, leaper adjacency, the symmetry group of
//! the rectangle, magic constants and the two classical impossibility results
//! for magic knight's tours.
//!
//! Boards are always held in canonical orientation, `width <= height`. Rows
//! (`width` cells each) are the *short* lines and columns (`height` cells each)
//! are the *long* lines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const KNIGHT_OFFSETS: [(i64, i64); 8] = [
    (-1, -2),
    (1, -2),
    (-2, -1),
    (2, -1),
    (-2, 1),
    (2, 1),
    (-1, 2),
    (1, 2),
];

const WAZIR_OFFSETS: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Rectangle dimensions in canonical orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BoardDims {
    width: usize,
    height: usize,
    cells: usize,
}

impl BoardDims {
    /// Builds a board from two side lengths in either order; the result is
    /// transposed so that `width <= height`.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::invalid(format!(
                "board sides must be >= 1, got {a}x{b}"
            )));
        }
        let (width, height) = if a <= b { (a, b) } else { (b, a) };
        Ok(BoardDims {
            width,
            height,
            cells: width * height,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.col < self.width && c.row < self.height
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell {
            col: index % self.width,
            row: index / self.width,
        }
    }

    fn check(&self, c: Cell) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "cell {c} is outside the {self} board"
            )))
        }
    }

    /// Symmetry operations of this rectangle: four for oblong boards, eight for
    /// squares. The identity is always first.
    pub fn symmetry_group(&self) -> &'static [SymmetryOp] {
        if self.is_square() {
            &SymmetryOp::ALL
        } else {
            &SymmetryOp::ALL[..4]
        }
    }

    /// Precomputed cell permutation for every group element, in
    /// [`symmetry_group`](Self::symmetry_group) order.
    pub fn symmetry_maps(&self) -> Vec<Vec<usize>> {
        self.symmetry_group()
            .iter()
            .map(|&op| {
                (0..self.cells)
                    .map(|i| self.index(op.map(self.cell(i), *self)))
                    .collect()
            })
            .collect()
    }

    pub fn knight_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.cells)
            .map(|i| {
                leaper_targets(self.cell(i), *self, &KNIGHT_OFFSETS)
                    .into_iter()
                    .map(|c| self.index(c))
                    .collect()
            })
            .collect()
    }

    pub fn wazir_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.cells)
            .map(|i| {
                leaper_targets(self.cell(i), *self, &WAZIR_OFFSETS)
                    .into_iter()
                    .map(|c| self.index(c))
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for BoardDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for BoardDims {
    type Err = Error;

    /// Parses `"WxH"` (either case of `x`) and normalizes the orientation.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::invalid(format!("board must look like WxH, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad board side {t:?} in {s:?}")))
        };
        BoardDims::new(parse(a)?, parse(b)?)
    }
}

impl<'de> Deserialize<'de> for BoardDims {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            width: usize,
            height: usize,
        }
        let raw = Raw::deserialize(d)?;
        BoardDims::new(raw.width, raw.height).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Cell { col, row }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

fn leaper_targets(c: Cell, d: BoardDims, offsets: &[(i64, i64)]) -> Vec<Cell> {
    let mut out: Vec<Cell> = offsets
        .iter()
        .filter_map(|&(dc, dr)| {
            let col = c.col as i64 + dc;
            let row = c.row as i64 + dr;
            (col >= 0 && row >= 0 && (col as usize) < d.width && (row as usize) < d.height)
                .then(|| Cell::new(col as usize, row as usize))
        })
        .collect();
    out.sort_by_key(|t| d.index(*t));
    out
}

/// In-bounds knight targets of `c`, in row-major order.
pub fn knight_neighbors(c: Cell, d: BoardDims) -> Result<Vec<Cell>> {
    d.check(c)?;
    Ok(leaper_targets(c, d, &KNIGHT_OFFSETS))
}

/// In-bounds orthogonal single-step targets of `c`, in row-major order.
pub fn wazir_neighbors(c: Cell, d: BoardDims) -> Result<Vec<Cell>> {
    d.check(c)?;
    Ok(leaper_targets(c, d, &WAZIR_OFFSETS))
}

pub fn is_knight_move(a: Cell, b: Cell) -> bool {
    let dc = a.col.abs_diff(b.col);
    let dr = a.row.abs_diff(b.row);
    (dc == 1 && dr == 2) || (dc == 2 && dr == 1)
}

pub fn is_wazir_move(a: Cell, b: Cell) -> bool {
    a.col.abs_diff(b.col) + a.row.abs_diff(b.row) == 1
}

/// An element of the rectangle's symmetry group. The last four exist only on
/// square boards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryOp {
    Identity,
    Rotate180,
    /// Mirror left-right: column `c` goes to `width - 1 - c`.
    ReflectH,
    /// Mirror top-bottom: row `r` goes to `height - 1 - r`.
    ReflectV,
    /// Quarter turn clockwise.
    Rotate90,
    Rotate270,
    /// Transpose about the main diagonal.
    ReflectDiag,
    ReflectAnti,
}

impl SymmetryOp {
    pub const ALL: [SymmetryOp; 8] = [
        SymmetryOp::Identity,
        SymmetryOp::Rotate180,
        SymmetryOp::ReflectH,
        SymmetryOp::ReflectV,
        SymmetryOp::Rotate90,
        SymmetryOp::Rotate270,
        SymmetryOp::ReflectDiag,
        SymmetryOp::ReflectAnti,
    ];

    pub fn requires_square(self) -> bool {
        matches!(
            self,
            SymmetryOp::Rotate90
                | SymmetryOp::Rotate270
                | SymmetryOp::ReflectDiag
                | SymmetryOp::ReflectAnti
        )
    }

    pub fn inverse(self) -> SymmetryOp {
        match self {
            SymmetryOp::Rotate90 => SymmetryOp::Rotate270,
            SymmetryOp::Rotate270 => SymmetryOp::Rotate90,
            other => other,
        }
    }

    pub fn validate_for(self, d: BoardDims) -> Result<()> {
        if self.requires_square() && !d.is_square() {
            Err(Error::invalid(format!(
                "{self:?} needs a square board, got {d}"
            )))
        } else {
            Ok(())
        }
    }

    /// Unchecked mapping; the caller guarantees `self` is valid for `d`.
    pub(crate) fn map(self, c: Cell, d: BoardDims) -> Cell {
        let (w, h) = (d.width(), d.height());
        let (x, y) = (c.col, c.row);
        match self {
            SymmetryOp::Identity => c,
            SymmetryOp::Rotate180 => Cell::new(w - 1 - x, h - 1 - y),
            SymmetryOp::ReflectH => Cell::new(w - 1 - x, y),
            SymmetryOp::ReflectV => Cell::new(x, h - 1 - y),
            SymmetryOp::Rotate90 => Cell::new(h - 1 - y, x),
            SymmetryOp::Rotate270 => Cell::new(y, w - 1 - x),
            SymmetryOp::ReflectDiag => Cell::new(y, x),
            SymmetryOp::ReflectAnti => Cell::new(h - 1 - y, w - 1 - x),
        }
    }

    /// Image of `c` under this symmetry.
    pub fn apply(self, c: Cell, d: BoardDims) -> Result<Cell> {
        self.validate_for(d)?;
        d.check(c)?;
        Ok(self.map(c, d))
    }
}

/// Magic line constants of a board holding the numbers `1..=cells`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MagicConstants {
    pub total: u64,
    /// `total / height`, truncated; the common sum of a row when integral.
    pub short_mc: u64,
    /// `total / width`, truncated; the common sum of a column when integral.
    pub long_mc: u64,
    pub short_is_integral: bool,
    pub long_is_integral: bool,
}

impl MagicConstants {
    pub fn short(&self) -> Option<u64> {
        self.short_is_integral.then_some(self.short_mc)
    }

    pub fn long(&self) -> Option<u64> {
        self.long_is_integral.then_some(self.long_mc)
    }
}

pub fn magic_constants(d: BoardDims) -> MagicConstants {
    let n = d.cells() as u64;
    let total = n * (n + 1) / 2;
    let (h, w) = (d.height() as u64, d.width() as u64);
    MagicConstants {
        total,
        short_mc: total / h,
        long_mc: total / w,
        short_is_integral: total.is_multiple_of(h),
        long_is_integral: total.is_multiple_of(w),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityStatus {
    InfeasibleOddSide,
    InfeasibleSinglyEvenSides,
    NotExcluded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    pub reason: String,
}

/// Necessary conditions for a magic knight's tour. `NotExcluded` only means
/// neither impossibility argument applies; it says nothing about existence.
pub fn magic_feasibility(d: BoardDims) -> FeasibilityVerdict {
    let (w, h) = (d.width(), d.height());
    if w % 2 == 1 || h % 2 == 1 {
        let odd = if w % 2 == 1 { w } else { h };
        FeasibilityVerdict {
            status: FeasibilityStatus::InfeasibleOddSide,
            reason: format!(
                "side {odd} is odd: cells alternate colour along a knight path, so adjacent \
                 lines hold different counts of odd numbers and their sums differ in parity"
            ),
        }
    } else if w % 4 == 2 && h % 4 == 2 {
        FeasibilityVerdict {
            status: FeasibilityStatus::InfeasibleSinglyEvenSides,
            reason: format!("both sides of {d} are singly even (2 mod 4)"),
        }
    } else {
        FeasibilityVerdict {
            status: FeasibilityStatus::NotExcluded,
            reason: format!(
                "no impossibility argument applies to {d}; existence is a search question"
            ),
        }
    }
}
