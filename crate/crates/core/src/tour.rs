//! Numbered tours: validation, closure, reversal, symmetry images, canonical
//! forms, line sums and the plain-text tour format.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::board::{is_knight_move, BoardDims, SymmetryOp};
use crate::error::{Error, Result};

/// A numbering of every cell of a board with `1..=N`, stored row-major in
/// canonical orientation. `grid[i]` is the visit number of cell `i`.
///
/// Construction only checks the length; use [`Tour::validate`] for the knight
/// path invariants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    dims: BoardDims,
    grid: Vec<u32>,
}

/// Reason a numbering is not a knight's tour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TourViolation {
    /// A value outside `1..=N`, with the cell index holding it.
    OutOfRange {
        value: u32,
        index: usize,
    },
    Duplicate {
        value: u32,
    },
    /// The step from `k` to `k + 1` is not a knight move.
    NotKnightMove {
        step: u32,
    },
}

impl fmt::Display for TourViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TourViolation::OutOfRange { value, index } => {
                write!(f, "value {value} at index {index} is out of range")
            }
            TourViolation::Duplicate { value } => write!(f, "duplicate {value}"),
            TourViolation::NotKnightMove { step } => {
                write!(f, "step {step}->{} is not a knight move", step + 1)
            }
        }
    }
}

impl std::error::Error for TourViolation {}

/// Row and column sums in board order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct LineSumProfile {
    /// One entry per row (each row has `width` cells), top to bottom.
    pub short_sums: Vec<u64>,
    /// One entry per column (each column has `height` cells), left to right.
    pub long_sums: Vec<u64>,
}

impl LineSumProfile {
    /// Profile of the transposed board. Only meaningful for square boards.
    pub fn transposed(&self) -> LineSumProfile {
        LineSumProfile {
            short_sums: self.long_sums.clone(),
            long_sums: self.short_sums.clone(),
        }
    }
}

/// Lexicographically least row-major grid among the symmetry images of a tour.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Tour);

impl CanonicalForm {
    pub fn as_tour(&self) -> &Tour {
        &self.0
    }

    pub fn into_tour(self) -> Tour {
        self.0
    }
}

impl Tour {
    pub fn new(dims: BoardDims, grid: Vec<u32>) -> Result<Self> {
        if grid.len() != dims.cells() {
            return Err(Error::invalid(format!(
                "expected {} values for a {dims} board, got {}",
                dims.cells(),
                grid.len()
            )));
        }
        Ok(Tour { dims, grid })
    }

    /// Builds a tour from the visiting order: `path[k]` is the cell index
    /// numbered `k + 1`.
    pub fn from_path(dims: BoardDims, path: &[usize]) -> Result<Self> {
        if path.len() != dims.cells() {
            return Err(Error::invalid(format!(
                "path visits {} cells, board has {}",
                path.len(),
                dims.cells()
            )));
        }
        let mut grid = vec![0u32; dims.cells()];
        for (k, &cell) in path.iter().enumerate() {
            if cell >= dims.cells() || grid[cell] != 0 {
                return Err(Error::invalid(format!(
                    "path revisits or leaves the board at step {}",
                    k + 1
                )));
            }
            grid[cell] = k as u32 + 1;
        }
        Ok(Tour { dims, grid })
    }

    /// Builds a tour from rows as printed: `rows.len()` rows of equal length.
    /// The result is transposed into canonical orientation when needed.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != w) {
            return Err(Error::invalid("rows have different lengths"));
        }
        let dims = BoardDims::new(w, h)?;
        let grid = if w <= h {
            rows.iter().flatten().copied().collect()
        } else {
            // printed (c, r) becomes canonical (col = r, row = c)
            (0..w)
                .flat_map(|c| rows.iter().map(move |r| r[c]))
                .collect()
        };
        Tour::new(dims, grid)
    }

    pub(crate) fn from_parts_unchecked(dims: BoardDims, grid: Vec<u32>) -> Self {
        debug_assert_eq!(grid.len(), dims.cells());
        Tour { dims, grid }
    }

    pub fn dims(&self) -> BoardDims {
        self.dims
    }

    pub fn grid(&self) -> &[u32] {
        &self.grid
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.grid
            .chunks(self.dims.width())
            .map(<[u32]>::to_vec)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Checks that the grid is a permutation of `1..=N` and returns the
    /// visiting order (`path[k]` is the cell holding `k + 1`).
    pub fn path(&self) -> std::result::Result<Vec<usize>, TourViolation> {
        let n = self.grid.len();
        let mut path = vec![usize::MAX; n];
        for (index, &value) in self.grid.iter().enumerate() {
            if value == 0 || value as usize > n {
                return Err(TourViolation::OutOfRange { value, index });
            }
            let slot = &mut path[value as usize - 1];
            if *slot != usize::MAX {
                return Err(TourViolation::Duplicate { value });
            }
            *slot = index;
        }
        Ok(path)
    }

    /// Returns the first index `i` (1-based step number) whose step to `i + 1`
    /// fails `is_step`, if any.
    pub(crate) fn first_bad_step(
        path: &[usize],
        is_step: impl Fn(usize, usize) -> bool,
    ) -> Option<u32> {
        path.windows(2)
            .position(|w| !is_step(w[0], w[1]))
            .map(|i| i as u32 + 1)
    }

    /// Checks both tour invariants: permutation of `1..=N` and knight steps.
    pub fn validate(&self) -> std::result::Result<(), TourViolation> {
        let path = self.path()?;
        let d = self.dims;
        match Self::first_bad_step(&path, |a, b| is_knight_move(d.cell(a), d.cell(b))) {
            Some(step) => Err(TourViolation::NotKnightMove { step }),
            None => Ok(()),
        }
    }

    /// True when the cells numbered 1 and N are a knight's move apart.
    pub fn is_closed(&self) -> bool {
        let n = self.grid.len() as u32;
        let first = self.grid.iter().position(|&v| v == 1);
        let last = self.grid.iter().position(|&v| v == n);
        match (first, last) {
            (Some(a), Some(b)) if n > 1 => is_knight_move(self.dims.cell(a), self.dims.cell(b)),
            _ => false,
        }
    }

    /// Renumbers `k` as `N + 1 - k`.
    pub fn reversed(&self) -> Tour {
        let n1 = self.grid.len() as u32 + 1;
        Tour {
            dims: self.dims,
            grid: self.grid.iter().map(|&v| n1 - v).collect(),
        }
    }

    pub fn transformed(&self, op: SymmetryOp) -> Result<Tour> {
        op.validate_for(self.dims)?;
        let mut grid = vec![0; self.grid.len()];
        for (i, &v) in self.grid.iter().enumerate() {
            grid[self.dims.index(op.map(self.dims.cell(i), self.dims))] = v;
        }
        Ok(Tour {
            dims: self.dims,
            grid,
        })
    }

    fn images(&self) -> impl Iterator<Item = Tour> + '_ {
        self.dims.symmetry_group().iter().map(move |&op| {
            self.transformed(op)
                .expect("group elements are valid for their board")
        })
    }

    /// Frenicle-style canonical form: the least symmetry image. Reversal is not
    /// applied, so a tour and its reverse are distinct unless a symmetry maps
    /// one onto the other.
    pub fn frenicle_canonical(&self) -> CanonicalForm {
        CanonicalForm(self.images().min().expect("group is never empty"))
    }

    /// Canonical representative of the geometric class: the least grid over
    /// symmetry images of the tour and of its reverse. For closed tours every
    /// starting cell and both directions around the circuit are also included.
    pub fn geometric_class(&self) -> CanonicalForm {
        let n = self.grid.len();
        let mut numberings = vec![self.clone(), self.reversed()];
        if self.is_closed() {
            if let Ok(path) = self.path() {
                for shift in 1..n {
                    for dir in [1isize, -1] {
                        let mut grid = vec![0u32; n];
                        for i in 0..n {
                            let at =
                                (shift as isize + dir * i as isize).rem_euclid(n as isize) as usize;
                            grid[path[at]] = i as u32 + 1;
                        }
                        numberings.push(Tour {
                            dims: self.dims,
                            grid,
                        });
                    }
                }
            }
        }
        let best = numberings
            .iter()
            .flat_map(|t| t.images().collect::<Vec<_>>())
            .min()
            .expect("at least one numbering");
        CanonicalForm(best)
    }

    pub fn line_sums(&self) -> LineSumProfile {
        let (w, h) = (self.dims.width(), self.dims.height());
        let mut short_sums = vec![0u64; h];
        let mut long_sums = vec![0u64; w];
        for (i, &v) in self.grid.iter().enumerate() {
            short_sums[i / w] += v as u64;
            long_sums[i % w] += v as u64;
        }
        LineSumProfile {
            short_sums,
            long_sums,
        }
    }

    /// Writes the tour text format in canonical orientation.
    pub fn to_text(&self) -> String {
        let mut out = format!("board {}\n", self.dims);
        for row in self.grid.chunks(self.dims.width()) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the tour text format. See [`parse_document`].
    pub fn parse(text: &str) -> Result<Tour> {
        Ok(parse_document(text)?.tour)
    }

    /// ASCII rendering with right-aligned numbers and the line sums in the
    /// margins.
    pub fn render(&self) -> String {
        let width = self.grid.len().to_string().len();
        let sums = self.line_sums();
        let sum_width = sums
            .short_sums
            .iter()
            .chain(&sums.long_sums)
            .map(|s| s.to_string().len())
            .max()
            .unwrap_or(1)
            .max(width);
        let mut out = String::new();
        for (r, row) in self.grid.chunks(self.dims.width()).enumerate() {
            for v in row {
                out.push_str(&format!("{v:>sum_width$} "));
            }
            out.push_str(&format!("| {}\n", sums.short_sums[r]));
        }
        out.push_str(&"-".repeat((sum_width + 1) * self.dims.width()));
        out.push('\n');
        for s in &sums.long_sums {
            out.push_str(&format!("{s:>sum_width$} "));
        }
        out.push('\n');
        out
    }
}

impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Serialize for Tour {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            board: String,
            rows: Vec<Vec<u32>>,
        }
        Repr {
            board: self.dims.to_string(),
            rows: self.rows(),
        }
        .serialize(s)
    }
}

/// A parsed tour document: the tour plus any `key value` header lines other
/// than `board`, with their 1-based line numbers.
#[derive(Clone, Debug)]
pub struct TourDocument {
    pub tour: Tour,
    pub headers: Vec<(usize, String, String)>,
}

/// Parses a tour document:
///
/// ```text
/// # comment
/// board 18x4
/// 1 70 33 ...
/// ```
///
/// `board WxH` gives the grid as written (W numbers on each of H lines); the
/// grid is transposed into canonical orientation when W > H. Other header
/// lines of the form `key value...` are collected for the caller. Values must
/// form a permutation of `1..=W*H`.
pub fn parse_document(text: &str) -> Result<TourDocument> {
    let mut headers = Vec::new();
    let mut printed: Option<(usize, usize, usize)> = None; // (w, h, line)
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut first_row_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with(|c: char| c.is_ascii_alphabetic()) {
            if !rows.is_empty() {
                return Err(Error::parse(lineno, 1, "header line after the grid"));
            }
            let (key, rest) = trimmed
                .split_once(char::is_whitespace)
                .unwrap_or((trimmed, ""));
            if key == "board" {
                let (a, b) = rest
                    .trim()
                    .split_once(['x', 'X'])
                    .ok_or_else(|| Error::parse(lineno, 7, "board must look like WxH"))?;
                let w = a
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(lineno, 7, "bad board width"))?;
                let h = b
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(lineno, 7, "bad board height"))?;
                if w == 0 || h == 0 {
                    return Err(Error::parse(lineno, 7, "board sides must be >= 1"));
                }
                printed = Some((w, h, lineno));
            } else {
                headers.push((lineno, key.to_string(), rest.trim().to_string()));
            }
            continue;
        }
        let Some((w, _, _)) = printed else {
            return Err(Error::parse(
                lineno,
                1,
                "grid before the `board WxH` header",
            ));
        };
        if rows.is_empty() {
            first_row_line = lineno;
        }
        let mut row = Vec::with_capacity(w);
        let mut column = 1;
        for token in line.split([' ', '\t']) {
            if token.is_empty() {
                column += 1;
                continue;
            }
            let value = token
                .parse::<u32>()
                .map_err(|_| Error::parse(lineno, column, format!("not a number: {token:?}")))?;
            row.push((value, column));
            column += token.len() + 1;
        }
        if row.len() != w {
            return Err(Error::parse(
                lineno,
                1,
                format!("expected {w} values on this row, found {}", row.len()),
            ));
        }
        rows.push(row.into_iter().map(|(v, _)| v).collect());
    }

    let Some((w, h, board_line)) = printed else {
        return Err(Error::parse(1, 1, "missing `board WxH` header"));
    };
    let n = w * h;
    let found: usize = rows.iter().map(Vec::len).sum();
    if rows.len() != h {
        return Err(Error::parse(
            board_line,
            1,
            format!(
                "expected {n} values ({h} rows of {w}), found {found} in {} rows",
                rows.len()
            ),
        ));
    }
    let mut seen = vec![false; n + 1];
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let at = first_row_line + r;
            if v == 0 || v as usize > n {
                return Err(Error::parse(
                    at,
                    c + 1,
                    format!("values must be 1..{n}, found {v}"),
                ));
            }
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::parse(at, c + 1, format!("duplicate value {v}")));
            }
        }
    }
    let tour = Tour::from_rows(&rows)?;
    Ok(TourDocument { tour, headers })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 3x4 open tour, one of the sixteen directed tours on that board.
    fn small() -> Tour {
        Tour::parse("board 3x4\n1 12 3\n4 9 6\n7 2 11\n10 5 8\n").unwrap()
    }

    #[test]
    fn validate_small_tour() {
        let t = small();
        assert_eq!(t.validate(), Ok(()));
        assert!(!t.is_closed());
    }

    #[test]
    fn duplicate_value_is_reported() {
        let d = BoardDims::new(3, 4).unwrap();
        let t = Tour::new(d, vec![1, 4, 7, 12, 9, 2, 5, 8, 11, 10, 5, 6]).unwrap();
        assert_eq!(t.validate(), Err(TourViolation::Duplicate { value: 5 }));
        assert_eq!(t.validate().unwrap_err().to_string(), "duplicate 5");
    }

    #[test]
    fn broken_step_is_reported() {
        // swapping 4 and 5 breaks steps 3->4, 4->5 and 5->6
        let mut grid = small().grid().to_vec();
        let a = grid.iter().position(|&v| v == 4).unwrap();
        let b = grid.iter().position(|&v| v == 5).unwrap();
        grid.swap(a, b);
        let t = Tour::new(small().dims(), grid).unwrap();
        assert_eq!(t.validate(), Err(TourViolation::NotKnightMove { step: 3 }));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let d = BoardDims::new(3, 4).unwrap();
        assert!(Tour::new(d, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn reversal_is_an_involution() {
        let t = small();
        let r = t.reversed();
        assert_eq!(r.reversed(), t);
        assert_eq!(r.validate(), Ok(()));
        let n = t.len() as u32;
        let one_after = r.grid().iter().position(|&v| v == 1).unwrap();
        let n_before = t.grid().iter().position(|&v| v == n).unwrap();
        assert_eq!(one_after, n_before);
        assert_eq!(r.is_closed(), t.is_closed());
    }

    #[test]
    fn transform_examples() {
        let t = small();
        assert_eq!(t.transformed(SymmetryOp::Identity).unwrap(), t);
        let r = t.transformed(SymmetryOp::Rotate180).unwrap();
        assert_eq!(r.transformed(SymmetryOp::Rotate180).unwrap(), t);
        let h = t.transformed(SymmetryOp::ReflectH).unwrap();
        let (a, b) = (t.line_sums(), h.line_sums());
        assert_eq!(a.short_sums, b.short_sums);
        let mut rev = a.long_sums.clone();
        rev.reverse();
        assert_eq!(rev, b.long_sums);
        assert!(t.transformed(SymmetryOp::ReflectDiag).is_err());
    }

    #[test]
    fn canonical_form_is_orbit_invariant_and_idempotent() {
        let t = small();
        let c = t.frenicle_canonical();
        for &op in t.dims().symmetry_group() {
            assert_eq!(t.transformed(op).unwrap().frenicle_canonical(), c);
        }
        assert_eq!(c.as_tour().frenicle_canonical(), c);
        assert_eq!(t.geometric_class(), t.reversed().geometric_class());
    }

    #[test]
    fn text_round_trip_and_orientation() {
        let text = "# a comment\nboard 4x3\n1 4 7 10\n12 9 2 5\n3 6 11 8\n";
        let t = Tour::parse(text).unwrap();
        assert_eq!(t.dims().to_string(), "3x4");
        assert_eq!(t, small());
        assert_eq!(Tour::parse(&t.to_text()).unwrap(), t);
        assert!(t.to_text().ends_with('\n'));
    }

    #[test]
    fn parse_errors() {
        let short = format!("board 4x18\n{}", "1 2 3 4\n".repeat(17));
        let err = Tour::parse(&short).unwrap_err().to_string();
        assert!(err.contains("expected 72 values"), "{err}");
        let zero = "board 2x2\n0 1\n2 3\n";
        assert!(Tour::parse(zero)
            .unwrap_err()
            .to_string()
            .contains("values must be 1..4"));
        let dup = "board 2x2\n1 1\n2 3\n";
        assert!(Tour::parse(dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        let ragged = "board 3x2\n1 2 3\n4 5\n";
        assert!(matches!(
            Tour::parse(ragged),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(Tour::parse("1 2\n3 4\n").is_err());
        assert!(Tour::parse("board 2x2\n1 x\n2 3\n").is_err());
    }

    #[test]
    fn render_shows_margins() {
        let s = small().render();
        assert!(s.contains("| 16"));
        assert_eq!(s.lines().count(), 6);
    }
}
