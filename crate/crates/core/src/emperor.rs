//! Two-knight "emperor" tours: two knight paths joined by a single
//! orthogonal step (a wazir move), so the numbering is a tour of the
//! knight + wazir compound piece with exactly one wazir step.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::board::{is_knight_move, is_wazir_move, BoardDims};
use crate::classify::classify_profile;
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::search::Geometry;
use crate::tour::{Tour, TourViolation};

/// Largest board [`enumerate_emperor`] accepts.
pub const MAX_EMPEROR_CELLS: usize = 48;

/// Where the wazir step may sit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Junction {
    /// Between the two halves of the numbering, so that each knight covers
    /// half the board (`N/2 -> N/2 + 1`; either middle step when N is odd).
    #[default]
    Middle,
    /// Any single step.
    Anywhere,
}

impl Junction {
    pub fn allows(self, step: usize, n: usize) -> bool {
        match self {
            Junction::Middle => step == n / 2 || step == n.div_ceil(2),
            Junction::Anywhere => true,
        }
    }
}

impl std::str::FromStr for Junction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "middle" => Ok(Junction::Middle),
            "anywhere" => Ok(Junction::Anywhere),
            _ => Err(Error::invalid(format!(
                "junction must be middle or anywhere, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmperorViolation {
    Numbering(TourViolation),
    /// Step `step -> step + 1` is neither a knight nor a wazir move.
    NotAStep {
        step: u32,
    },
    NoWazirStep,
    WazirSteps {
        count: usize,
    },
}

impl fmt::Display for EmperorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmperorViolation::Numbering(v) => v.fmt(f),
            EmperorViolation::NotAStep { step } => {
                write!(
                    f,
                    "step {}->{} is neither a knight nor a wazir move",
                    step,
                    step + 1
                )
            }
            EmperorViolation::NoWazirStep => f.write_str("zero wazir steps"),
            EmperorViolation::WazirSteps { count } => write!(f, "{count} wazir steps"),
        }
    }
}

impl std::error::Error for EmperorViolation {}

/// A numbering whose steps are knight moves except for one wazir step from
/// `junction` to `junction + 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EmperorTour {
    pub tour: Tour,
    pub junction: u32,
}

impl EmperorTour {
    pub fn new(tour: Tour) -> std::result::Result<Self, EmperorViolation> {
        let junction = validate_emperor(&tour)?;
        Ok(EmperorTour { tour, junction })
    }

    /// The two knight paths as `(first, last)` number ranges.
    pub fn segments(&self) -> ((u32, u32), (u32, u32)) {
        (
            (1, self.junction),
            (self.junction + 1, self.tour.len() as u32),
        )
    }
}

/// Checks the emperor invariants and returns the junction.
pub fn validate_emperor(t: &Tour) -> std::result::Result<u32, EmperorViolation> {
    let path = t.path().map_err(EmperorViolation::Numbering)?;
    let d = t.dims();
    let mut wazir = Vec::new();
    for (i, w) in path.windows(2).enumerate() {
        let (a, b) = (d.cell(w[0]), d.cell(w[1]));
        if is_wazir_move(a, b) {
            wazir.push(i as u32 + 1);
        } else if !is_knight_move(a, b) {
            return Err(EmperorViolation::NotAStep { step: i as u32 + 1 });
        }
    }
    match wazir.as_slice() {
        [] => Err(EmperorViolation::NoWazirStep),
        [k] => Ok(*k),
        more => Err(EmperorViolation::WazirSteps { count: more.len() }),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmperorResult {
    /// Arithmetically distinct tours (up to board symmetry, reversal counted
    /// separately), as for knight tours.
    pub count: u64,
    /// Classes when a tour and its reverse are also identified. The two
    /// knights of a two-knight tour carry no order, so this is the count that
    /// treats them symmetrically.
    pub unordered_count: u64,
    /// Directed numberings behind the count.
    pub raw: u64,
    /// Canonical representatives, sorted.
    pub tours: Vec<EmperorTour>,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

struct Search<'a> {
    geo: &'a Geometry,
    wazir: Vec<Vec<usize>>,
    junction: Junction,
    filter: &'a Filter,
    grid: Vec<u16>,
    path: Vec<usize>,
    wazir_used: bool,
    nodes: u64,
    raw: u64,
    weight: u64,
    found: BTreeSet<Tour>,
}

impl Search<'_> {
    /// Some unvisited cell can no longer be entered.
    fn stranded(&self) -> bool {
        let head = *self.path.last().expect("non-empty path");
        let free = |c: usize| self.grid[c] == 0;
        (0..self.geo.n).filter(|&c| free(c)).any(|c| {
            let knight_in = self.geo.adj[c]
                .iter()
                .any(|&u| free(u as usize) || u as usize == head);
            let wazir_in = !self.wazir_used && self.wazir[c].iter().any(|&u| free(u) || u == head);
            !knight_in && !wazir_in
        })
    }

    fn leaf(&mut self) {
        if !self.wazir_used {
            return;
        }
        let grid: Vec<u32> = self.grid.iter().map(|&v| v as u32).collect();
        let tour = Tour::from_parts_unchecked(self.geo.dims, grid);
        if *self.filter != Filter::Any {
            let report = classify_profile(self.geo.dims, tour.line_sums());
            if !self.filter.matches(&report, self.geo.dims) {
                return;
            }
        }
        self.raw += self.weight;
        self.found.insert(tour.frenicle_canonical().into_tour());
    }

    fn step(&mut self, next: usize, wazir: bool) {
        self.nodes += 1;
        self.grid[next] = self.path.len() as u16 + 1;
        self.path.push(next);
        self.wazir_used |= wazir;
        if !self.stranded() {
            self.dfs();
        }
        self.wazir_used &= !wazir;
        self.path.pop();
        self.grid[next] = 0;
    }

    fn dfs(&mut self) {
        if self.path.len() == self.geo.n {
            self.leaf();
            return;
        }
        let head = *self.path.last().expect("non-empty path");
        for i in 0..self.geo.adj[head].len() {
            let next = self.geo.adj[head][i] as usize;
            if self.grid[next] == 0 {
                self.step(next, false);
            }
        }
        if !self.wazir_used && self.junction.allows(self.path.len(), self.geo.n) {
            for i in 0..self.wazir[head].len() {
                let next = self.wazir[head][i];
                if self.grid[next] == 0 {
                    self.step(next, true);
                }
            }
        }
    }
}

/// Enumerates two-knight emperor tours (junction in the middle) accepted by
/// `filter` and counts them up to board symmetry.
pub fn enumerate_emperor(dims: BoardDims, filter: &Filter) -> Result<EmperorResult> {
    enumerate_emperor_with(dims, filter, Junction::Middle)
}

/// As [`enumerate_emperor`], with a choice of where the wazir step may sit.
/// Refuses boards with more than [`MAX_EMPEROR_CELLS`] cells.
pub fn enumerate_emperor_with(
    dims: BoardDims,
    filter: &Filter,
    junction: Junction,
) -> Result<EmperorResult> {
    if dims.cells() > MAX_EMPEROR_CELLS {
        return Err(Error::Refused(format!(
            "emperor search is limited to {MAX_EMPEROR_CELLS} cells; {dims} has {}",
            dims.cells()
        )));
    }
    if dims.cells() < 2 {
        return Err(Error::invalid("an emperor tour needs at least two cells"));
    }
    let started = Instant::now();
    let geo = Geometry::new(dims);
    let mut search = Search {
        geo: &geo,
        wazir: dims.wazir_adjacency(),
        junction,
        filter,
        grid: vec![0; geo.n],
        path: Vec::with_capacity(geo.n),
        wazir_used: false,
        nodes: 0,
        raw: 0,
        weight: 0,
        found: BTreeSet::new(),
    };
    for (start, weight) in geo.start_orbits() {
        search.weight = weight;
        search.grid[start] = 1;
        search.path.push(start);
        search.dfs();
        search.path.pop();
        search.grid[start] = 0;
    }
    let order = geo.sym.len() as u64;
    let count = search.found.len() as u64;
    // every class holds |G| numberings, so the weighted tally must agree
    debug_assert_eq!(search.raw, count * order);
    let unordered_count = search
        .found
        .iter()
        .filter(|t| **t <= t.reversed().frenicle_canonical().into_tour())
        .count() as u64;
    let tours = std::mem::take(&mut search.found)
        .into_iter()
        .map(|tour| {
            let junction = validate_emperor(&tour).expect("search only builds emperor tours");
            EmperorTour { tour, junction }
        })
        .collect();
    Ok(EmperorResult {
        count,
        unordered_count,
        raw: search.raw,
        tours,
        nodes: search.nodes,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;

    fn d(s: &str) -> BoardDims {
        s.parse().unwrap()
    }

    #[test]
    fn violations() {
        let knight = Tour::parse("board 3x4\n1 12 3\n4 9 6\n7 2 11\n10 5 8\n").unwrap();
        assert_eq!(
            validate_emperor(&knight),
            Err(EmperorViolation::NoWazirStep)
        );
        assert_eq!(
            EmperorViolation::NoWazirStep.to_string(),
            "zero wazir steps"
        );

        // boustrophedon on 2x3 uses wazir steps only
        let snake = Tour::parse("board 2x3\n1 2\n4 3\n5 6\n").unwrap();
        assert_eq!(
            validate_emperor(&snake),
            Err(EmperorViolation::WazirSteps { count: 5 })
        );
        assert_eq!(
            EmperorViolation::WazirSteps { count: 2 }.to_string(),
            "2 wazir steps"
        );

        let jump = Tour::parse("board 1x3\n1\n3\n2\n").unwrap();
        assert_eq!(
            validate_emperor(&jump),
            Err(EmperorViolation::NotAStep { step: 1 })
        );
    }

    #[test]
    fn every_enumerated_tour_validates() {
        let r = enumerate_emperor_with(d("3x4"), &Filter::Any, Junction::Anywhere).unwrap();
        let middle = enumerate_emperor(d("3x4"), &Filter::Any).unwrap();
        assert!(middle.count > 0 && middle.count < r.count);
        assert_eq!(r.raw, r.count * 4);
        assert!(middle.tours.iter().all(|t| t.junction == 6));
        for t in &r.tours {
            assert_eq!(validate_emperor(&t.tour), Ok(t.junction));
            let rev = EmperorTour::new(t.tour.reversed()).unwrap();
            assert_eq!(rev.junction, 12 - t.junction);
            assert_eq!(classify(&rev.tour).class, classify(&t.tour).class);
        }
    }

    #[test]
    fn guard() {
        assert!(matches!(
            enumerate_emperor(d("7x7"), &Filter::Any),
            Err(Error::Refused(_))
        ));
    }
}
