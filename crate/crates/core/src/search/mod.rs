//! Exhaustive tour enumeration with symmetry-aware counting.
//!
//! The symmetry group of the board acts freely on numbered tours (a
//! non-identity symmetry moves some cell, and the cells carry distinct
//! numbers), so every arithmetic class holds exactly `|G|` directed tours.
//! The search therefore only starts from one representative cell per orbit
//! and weights each tour by the orbit size:
//!
//! ```text
//! raw        = sum over start reps c of |orbit(c)| * tours(c)
//! arithmetic = raw / |G|
//! geometric  = sum of |orbit(c)| * |Stab_H(t)| / |H|
//! ```
//!
//! where `H` is the symmetry group extended by numbering reversal for open
//! tours, and by all cyclic renumberings in both directions for closed tours.

mod engine;
mod estimate;
mod split;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub(crate) use engine::{dfs, push_prefix, Counters, Geometry, Prune, State, Visitor};
pub use estimate::estimate_nodes;
pub use split::{split_frontier, split_to_depth, WorkUnit};

use crate::board::{BoardDims, SymmetryOp};
use crate::classify::classify_profile;
use crate::error::{Error, Result};
use crate::filter::{simplify, Filter, LineRequirement};
use crate::tour::{LineSumProfile, Tour};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    Open,
    Closed,
    #[default]
    Any,
}

impl Closure {
    fn admits(self, closed: bool) -> bool {
        match self {
            Closure::Open => !closed,
            Closure::Closed => closed,
            Closure::Any => true,
        }
    }
}

impl std::str::FromStr for Closure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Closure::Open),
            "closed" => Ok(Closure::Closed),
            "any" => Ok(Closure::Any),
            _ => Err(Error::invalid(format!(
                "closure must be open, closed or any, got {s:?}"
            ))),
        }
    }
}

/// How tours are identified when counting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Every directed, numbered tour.
    Raw,
    /// Numbered tours up to board symmetry.
    #[default]
    Arithmetic,
    /// Additionally up to reversal (and, for closed tours, choice of start).
    Geometric,
}

impl std::str::FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(CountMode::Raw),
            "arithmetic" => Ok(CountMode::Arithmetic),
            "geometric" => Ok(CountMode::Geometric),
            _ => Err(Error::invalid(format!(
                "mode must be raw, arithmetic or geometric, got {s:?}"
            ))),
        }
    }
}

/// What to search for.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchSpec {
    pub dims: BoardDims,
    pub closure: Closure,
    pub filter: Filter,
    pub mode: CountMode,
    /// Stop after emitting this many tours (enumeration only).
    pub limit: Option<u64>,
    /// Worker threads; 0 means the available parallelism.
    pub threads: usize,
    /// Split the search into prefixes of this length instead of splitting by
    /// unit count.
    pub seed_depth: Option<usize>,
    /// Abort with [`Error::ResourceLimit`] after this many search nodes.
    pub node_limit: Option<u64>,
    /// Use line-sum bounds implied by the filter. Turning this off gives the
    /// reference search the bounds are checked against.
    pub line_pruning: bool,
}

impl SearchSpec {
    pub fn new(dims: BoardDims) -> Self {
        SearchSpec {
            dims,
            closure: Closure::Any,
            filter: Filter::Any,
            mode: CountMode::Arithmetic,
            limit: None,
            threads: 1,
            seed_depth: None,
            node_limit: None,
            line_pruning: true,
        }
    }

    pub fn closure(mut self, c: Closure) -> Self {
        self.closure = c;
        self
    }

    pub fn filter(mut self, f: Filter) -> Self {
        self.filter = f;
        self
    }

    pub fn mode(mut self, m: CountMode) -> Self {
        self.mode = m;
        self
    }

    pub fn threads(mut self, t: usize) -> Self {
        self.threads = t;
        self
    }

    pub fn limit(mut self, l: u64) -> Self {
        self.limit = Some(l);
        self
    }

    pub fn node_limit(mut self, l: u64) -> Self {
        self.node_limit = Some(l);
        self
    }

    pub fn seed_depth(mut self, d: usize) -> Self {
        self.seed_depth = Some(d);
        self
    }

    pub fn line_pruning(mut self, on: bool) -> Self {
        self.line_pruning = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dims.cells() < 2 {
            return Err(Error::invalid("a search needs at least two cells"));
        }
        if self.dims.cells() > u16::MAX as usize {
            return Err(Error::invalid("board too large"));
        }
        Ok(())
    }

    pub(crate) fn worker_count(&self) -> usize {
        if self.threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.threads
        }
    }

    /// Combined pruning requirements for a set of filters counted in one pass.
    pub(crate) fn requirements(&self, filters: &[Filter]) -> Vec<LineRequirement> {
        let all: Vec<LineRequirement> = filters
            .iter()
            .flat_map(|f| f.requirements(self.dims))
            .collect();
        if !self.line_pruning && !all.is_empty() {
            return vec![LineRequirement::default()];
        }
        simplify(all)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned_connectivity: u64,
    pub pruned_line_sums: u64,
    pub pruned_closure: u64,
    pub elapsed_ms: u64,
    pub workers: usize,
    pub units: usize,
}

impl SearchStats {
    pub fn pruned(&self) -> u64 {
        self.pruned_connectivity + self.pruned_line_sums + self.pruned_closure
    }

    fn absorb(&mut self, c: &Counters) {
        self.nodes += c.nodes;
        self.pruned_connectivity += c.pruned_connectivity;
        self.pruned_line_sums += c.pruned_line_sums;
        self.pruned_closure += c.pruned_closure;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Number of classes in the requested mode.
    pub count: u64,
    pub open: u64,
    pub closed: u64,
    /// Directed numbered tours behind the count.
    pub raw: u64,
    /// Closed tours as undirected circuits with no start and no symmetry
    /// reduction (`raw closed / 2N`).
    pub diagrams: u64,
    /// True when an emission limit stopped the search early.
    pub truncated: bool,
    pub stats: SearchStats,
}

/// Weighted sums gathered for one filter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Tally {
    open: u64,
    closed: u64,
    open_stab: u64,
    closed_stab: u64,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.open += o.open;
        self.closed += o.closed;
        self.open_stab += o.open_stab;
        self.closed_stab += o.closed_stab;
    }
}

/// Shared, read-only search context.
struct Context<'a> {
    spec: &'a SearchSpec,
    geo: Geometry,
    filters: &'a [Filter],
    needs_report: bool,
    reqs: Vec<LineRequirement>,
    sink: Option<&'a (dyn Fn(Tour) + Sync)>,
    emitted: AtomicU64,
    nodes: AtomicU64,
    stop: AtomicBool,
    aborted: AtomicBool,
}

struct UnitVisitor<'c, 'a> {
    ctx: &'c Context<'a>,
    weight: u64,
    start_stab: Vec<usize>,
    tallies: Vec<Tally>,
    reported_nodes: u64,
}

impl UnitVisitor<'_, '_> {
    fn open_stabilizer(&self, path: &[u16]) -> u64 {
        let n = path.len();
        let reversals = self
            .ctx
            .geo
            .sym
            .iter()
            .filter(|m| (0..n).all(|i| m[path[i] as usize] == path[n - 1 - i]))
            .count();
        1 + reversals as u64
    }

    fn closed_stabilizer(&self, state: &State<'_>) -> u64 {
        let path = &state.path;
        let n = path.len();
        let mut count = 0;
        for m in &self.ctx.geo.sym {
            let j = state.grid[m[path[0] as usize] as usize] as usize - 1;
            if (0..n).all(|i| m[path[i] as usize] == path[(j + i) % n]) {
                count += 1;
            }
            if (0..n).all(|i| m[path[i] as usize] == path[(j + n - i) % n]) {
                count += 1;
            }
        }
        count
    }

    fn emit(&self, state: &State<'_>) -> bool {
        let Some(sink) = self.ctx.sink else {
            return true;
        };
        // one representative per class: least among the images that keep the start
        let is_least = self.start_stab.iter().all(|&g| {
            let inv = &self.ctx.geo.sym_inv[g];
            for (&mine, &src) in state.grid.iter().zip(inv) {
                let theirs = state.grid[src as usize];
                if mine != theirs {
                    return mine < theirs;
                }
            }
            true
        });
        if !is_least {
            return true;
        }
        let limit = self.ctx.spec.limit.unwrap_or(u64::MAX);
        let before = self.ctx.emitted.fetch_add(1, Ordering::SeqCst);
        if before >= limit {
            self.ctx.stop.store(true, Ordering::SeqCst);
            return false;
        }
        let grid = state.grid.iter().map(|&v| v as u32).collect();
        let tour = Tour::from_parts_unchecked(self.ctx.geo.dims, grid);
        sink(tour.frenicle_canonical().into_tour());
        if before + 1 >= limit {
            self.ctx.stop.store(true, Ordering::SeqCst);
            return false;
        }
        true
    }
}

impl Visitor for UnitVisitor<'_, '_> {
    fn leaf(&mut self, state: &State<'_>) -> bool {
        let closed = state.is_closed();
        if !self.ctx.spec.closure.admits(closed) {
            return true;
        }
        let report = self.ctx.needs_report.then(|| {
            let (short_sums, long_sums) = state.line_sums();
            classify_profile(
                self.ctx.geo.dims,
                LineSumProfile {
                    short_sums,
                    long_sums,
                },
            )
        });
        let geometric = self.ctx.spec.mode == CountMode::Geometric;
        for (i, f) in self.ctx.filters.iter().enumerate() {
            let hit = match &report {
                Some(r) => f.matches(r, self.ctx.geo.dims),
                None => true,
            };
            if !hit {
                continue;
            }
            let t = &mut self.tallies[i];
            if closed {
                t.closed += self.weight;
            } else {
                t.open += self.weight;
            }
            if geometric {
                if closed {
                    let s = self.closed_stabilizer(state);
                    self.tallies[i].closed_stab += self.weight * s;
                } else {
                    let s = self.open_stabilizer(&state.path);
                    self.tallies[i].open_stab += self.weight * s;
                }
            }
            if i == 0 && !self.emit(state) {
                return false;
            }
        }
        true
    }

    fn checkpoint(&mut self, counters: &Counters) -> bool {
        let delta = counters.nodes - self.reported_nodes;
        self.reported_nodes = counters.nodes;
        let total = self.ctx.nodes.fetch_add(delta, Ordering::Relaxed) + delta;
        if let Some(limit) = self.ctx.spec.node_limit {
            if total > limit {
                self.ctx.aborted.store(true, Ordering::SeqCst);
                self.ctx.stop.store(true, Ordering::SeqCst);
            }
        }
        !self.ctx.stop.load(Ordering::Relaxed)
    }
}

fn run_unit(ctx: &Context<'_>, unit: &WorkUnit) -> (Vec<Tally>, Counters) {
    let geo = &ctx.geo;
    let mut counters = Counters::default();
    let mut tallies = vec![Tally::default(); ctx.filters.len()];
    let starts: Vec<(Vec<u16>, u64)> = if unit.prefix.is_empty() {
        geo.start_orbits()
            .into_iter()
            .map(|(c, w)| (vec![c as u16], w))
            .collect()
    } else {
        vec![(unit.prefix.clone(), unit.weight)]
    };
    for (prefix, weight) in starts {
        if ctx.stop.load(Ordering::Relaxed) {
            break;
        }
        let start = prefix[0] as usize;
        let start_stab = (0..geo.sym.len())
            .filter(|&g| geo.sym[g][start] as usize == start)
            .collect();
        let mut visitor = UnitVisitor {
            ctx,
            weight,
            start_stab,
            tallies: vec![Tally::default(); ctx.filters.len()],
            reported_nodes: counters.nodes,
        };
        let mut state = State::new(geo, &ctx.reqs, ctx.spec.closure == Closure::Closed);
        if push_prefix(&mut state, &prefix) == Prune::Ok {
            if state.depth() == geo.n {
                visitor.leaf(&state);
            } else {
                dfs(&mut state, &mut visitor, &mut counters);
            }
        }
        ctx.nodes
            .fetch_add(counters.nodes - visitor.reported_nodes, Ordering::Relaxed);
        for (t, v) in tallies.iter_mut().zip(&visitor.tallies) {
            t.add(v);
        }
    }
    (tallies, counters)
}

fn finish(ctx: &Context<'_>, tally: &Tally, stats: SearchStats) -> SearchResult {
    let g = ctx.geo.sym.len() as u64;
    let n = ctx.geo.n as u64;
    let (open, closed) = match ctx.spec.mode {
        CountMode::Raw => (tally.open, tally.closed),
        CountMode::Arithmetic => {
            debug_assert!(tally.open.is_multiple_of(g) && tally.closed.is_multiple_of(g));
            (tally.open / g, tally.closed / g)
        }
        CountMode::Geometric => {
            debug_assert!(
                tally.open_stab.is_multiple_of(2 * g)
                    && tally.closed_stab.is_multiple_of(2 * n * g)
            );
            (tally.open_stab / (2 * g), tally.closed_stab / (2 * n * g))
        }
    };
    SearchResult {
        count: open + closed,
        open,
        closed,
        raw: tally.open + tally.closed,
        diagrams: tally.closed / (2 * n),
        truncated: ctx.stop.load(Ordering::SeqCst) && !ctx.aborted.load(Ordering::SeqCst),
        stats,
    }
}

fn execute(
    spec: &SearchSpec,
    filters: &[Filter],
    sink: Option<&(dyn Fn(Tour) + Sync)>,
) -> Result<Vec<SearchResult>> {
    spec.validate()?;
    let started = Instant::now();
    let reqs = spec.requirements(filters);
    let ctx = Context {
        spec,
        geo: Geometry::new(spec.dims),
        filters,
        needs_report: filters.iter().any(|f| *f != Filter::Any),
        reqs: reqs.clone(),
        sink,
        emitted: AtomicU64::new(0),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        aborted: AtomicBool::new(false),
    };
    let workers = spec.worker_count();
    let mut totals = vec![Tally::default(); filters.len()];
    let mut stats = SearchStats {
        workers,
        ..SearchStats::default()
    };

    // No alternative can be met: nothing to search.
    if !reqs.is_empty() {
        let units = match spec.seed_depth {
            Some(depth) => split::by_depth(spec, &ctx.geo, &reqs, depth),
            None if workers > 1 => split::by_count(spec, &ctx.geo, &reqs, workers * 16),
            None => vec![WorkUnit::root()],
        };
        stats.units = units.len();
        let results: Vec<(Vec<Tally>, Counters)> = if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
            pool.install(|| units.par_iter().map(|u| run_unit(&ctx, u)).collect())
        } else {
            units.iter().map(|u| run_unit(&ctx, u)).collect()
        };
        for (tallies, counters) in &results {
            stats.absorb(counters);
            for (t, u) in totals.iter_mut().zip(tallies) {
                t.add(u);
            }
        }
    }
    stats.elapsed_ms = started.elapsed().as_millis() as u64;
    if ctx.aborted.load(Ordering::SeqCst) {
        return Err(Error::ResourceLimit { stats });
    }
    Ok(totals.iter().map(|t| finish(&ctx, t, stats)).collect())
}

/// Counts the classes selected by `spec`.
pub fn count_tours(spec: &SearchSpec) -> Result<SearchResult> {
    let mut out = execute(spec, std::slice::from_ref(&spec.filter), None)?;
    Ok(out.remove(0))
}

/// Counts several filters in a single pass over the search space. The pass
/// prunes only what every filter allows to be pruned. `spec.filter` is
/// ignored.
pub fn count_filters(spec: &SearchSpec, filters: &[Filter]) -> Result<Vec<SearchResult>> {
    if filters.is_empty() {
        return Ok(Vec::new());
    }
    execute(spec, filters, None)
}

/// Enumerates the classes selected by `spec`, handing each one to `sink` once
/// as its Frenicle canonical form. The set of tours is deterministic; the order
/// in which they arrive is not when several workers run.
pub fn enumerate_tours(spec: &SearchSpec, sink: &(dyn Fn(Tour) + Sync)) -> Result<SearchResult> {
    let mut out = execute(spec, std::slice::from_ref(&spec.filter), Some(sink))?;
    Ok(out.remove(0))
}

/// Convenience wrapper around [`count_tours`].
pub fn count_with_filter(
    dims: BoardDims,
    closure: Closure,
    filter: Filter,
    mode: CountMode,
) -> Result<u64> {
    let spec = SearchSpec::new(dims)
        .closure(closure)
        .filter(filter)
        .mode(mode);
    Ok(count_tours(&spec)?.count)
}

/// Cross-check of arithmetic counting against Burnside's lemma.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnsideReport {
    pub board: String,
    pub closure: Closure,
    pub group_order: u64,
    /// Raw tours fixed by each group element.
    pub fixed: Vec<(SymmetryOp, u64)>,
    /// `sum(fixed) / |G|`.
    pub burnside_count: u64,
    /// Arithmetic count from [`count_tours`].
    pub arithmetic_count: u64,
    pub consistent: bool,
}

struct FixedPointVisitor<'a> {
    geo: &'a Geometry,
    closure: Closure,
    fixed: Vec<u64>,
}

impl Visitor for FixedPointVisitor<'_> {
    fn leaf(&mut self, state: &State<'_>) -> bool {
        if !self.closure.admits(state.is_closed()) {
            return true;
        }
        for (g, m) in self.geo.sym.iter().enumerate() {
            if (0..self.geo.n).all(|i| state.grid[m[i] as usize] == state.grid[i]) {
                self.fixed[g] += 1;
            }
        }
        true
    }
}

/// Enumerates every directed tour from every start cell, counts the tours
/// each symmetry fixes and compares the Burnside orbit count with the
/// arithmetic count. Only practical on boards small enough for a raw search.
pub fn burnside_check(dims: BoardDims, closure: Closure) -> Result<BurnsideReport> {
    let spec = SearchSpec::new(dims).closure(closure);
    spec.validate()?;
    let geo = Geometry::new(dims);
    let mut visitor = FixedPointVisitor {
        geo: &geo,
        closure,
        fixed: vec![0; geo.sym.len()],
    };
    let mut counters = Counters::default();
    for start in 0..geo.n {
        let mut state = State::new(&geo, &[], false);
        if state.push(start) == Prune::Ok {
            if state.depth() == geo.n {
                visitor.leaf(&state);
            } else {
                dfs(&mut state, &mut visitor, &mut counters);
            }
        }
    }
    let order = geo.sym.len() as u64;
    let total: u64 = visitor.fixed.iter().sum();
    let arithmetic = count_tours(&spec)?.count;
    let burnside_count = total / order;
    Ok(BurnsideReport {
        board: dims.to_string(),
        closure,
        group_order: order,
        fixed: dims
            .symmetry_group()
            .iter()
            .copied()
            .zip(visitor.fixed)
            .collect(),
        burnside_count,
        arithmetic_count: arithmetic,
        consistent: total.is_multiple_of(order) && burnside_count == arithmetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    fn dims(s: &str) -> BoardDims {
        s.parse().unwrap()
    }

    #[test]
    fn small_board_counts() {
        let spec = SearchSpec::new(dims("3x4"));
        let r = count_tours(&spec).unwrap();
        assert_eq!((r.count, r.raw), (4, 16));
        let g = count_tours(&spec.clone().mode(CountMode::Geometric)).unwrap();
        assert_eq!(g.count, 3);
        assert_eq!(count_tours(&SearchSpec::new(dims("4x4"))).unwrap().count, 0);
        assert_eq!(
            count_tours(&SearchSpec::new(dims("4x5"))).unwrap().count,
            41
        );
    }

    #[test]
    fn degenerate_boards_have_no_tours() {
        for b in ["1x2", "2x5", "3x3", "1x7"] {
            assert_eq!(
                count_tours(&SearchSpec::new(dims(b))).unwrap().count,
                0,
                "{b}"
            );
        }
        assert!(count_tours(&SearchSpec::new(dims("1x1"))).is_err());
    }

    #[test]
    fn enumerate_emits_each_class_once() {
        let seen = Mutex::new(Vec::new());
        let spec = SearchSpec::new(dims("4x5"));
        let r = enumerate_tours(&spec, &|t| seen.lock().unwrap().push(t)).unwrap();
        let mut tours = seen.into_inner().unwrap();
        assert_eq!(tours.len() as u64, r.count);
        tours.sort();
        tours.dedup();
        assert_eq!(tours.len(), 41);
        for t in &tours {
            assert_eq!(t.validate(), Ok(()));
            assert_eq!(&t.frenicle_canonical().into_tour(), t);
        }
    }

    #[test]
    fn limit_truncates_enumeration() {
        let seen = Mutex::new(0);
        let spec = SearchSpec::new(dims("4x5")).limit(3);
        let r = enumerate_tours(&spec, &|_| *seen.lock().unwrap() += 1).unwrap();
        assert_eq!(*seen.lock().unwrap(), 3);
        assert!(r.truncated);
    }

    #[test]
    fn node_limit_aborts_with_stats() {
        let spec = SearchSpec::new(dims("4x8")).node_limit(100_000);
        match count_tours(&spec) {
            Err(Error::ResourceLimit { stats }) => assert!(stats.nodes > 100_000),
            other => panic!("expected a resource-limit abort, got {other:?}"),
        }
    }

    #[test]
    fn burnside_small() {
        let r = burnside_check(dims("3x4"), Closure::Any).unwrap();
        assert!(r.consistent);
        assert_eq!((r.burnside_count, r.arithmetic_count), (4, 4));
        let r = burnside_check(dims("4x4"), Closure::Any).unwrap();
        assert_eq!((r.burnside_count, r.arithmetic_count), (0, 0));
    }

    #[test]
    fn thread_count_does_not_change_counts() {
        let f: Filter = "class=semi_long".parse().unwrap();
        let base = SearchSpec::new(dims("4x6")).filter(f);
        let one = count_tours(&base.clone().threads(1)).unwrap();
        let four = count_tours(&base.clone().threads(4)).unwrap();
        let seeded = count_tours(&base.clone().threads(2).seed_depth(3)).unwrap();
        assert_eq!(one.count, four.count);
        assert_eq!(one.count, seeded.count);
    }
}
