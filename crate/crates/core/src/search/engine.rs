//! Depth-first knight path search with incremental dead-end detection and
//! line-sum bounds.
//!
//! The state keeps, for every cell, the number of unvisited knight neighbours
//! (`free_deg`) and two running counters: unvisited cells with at most one
//! free neighbour (`low`) and with none (`zero`). After each move the path
//! must still be completable from the head, which rules out
//!
//! * an unvisited cell with no free neighbour that the head cannot reach,
//! * a head neighbour reachable only from the head while more than one cell
//!   remains,
//! * two or more cells, not adjacent to the head, that could only be the
//!   final cell.
//!
//! Line sums are checked against the requirements implied by the filters. A
//! line with `o` empty cells reserved for odd numbers and `e` for even numbers
//! (knight moves alternate colours, so the start cell fixes which cells hold
//! odd numbers) can only be completed if its missing amount lies between the
//! smallest and largest sums available from the unused odd and even numbers,
//! with matching parity. A knight move changes both coordinates, so a line
//! never holds two consecutive numbers; the bounds use that too.
//!
//! On boards four cells wide the two outer long lines have no knight move
//! between them, so the path never visits two outer cells in a row. Half the
//! board is outer, which leaves at most one slack step: the unvisited outer
//! cells must fit into alternate positions of what is left of the path. When
//! every long line must be magic, the outer cells must also share out exactly
//! twice the long constant, bounded the same way.

use crate::board::BoardDims;
use crate::filter::LineRequirement;

/// Immutable per-board tables shared by all workers.
#[derive(Debug)]
pub(crate) struct Geometry {
    pub dims: BoardDims,
    pub n: usize,
    pub adj: Vec<Vec<u16>>,
    pub adjacent: Vec<bool>,
    pub row: Vec<u16>,
    /// Column line ids, offset by the number of rows.
    pub col_line: Vec<u16>,
    pub color: Vec<u8>,
    /// Cell permutations of the symmetry group, identity first.
    pub sym: Vec<Vec<u16>>,
    pub sym_inv: Vec<Vec<u16>>,
    /// Magic constant per line id (rows first), when integral.
    pub line_mc: Vec<Option<i64>>,
    /// Cells of the two outer long lines, on boards four cells wide.
    pub outer: Option<Vec<bool>>,
}

impl Geometry {
    pub fn new(dims: BoardDims) -> Self {
        let n = dims.cells();
        let adj: Vec<Vec<u16>> = dims
            .knight_adjacency()
            .into_iter()
            .map(|v| v.into_iter().map(|c| c as u16).collect())
            .collect();
        let mut adjacent = vec![false; n * n];
        for (a, list) in adj.iter().enumerate() {
            for &b in list {
                adjacent[a * n + b as usize] = true;
            }
        }
        let (w, h) = (dims.width(), dims.height());
        let sym: Vec<Vec<u16>> = dims
            .symmetry_maps()
            .into_iter()
            .map(|m| m.into_iter().map(|c| c as u16).collect())
            .collect();
        let sym_inv = sym
            .iter()
            .map(|m| {
                let mut inv = vec![0u16; n];
                for (i, &j) in m.iter().enumerate() {
                    inv[j as usize] = i as u16;
                }
                inv
            })
            .collect();
        let mc = crate::board::magic_constants(dims);
        let mut line_mc = vec![mc.short().map(|v| v as i64); h];
        line_mc.extend(std::iter::repeat_n(mc.long().map(|v| v as i64), w));
        Geometry {
            dims,
            n,
            adj,
            adjacent,
            row: (0..n).map(|i| (i / w) as u16).collect(),
            col_line: (0..n).map(|i| (h + i % w) as u16).collect(),
            color: (0..n).map(|i| ((i / w + i % w) % 2) as u8).collect(),
            sym,
            sym_inv,
            line_mc,
            outer: (w == 4).then(|| (0..n).map(|i| i % w == 0 || i % w == 3).collect()),
        }
    }

    #[inline]
    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacent[a * self.n + b]
    }

    pub fn lines(&self) -> usize {
        self.dims.width() + self.dims.height()
    }

    /// Orbit representatives of the cells under the symmetry group with their
    /// orbit sizes.
    pub fn start_orbits(&self) -> Vec<(usize, u64)> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for c in 0..self.n {
            if seen[c] {
                continue;
            }
            let mut orbit: Vec<usize> = self.sym.iter().map(|m| m[c] as usize).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &o in &orbit {
                seen[o] = true;
            }
            out.push((c, orbit.len() as u64));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Prune {
    Ok,
    Connectivity,
    LineSums,
    Closure,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Counters {
    pub nodes: u64,
    pub pruned_connectivity: u64,
    pub pruned_line_sums: u64,
    pub pruned_closure: u64,
}

/// Mutable search state for one worker.
pub(crate) struct State<'g> {
    pub geo: &'g Geometry,
    pub grid: Vec<u16>,
    pub path: Vec<u16>,
    free_deg: Vec<u8>,
    low: u32,
    zero: u32,
    sums: Vec<i64>,
    odd_left: Vec<u16>,
    even_left: Vec<u16>,
    /// Alternatives of line requirements; empty means no line pruning.
    reqs: Vec<LineRequirement>,
    closed_only: bool,
    use_lines: bool,
    outer_left: i64,
    outer_sum: i64,
    /// Required total of the outer cells, when every long line must be magic.
    outer_target: Option<i64>,
}

impl<'g> State<'g> {
    pub fn new(geo: &'g Geometry, reqs: &[LineRequirement], closed_only: bool) -> Self {
        let n = geo.n;
        let free_deg: Vec<u8> = geo.adj.iter().map(|a| a.len() as u8).collect();
        let low = free_deg.iter().filter(|&&d| d <= 1).count() as u32;
        let zero = free_deg.iter().filter(|&&d| d == 0).count() as u32;
        let use_lines = !reqs.is_empty() && reqs.iter().all(|r| !r.is_trivial());
        let w = geo.dims.width();
        let outer_left = geo
            .outer
            .as_ref()
            .map_or(0, |o| o.iter().filter(|&&x| x).count() as i64);
        let outer_target = match geo.line_mc[geo.dims.height()] {
            Some(mc) if use_lines && geo.outer.is_some() && reqs.iter().all(|r| r.long == w) => {
                Some(2 * mc)
            }
            _ => None,
        };
        State {
            geo,
            grid: vec![0; n],
            path: Vec::with_capacity(n),
            free_deg,
            low,
            zero,
            sums: vec![0; geo.lines()],
            odd_left: vec![0; geo.lines()],
            even_left: vec![0; geo.lines()],
            reqs: if use_lines { reqs.to_vec() } else { Vec::new() },
            closed_only,
            use_lines,
            outer_left,
            outer_sum: 0,
            outer_target,
        }
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn head(&self) -> usize {
        *self.path.last().expect("non-empty path") as usize
    }

    fn init_lines(&mut self, start: usize) {
        let geo = self.geo;
        self.odd_left.iter_mut().for_each(|v| *v = 0);
        self.even_left.iter_mut().for_each(|v| *v = 0);
        let odd_color = geo.color[start];
        for c in 0..geo.n {
            let (r, l) = (geo.row[c] as usize, geo.col_line[c] as usize);
            if geo.color[c] == odd_color {
                self.odd_left[r] += 1;
                self.odd_left[l] += 1;
            } else {
                self.even_left[r] += 1;
                self.even_left[l] += 1;
            }
        }
    }

    /// Places the next number on `cell` and reports whether the extended path
    /// is still completable. Always pair with [`pop`](Self::pop).
    pub fn push(&mut self, cell: usize) -> Prune {
        let geo = self.geo;
        if self.path.is_empty() {
            self.init_lines(cell);
        }
        let k = self.path.len() + 1;
        self.grid[cell] = k as u16;
        self.path.push(cell as u16);

        let d = self.free_deg[cell];
        if d <= 1 {
            self.low -= 1;
            if d == 0 {
                self.zero -= 1;
            }
        }
        let mut low_adj = 0;
        let mut zero_adj = 0;
        for &u in &geo.adj[cell] {
            let u = u as usize;
            self.free_deg[u] -= 1;
            if self.grid[u] == 0 {
                match self.free_deg[u] {
                    1 => self.low += 1,
                    0 => self.zero += 1,
                    _ => {}
                }
                if self.free_deg[u] <= 1 {
                    low_adj += 1;
                    if self.free_deg[u] == 0 {
                        zero_adj += 1;
                    }
                }
            }
        }

        let (r, l) = (geo.row[cell] as usize, geo.col_line[cell] as usize);
        self.sums[r] += k as i64;
        self.sums[l] += k as i64;
        if k % 2 == 1 {
            self.odd_left[r] -= 1;
            self.odd_left[l] -= 1;
        } else {
            self.even_left[r] -= 1;
            self.even_left[l] -= 1;
        }
        let is_outer = geo.outer.as_ref().is_some_and(|o| o[cell]);
        if is_outer {
            self.outer_left -= 1;
            self.outer_sum += k as i64;
        }

        let remaining = geo.n - k;
        if remaining == 0 {
            return Prune::Ok;
        }
        if self.zero > zero_adj || (zero_adj > 0 && remaining > 1) || self.low - low_adj > 1 {
            return Prune::Connectivity;
        }
        if self.closed_only && self.free_deg[self.path[0] as usize] == 0 {
            return Prune::Closure;
        }
        if geo.outer.is_some() {
            if let Some(verdict) = self.outer_check(k, is_outer) {
                return verdict;
            }
        }
        if self.use_lines && !self.lines_feasible(k) {
            return Prune::LineSums;
        }
        Prune::Ok
    }

    pub fn pop(&mut self) {
        let geo = self.geo;
        let cell = self.path.pop().expect("pop on empty path") as usize;
        let k = self.path.len() + 1;
        let (r, l) = (geo.row[cell] as usize, geo.col_line[cell] as usize);
        self.sums[r] -= k as i64;
        self.sums[l] -= k as i64;
        if k % 2 == 1 {
            self.odd_left[r] += 1;
            self.odd_left[l] += 1;
        } else {
            self.even_left[r] += 1;
            self.even_left[l] += 1;
        }
        if geo.outer.as_ref().is_some_and(|o| o[cell]) {
            self.outer_left += 1;
            self.outer_sum -= k as i64;
        }
        for &u in &geo.adj[cell] {
            let u = u as usize;
            if self.grid[u] == 0 {
                match self.free_deg[u] {
                    1 => self.low -= 1,
                    0 => self.zero -= 1,
                    _ => {}
                }
            }
            self.free_deg[u] += 1;
        }
        let d = self.free_deg[cell];
        if d <= 1 {
            self.low += 1;
            if d == 0 {
                self.zero += 1;
            }
        }
        self.grid[cell] = 0;
    }

    /// The unvisited outer cells take numbers from `first..=n`, no two of
    /// them consecutive.
    fn outer_check(&self, k: usize, head_outer: bool) -> Option<Prune> {
        let (k, n) = (k as i64, self.geo.n as i64);
        let e = self.outer_left;
        let first = if head_outer { k + 2 } else { k + 1 };
        if e > 0 && first + 2 * (e - 1) > n {
            return Some(Prune::Connectivity);
        }
        let target = self.outer_target?;
        let need = target - self.outer_sum;
        let lo = e * first + e * (e - 1);
        let hi = e * n - e * (e - 1);
        (need < lo || need > hi).then_some(Prune::LineSums)
    }

    /// Can line `line` still reach its constant once `k` numbers are placed?
    #[inline]
    fn line_ok(&self, line: usize, k: i64, n: i64, head_lines: (usize, usize)) -> bool {
        let Some(mc) = self.geo.line_mc[line] else {
            return false;
        };
        let need = mc - self.sums[line];
        let o = self.odd_left[line] as i64;
        let e = self.even_left[line] as i64;
        if o + e == 0 {
            return need == 0;
        }
        // k + 1 is a knight move from k, so it never shares a line with it
        let first = if line == head_lines.0 || line == head_lines.1 {
            k + 2
        } else {
            k + 1
        };
        match sum_range(o, e, first, n) {
            Some((lo, hi)) => need >= lo && need <= hi && (need - lo) % 2 == 0,
            None => false,
        }
    }

    fn lines_feasible(&self, k: usize) -> bool {
        let geo = self.geo;
        let (h, w) = (geo.dims.height(), geo.dims.width());
        let head = self.head();
        let hl = (geo.row[head] as usize, geo.col_line[head] as usize);
        let (k, n) = (k as i64, geo.n as i64);
        self.reqs.iter().any(|req| {
            self.direction_ok(0..h, req.short, k, n, hl)
                && self.direction_ok(h..h + w, req.long, k, n, hl)
        })
    }

    fn direction_ok(
        &self,
        lines: std::ops::Range<usize>,
        need: usize,
        k: i64,
        n: i64,
        hl: (usize, usize),
    ) -> bool {
        if need == 0 {
            return true;
        }
        let total = lines.len();
        let mut bad = 0;
        for line in lines {
            if !self.line_ok(line, k, n, hl) {
                bad += 1;
                if total - bad < need {
                    return false;
                }
            }
        }
        true
    }

    /// Free knight neighbours of the head in row-major order.
    pub fn moves(&self) -> impl Iterator<Item = usize> + '_ {
        self.geo.adj[self.head()]
            .iter()
            .map(|&c| c as usize)
            .filter(|&c| self.grid[c] == 0)
    }

    pub fn is_closed(&self) -> bool {
        let n = self.path.len();
        n > 1
            && self
                .geo
                .is_adjacent(self.path[0] as usize, self.path[n - 1] as usize)
    }

    pub fn line_sums(&self) -> (Vec<u64>, Vec<u64>) {
        let h = self.geo.dims.height();
        let short = self.sums[..h].iter().map(|&s| s as u64).collect();
        let long = self.sums[h..].iter().map(|&s| s as u64).collect();
        (short, long)
    }
}

/// Smallest and largest sums of `o` distinct odd and `e` distinct even numbers
/// from `first..=n` with no two of them consecutive, or `None` if there are
/// not enough. Within a block of one parity the numbers step by 2; changing
/// parity costs a step of at least 3, so the extremes use a single change.
fn sum_range(o: i64, e: i64, first: i64, n: i64) -> Option<(i64, i64)> {
    let up = |x: i64, odd: bool| if (x % 2 == 1) == odd { x } else { x + 1 };
    let down = |x: i64, odd: bool| if (x % 2 == 1) == odd { x } else { x - 1 };
    let block = |start: i64, len: i64, step: i64| len * start + step * len * (len - 1);
    let mut lo = None::<i64>;
    let mut hi = None::<i64>;
    for odd_first in [true, false] {
        let (a, b) = if odd_first { (o, e) } else { (e, o) };
        if a == 0 && b > 0 {
            continue;
        }
        // ascending from `first`: block a, then block b of the other parity
        let s1 = up(first, odd_first);
        let s2 = if b == 0 { s1 } else { s1 + 2 * (a - 1) + 3 };
        let top = if b == 0 {
            s1 + 2 * (a - 1)
        } else {
            s2 + 2 * (b - 1)
        };
        if top <= n {
            let v = block(s1, a, 1) + block(s2, b, 1);
            lo = Some(lo.map_or(v, |l| l.min(v)));
        }
        // descending from `n`: block a on top, then block b below it
        let t1 = down(n, odd_first);
        let t2 = if b == 0 { t1 } else { t1 - 2 * (a - 1) - 3 };
        let bottom = if b == 0 {
            t1 - 2 * (a - 1)
        } else {
            t2 - 2 * (b - 1)
        };
        if bottom >= first {
            let v = block(t1, a, -1) + block(t2, b, -1);
            hi = Some(hi.map_or(v, |h| h.max(v)));
        }
    }
    lo.zip(hi)
}

/// Receives complete tours and decides whether the search should go on.
pub(crate) trait Visitor {
    /// Called for every complete path. Return `false` to stop the search.
    fn leaf(&mut self, state: &State<'_>) -> bool;

    /// Called every few thousand nodes. Return `false` to stop.
    fn checkpoint(&mut self, _counters: &Counters) -> bool {
        true
    }
}

const CHECKPOINT_MASK: u64 = (1 << 16) - 1;

/// Exhausts every extension of the current path. Returns `false` if the
/// visitor asked to stop.
pub(crate) fn dfs<V: Visitor>(
    state: &mut State<'_>,
    visitor: &mut V,
    counters: &mut Counters,
) -> bool {
    if state.depth() == state.geo.n {
        return visitor.leaf(state);
    }
    let head = state.head();
    let geo = state.geo;
    for &next in &geo.adj[head] {
        let next = next as usize;
        if state.grid[next] != 0 {
            continue;
        }
        counters.nodes += 1;
        if counters.nodes & CHECKPOINT_MASK == 0 && !visitor.checkpoint(counters) {
            return false;
        }
        let verdict = state.push(next);
        let keep_going = match verdict {
            Prune::Ok => dfs(state, visitor, counters),
            Prune::Connectivity => {
                counters.pruned_connectivity += 1;
                true
            }
            Prune::LineSums => {
                counters.pruned_line_sums += 1;
                true
            }
            Prune::Closure => {
                counters.pruned_closure += 1;
                true
            }
        };
        state.pop();
        if !keep_going {
            return false;
        }
    }
    true
}

/// Pushes a whole prefix. Returns the verdict of the first failing push (with
/// the prefix still pushed up to and including that cell) or `Ok`.
pub(crate) fn push_prefix(state: &mut State<'_>, prefix: &[u16]) -> Prune {
    for &c in prefix {
        let v = state.push(c as usize);
        if v != Prune::Ok {
            return v;
        }
    }
    Prune::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    struct CountAll(u64);

    impl Visitor for CountAll {
        fn leaf(&mut self, _: &State<'_>) -> bool {
            self.0 += 1;
            true
        }
    }

    fn raw_count(dims: &str) -> u64 {
        let geo = Geometry::new(dims.parse().unwrap());
        let mut total = 0;
        for start in 0..geo.n {
            let mut st = State::new(&geo, &[], false);
            let mut v = CountAll(0);
            let mut c = Counters::default();
            if st.push(start) == Prune::Ok {
                dfs(&mut st, &mut v, &mut c);
            }
            st.pop();
            total += v.0;
        }
        total
    }

    #[test]
    fn raw_counts_on_small_boards() {
        assert_eq!(raw_count("3x4"), 16);
        assert_eq!(raw_count("4x4"), 0);
        assert_eq!(raw_count("4x5"), 164);
        assert_eq!(raw_count("3x3"), 0);
    }

    #[test]
    fn sum_range_matches_brute_force() {
        for n in 1..=14i64 {
            for first in 1..=n {
                for o in 0..=4 {
                    for e in 0..=4 {
                        if o + e == 0 {
                            continue;
                        }
                        let mut best: Option<(i64, i64)> = None;
                        for mask in 0u32..(1 << (n - first + 1)) {
                            let picked: Vec<i64> = (first..=n)
                                .filter(|v| mask >> (v - first) & 1 == 1)
                                .collect();
                            let odd = picked.iter().filter(|v| *v % 2 == 1).count() as i64;
                            let spaced = picked.windows(2).all(|w| w[1] - w[0] >= 2);
                            if odd == o && picked.len() as i64 == o + e && spaced {
                                let s: i64 = picked.iter().sum();
                                best = Some(best.map_or((s, s), |(l, h)| (l.min(s), h.max(s))));
                            }
                        }
                        assert_eq!(
                            sum_range(o, e, first, n),
                            best,
                            "o={o} e={e} first={first} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn push_pop_restores_state() {
        let geo = Geometry::new("4x5".parse().unwrap());
        let mut st = State::new(&geo, &[LineRequirement { short: 5, long: 0 }], false);
        let (low, zero, deg) = (st.low, st.zero, st.free_deg.clone());
        st.push(0);
        let first: Vec<usize> = st.moves().collect();
        for m in first {
            st.push(m);
            st.pop();
        }
        st.pop();
        assert_eq!((st.low, st.zero), (low, zero));
        assert_eq!(st.free_deg, deg);
        assert!(st.sums.iter().all(|&s| s == 0));
    }

    #[test]
    fn start_orbits_cover_the_board() {
        for dims in ["4x5", "6x6", "3x4", "5x5"] {
            let geo = Geometry::new(dims.parse().unwrap());
            let total: u64 = geo.start_orbits().iter().map(|&(_, w)| w).sum();
            assert_eq!(total as usize, geo.n);
        }
    }
}
