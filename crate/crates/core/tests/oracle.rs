//! Cross-checks the pruned search against a deliberately naive one: plain
//! backtracking from every cell, its own line-sum classifier and its own
//! symmetry code.

use std::collections::{BTreeSet, HashMap};

use ktour::{count_tours, BoardDims, Closure, CountMode, Filter, SearchSpec};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Kind {
    Magic,
    Semi { long: bool, off: Off },
    Other,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Off {
    Quasi,
    Near,
    Plain,
}

type CellMap = dyn Fn(usize, usize) -> (usize, usize);

struct Naive {
    w: usize,
    h: usize,
    adj: Vec<Vec<usize>>,
}

impl Naive {
    fn new(w: usize, h: usize) -> Self {
        let mut adj = vec![Vec::new(); w * h];
        for (i, list) in adj.iter_mut().enumerate() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in [
                (1, 2),
                (2, 1),
                (2, -1),
                (1, -2),
                (-1, -2),
                (-2, -1),
                (-2, 1),
                (-1, 2),
            ] {
                let (nx, ny) = (x + dx, y + dy);
                if (0..w as i64).contains(&nx) && (0..h as i64).contains(&ny) {
                    list.push(ny as usize * w + nx as usize);
                }
            }
        }
        Naive { w, h, adj }
    }

    /// Every directed tour as a visiting order.
    fn tours(&self) -> Vec<Vec<usize>> {
        let n = self.w * self.h;
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for s in 0..n {
            path.push(s);
            seen[s] = true;
            self.extend(&mut path, &mut seen, &mut out);
            seen[s] = false;
            path.pop();
        }
        out
    }

    fn extend(&self, path: &mut Vec<usize>, seen: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if path.len() == seen.len() {
            out.push(path.clone());
            return;
        }
        let at = *path.last().unwrap();
        for &c in &self.adj[at] {
            if !seen[c] {
                seen[c] = true;
                path.push(c);
                self.extend(path, seen, out);
                path.pop();
                seen[c] = false;
            }
        }
    }

    fn grid(&self, path: &[usize]) -> Vec<u32> {
        let mut g = vec![0; path.len()];
        for (k, &c) in path.iter().enumerate() {
            g[c] = k as u32 + 1;
        }
        g
    }

    fn closed(&self, path: &[usize]) -> bool {
        self.adj[path[0]].contains(path.last().unwrap())
    }

    fn kind(&self, g: &[u32]) -> Kind {
        let (w, h) = (self.w, self.h);
        let total = (g.len() * (g.len() + 1) / 2) as u32;
        let rows: Vec<u32> = (0..h).map(|r| g[r * w..(r + 1) * w].iter().sum()).collect();
        let cols: Vec<u32> = (0..w).map(|c| (0..h).map(|r| g[r * w + c]).sum()).collect();
        let row_mc = total.is_multiple_of(h as u32).then(|| total / h as u32);
        let col_mc = total.is_multiple_of(w as u32).then(|| total / w as u32);
        let all = |v: &[u32], mc: Option<u32>| mc.is_some_and(|m| v.iter().all(|&s| s == m));
        let off = |v: &[u32], mc: Option<u32>| {
            let set: BTreeSet<u32> = v.iter().copied().collect();
            let has = mc.is_some_and(|m| set.contains(&m));
            match (has, set.len() - has as usize) {
                (false, 2) => Off::Quasi,
                (true, 2) => Off::Near,
                _ => Off::Plain,
            }
        };
        match (all(&rows, row_mc), all(&cols, col_mc)) {
            (true, true) => Kind::Magic,
            (true, false) => Kind::Semi {
                long: false,
                off: off(&cols, col_mc),
            },
            (false, true) => Kind::Semi {
                long: true,
                off: off(&rows, row_mc),
            },
            (false, false) => Kind::Other,
        }
    }

    /// Cell permutations of the board's symmetry group.
    fn symmetries(&self) -> Vec<Vec<usize>> {
        let (w, h) = (self.w, self.h);
        let mut maps: Vec<Box<CellMap>> = vec![
            Box::new(|x, y| (x, y)),
            Box::new(move |x, y| (w - 1 - x, y)),
            Box::new(move |x, y| (x, h - 1 - y)),
            Box::new(move |x, y| (w - 1 - x, h - 1 - y)),
        ];
        if w == h {
            maps.push(Box::new(|x, y| (y, x)));
            maps.push(Box::new(move |x, y| (w - 1 - y, x)));
            maps.push(Box::new(move |x, y| (y, w - 1 - x)));
            maps.push(Box::new(move |x, y| (w - 1 - y, w - 1 - x)));
        }
        maps.iter()
            .map(|f| {
                (0..w * h)
                    .map(|i| {
                        let (x, y) = f(i % w, i / w);
                        y * w + x
                    })
                    .collect()
            })
            .collect()
    }

    /// Least grid over every symmetry image of every numbering of the same
    /// figure: reversal, and for closed tours every starting cell too.
    fn figure_key(&self, path: &[usize], syms: &[Vec<usize>]) -> Vec<u32> {
        let n = path.len();
        let mut orders: Vec<Vec<usize>> = vec![path.to_vec(), path.iter().rev().copied().collect()];
        if self.closed(path) {
            for s in 1..n {
                let fwd: Vec<usize> = (0..n).map(|i| path[(s + i) % n]).collect();
                orders.push(fwd.iter().rev().copied().collect());
                orders.push(fwd);
            }
        }
        orders
            .iter()
            .flat_map(|o| {
                syms.iter().map(move |m| {
                    let mapped: Vec<usize> = o.iter().map(|&c| m[c]).collect();
                    self.grid(&mapped)
                })
            })
            .min()
            .unwrap()
    }
}

#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
struct Tally {
    arithmetic: u64,
    open: u64,
    closed: u64,
    geometric: u64,
}

fn naive_tallies(w: usize, h: usize) -> HashMap<&'static str, Tally> {
    let b = Naive::new(w, h);
    let syms = b.symmetries();
    let g = syms.len() as u64;
    let mut raw: HashMap<&str, (u64, u64)> = HashMap::new();
    let mut figures: HashMap<&str, BTreeSet<Vec<u32>>> = HashMap::new();
    for path in b.tours() {
        let kind = b.kind(&b.grid(&path));
        let closed = b.closed(&path);
        let mut names = vec!["any"];
        names.extend(match kind {
            Kind::Magic => vec!["magic"],
            Kind::Other => vec![],
            Kind::Semi { long, off } => {
                let d = if long { 1 } else { 0 };
                let mut v = vec![["class=semi_short", "class=semi_long"][d]];
                match off {
                    Off::Quasi => v.push(["class=quasi_short", "class=quasi_long"][d]),
                    Off::Near => v.push(["class=near_short", "class=near_long"][d]),
                    Off::Plain => {}
                }
                v
            }
        });
        let key = b.figure_key(&path, &syms);
        for name in names {
            let e = raw.entry(name).or_default();
            if closed {
                e.1 += 1;
            } else {
                e.0 += 1;
            }
            figures.entry(name).or_default().insert(key.clone());
        }
    }
    raw.into_iter()
        .map(|(name, (open, closed))| {
            assert_eq!((open + closed) % g, 0);
            let tally = Tally {
                arithmetic: (open + closed) / g,
                open: open / g,
                closed: closed / g,
                geometric: figures[name].len() as u64,
            };
            (name, tally)
        })
        .collect()
}

fn library_tally(dims: BoardDims, filter: &str) -> Tally {
    let f: Filter = match filter {
        "any" => Filter::Any,
        "magic" => "class=magic".parse().unwrap(),
        other => other.parse().unwrap(),
    };
    let spec = SearchSpec::new(dims).filter(f).threads(2);
    let a = count_tours(&spec).unwrap();
    let geo = count_tours(&spec.clone().mode(CountMode::Geometric)).unwrap();
    Tally {
        arithmetic: a.count,
        open: a.open,
        closed: a.closed,
        geometric: geo.count,
    }
}

const FILTERS: [&str; 8] = [
    "any",
    "magic",
    "class=semi_short",
    "class=semi_long",
    "class=quasi_short",
    "class=quasi_long",
    "class=near_short",
    "class=near_long",
];

fn compare(w: usize, h: usize) {
    let naive = naive_tallies(w, h);
    let dims = BoardDims::new(w, h).unwrap();
    for name in FILTERS {
        let expected = naive.get(name).copied().unwrap_or_default();
        assert_eq!(library_tally(dims, name), expected, "{w}x{h} {name}");
    }
}

#[test]
fn three_wide_boards() {
    compare(3, 4);
    compare(3, 7);
    compare(3, 8);
}

#[test]
fn four_wide_boards() {
    compare(4, 5);
    compare(4, 6);
}

#[test]
fn five_by_five() {
    compare(5, 5);
}

#[test]
fn closed_tours_on_3x10() {
    let naive = Naive::new(3, 10);
    let syms = naive.symmetries();
    let circuits: BTreeSet<Vec<u32>> = naive
        .tours()
        .iter()
        .filter(|p| naive.closed(p))
        .map(|p| naive.figure_key(p, &syms))
        .collect();
    let spec = SearchSpec::new(BoardDims::new(3, 10).unwrap())
        .closure(Closure::Closed)
        .mode(CountMode::Geometric);
    assert_eq!(count_tours(&spec).unwrap().count, circuits.len() as u64);
    assert!(!circuits.is_empty());
}

#[test]
fn six_by_five_total() {
    let naive = Naive::new(5, 6);
    let tours = naive.tours();
    let closed = tours.iter().filter(|p| naive.closed(p)).count() as u64;
    let r = count_tours(&SearchSpec::new(BoardDims::new(5, 6).unwrap())).unwrap();
    assert_eq!(r.count, tours.len() as u64 / 4);
    assert_eq!(r.closed, closed / 4);
    assert_eq!(r.count, 9392);
}
