//! Splitting the search tree into independent work units.

use serde::{Deserialize, Serialize};

use super::{Closure, Geometry, Prune, SearchSpec, State};
use crate::error::Result;
use crate::filter::LineRequirement;

/// A subtree of the search: every tour extending `prefix`, counted `weight`
/// times. An empty prefix stands for the whole search over all start cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkUnit {
    pub prefix: Vec<u16>,
    pub weight: u64,
}

impl WorkUnit {
    pub fn root() -> Self {
        WorkUnit {
            prefix: Vec::new(),
            weight: 1,
        }
    }
}

fn starts(geo: &Geometry) -> Vec<WorkUnit> {
    geo.start_orbits()
        .into_iter()
        .map(|(c, w)| WorkUnit {
            prefix: vec![c as u16],
            weight: w,
        })
        .collect()
}

/// Children of `unit` that survive pruning. Complete tours have no children
/// and are returned as they are.
fn expand(state: &mut State<'_>, unit: &WorkUnit, out: &mut Vec<WorkUnit>) {
    let n = state.geo.n;
    if unit.prefix.len() == n {
        out.push(unit.clone());
        return;
    }
    if super::push_prefix(state, &unit.prefix) == Prune::Ok {
        let moves: Vec<usize> = state.moves().collect();
        for m in moves {
            if state.push(m) == Prune::Ok {
                let mut prefix = unit.prefix.clone();
                prefix.push(m as u16);
                out.push(WorkUnit {
                    prefix,
                    weight: unit.weight,
                });
            }
            state.pop();
        }
    }
    for _ in 0..state.depth() {
        state.pop();
    }
}

fn new_state<'g>(spec: &SearchSpec, geo: &'g Geometry, reqs: &[LineRequirement]) -> State<'g> {
    State::new(geo, reqs, spec.closure == Closure::Closed)
}

/// Breadth-first expansion until there are at least `target` units or no
/// unit can be expanded further.
pub(crate) fn by_count(
    spec: &SearchSpec,
    geo: &Geometry,
    reqs: &[LineRequirement],
    target: usize,
) -> Vec<WorkUnit> {
    if target <= 1 {
        return vec![WorkUnit::root()];
    }
    let mut state = new_state(spec, geo, reqs);
    let mut level = starts(geo);
    while level.len() < target && level.iter().any(|u| u.prefix.len() < geo.n) {
        let mut next = Vec::with_capacity(level.len() * 4);
        for u in &level {
            expand(&mut state, u, &mut next);
        }
        if next.is_empty() {
            return next;
        }
        level = next;
    }
    level
}

/// Every surviving prefix of exactly `depth` cells (shorter only when a tour
/// is already complete). A depth of zero gives the single root unit.
pub(crate) fn by_depth(
    spec: &SearchSpec,
    geo: &Geometry,
    reqs: &[LineRequirement],
    depth: usize,
) -> Vec<WorkUnit> {
    if depth == 0 {
        return vec![WorkUnit::root()];
    }
    let mut state = new_state(spec, geo, reqs);
    let mut level = starts(geo);
    for _ in 1..depth.min(geo.n) {
        let mut next = Vec::new();
        for u in &level {
            expand(&mut state, u, &mut next);
        }
        level = next;
    }
    level
}

/// Splits the search described by `spec` into at least `target` units where
/// the tree allows it.
pub fn split_frontier(spec: &SearchSpec, target: usize) -> Result<Vec<WorkUnit>> {
    spec.validate()?;
    let geo = Geometry::new(spec.dims);
    let reqs = spec.requirements(std::slice::from_ref(&spec.filter));
    Ok(by_count(spec, &geo, &reqs, target))
}

/// Splits the search described by `spec` into all prefixes of `depth` cells.
pub fn split_to_depth(spec: &SearchSpec, depth: usize) -> Result<Vec<WorkUnit>> {
    spec.validate()?;
    let geo = Geometry::new(spec.dims);
    let reqs = spec.requirements(std::slice::from_ref(&spec.filter));
    Ok(by_depth(spec, &geo, &reqs, depth))
}
