//! Knuth's random-probe estimate of the size of a search tree.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use super::engine::{Geometry, Prune, State};
use super::{Closure, SearchSpec};
use crate::error::{Error, Result};

/// Estimates how many nodes a full search of `spec` would visit, counted the
/// way [`SearchStats::nodes`](super::SearchStats) counts them. Each probe walks
/// one random root-to-leaf path, choosing uniformly among the children that
/// survive pruning; the product of the branching factors along the way is an
/// unbiased estimate of the tree size. The spread is large, so use a few
/// thousand probes for anything you mean to act on.
pub fn estimate_nodes(spec: &SearchSpec, probes: usize, seed: u64) -> Result<f64> {
    spec.validate()?;
    if probes == 0 {
        return Err(Error::invalid("at least one probe is needed"));
    }
    let geo = Geometry::new(spec.dims);
    let reqs = spec.requirements(std::slice::from_ref(&spec.filter));
    let starts = geo.start_orbits();
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut state = State::new(&geo, &reqs, spec.closure == Closure::Closed);
    let mut total = 0.0;
    let mut survivors = Vec::new();
    for _ in 0..probes {
        let (start, _) = starts[rng.gen_range(0..starts.len())];
        let mut weight = starts.len() as f64;
        if state.push(start) == Prune::Ok {
            while state.depth() < geo.n {
                survivors.clear();
                let moves: Vec<usize> = state.moves().collect();
                total += weight * moves.len() as f64;
                for m in moves {
                    if state.push(m) == Prune::Ok {
                        survivors.push(m);
                    }
                    state.pop();
                }
                if survivors.is_empty() {
                    break;
                }
                weight *= survivors.len() as f64;
                state.push(survivors[rng.gen_range(0..survivors.len())]);
            }
        }
        while state.depth() > 0 {
            state.pop();
        }
    }
    Ok(total / probes as f64)
}
