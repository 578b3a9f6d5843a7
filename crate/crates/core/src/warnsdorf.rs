//! Warnsdorf's rule: always move to the cell with the fewest onward moves.

use crate::board::{BoardDims, Cell};
use crate::error::{Error, Result};
use crate::tour::Tour;

/// Builds a tour greedily from `start`, moving each time to the unvisited
/// neighbour with the fewest unvisited neighbours of its own. Ties go to the
/// lowest row-major index, so the result is deterministic. Returns `Ok(None)`
/// when the rule runs into a dead end.
pub fn warnsdorf_construct(dims: BoardDims, start: Cell) -> Result<Option<Tour>> {
    if !dims.contains(start) {
        return Err(Error::invalid(format!(
            "cell ({}, {}) is outside {dims}",
            start.col, start.row
        )));
    }
    let adj = dims.knight_adjacency();
    let n = dims.cells();
    let mut visited = vec![false; n];
    let mut path = Vec::with_capacity(n);
    let mut at = dims.index(start);
    visited[at] = true;
    path.push(at);
    while path.len() < n {
        let onward = |c: usize| adj[c].iter().filter(|&&d| !visited[d]).count();
        // neighbours are listed in row-major order, so min_by_key keeps the lowest index on ties
        let Some(next) = adj[at]
            .iter()
            .copied()
            .filter(|&c| !visited[c])
            .min_by_key(|&c| onward(c))
        else {
            return Ok(None);
        };
        visited[next] = true;
        path.push(next);
        at = next;
    }
    Tour::from_path(dims, &path).map(Some)
}
