//! Value iteration on the Bellman optimality equations.

use super::full::{FullModel, PolicyTable, ValueTable};
use super::search::lower_bounds;
use crate::error::Result;
use crate::network::{ArcId, NodeId};
use crate::par;
use crate::transit::ExpmWorkspace;

/// Finite stand-in for an infinite initial value.
pub const SENTINEL: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViOptions {
    /// Stop when the sup-norm change falls below this (hours).
    pub epsilon: f64,
    pub max_iters: usize,
    /// Kernel tolerance.
    pub tol: f64,
}

impl Default for ViOptions {
    fn default() -> Self {
        ViOptions { epsilon: 1e-9, max_iters: 100_000, tol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct ViResult {
    pub policy: PolicyTable,
    pub values: ValueTable,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm change per sweep.
    pub deltas: Vec<f64>,
}

/// Candidate moves from a node, ordered by (head, arc) for tie-breaking.
fn moves(fm: &FullModel, k: NodeId, reachable: &[bool]) -> Result<Vec<(ArcId, NodeId)>> {
    let mut m: Vec<(ArcId, NodeId)> =
        fm.model().network().neighbors(k)?.into_iter().filter(|&(_, l)| reachable[l]).collect();
    m.sort_by_key(|&(a, l)| (l, a));
    Ok(m)
}

/// One Bellman update of a node against `values`.
fn update_node(
    fm: &FullModel,
    ws: &mut ExpmWorkspace,
    moves: &[(ArcId, NodeId)],
    values: &ValueTable,
) -> Result<(Vec<f64>, Vec<Option<ArcId>>)> {
    let n = fm.n_states();
    let mut best = vec![f64::INFINITY; n];
    let mut arg = vec![None; n];
    for &(a, l) in moves {
        let v = fm.kernel(a).value(ws, values.node(l))?;
        for s in 0..n {
            if v[s] < best[s] {
                best[s] = v[s];
                arg[s] = Some(a);
            }
        }
    }
    Ok((best, arg))
}

/// Optimal expected travel times and a greedy policy towards `destination`.
pub fn value_iteration(fm: &FullModel, destination: NodeId, opts: ViOptions) -> Result<ViResult> {
    let net = fm.model().network();
    let lb = lower_bounds(net, destination)?;
    let n_nodes = net.num_nodes();
    let n = fm.n_states();
    let reachable: Vec<bool> = (0..n_nodes).map(|k| lb.reachable(k)).collect();
    let active: Vec<NodeId> = (0..n_nodes).filter(|&k| k != destination && reachable[k]).collect();
    let node_moves = active.iter().map(|&k| moves(fm, k, &reachable)).collect::<Result<Vec<_>>>()?;

    let mut values = ValueTable::new(n_nodes, n, SENTINEL);
    values.node_mut(destination).fill(0.0);
    let mut deltas = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let updates = par::map_indexed(active.len(), |i| -> Result<Vec<f64>> {
            let mut ws = ExpmWorkspace::new(opts.tol)?;
            Ok(update_node(fm, &mut ws, &node_moves[i], &values)?.0)
        });
        let mut delta: f64 = 0.0;
        for (i, upd) in updates.into_iter().enumerate() {
            let upd = upd?;
            let row = values.node_mut(active[i]);
            for (old, new) in row.iter_mut().zip(upd) {
                delta = delta.max((new - *old).abs());
                *old = new;
            }
        }
        deltas.push(delta);
        if delta < opts.epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("value iteration stopped after {iterations} sweeps without converging");
    }

    let mut policy = PolicyTable::new(destination, n_nodes, n);
    let greedy = par::map_indexed(active.len(), |i| -> Result<Vec<Option<ArcId>>> {
        let mut ws = ExpmWorkspace::new(opts.tol)?;
        Ok(update_node(fm, &mut ws, &node_moves[i], &values)?.1)
    });
    for (i, g) in greedy.into_iter().enumerate() {
        for (s, a) in g?.into_iter().enumerate() {
            policy.set(active[i], s, a);
        }
    }
    for k in (0..n_nodes).filter(|&k| !reachable[k]) {
        values.node_mut(k).fill(f64::INFINITY);
    }
    Ok(ViResult { policy, values, iterations, converged, deltas })
}
