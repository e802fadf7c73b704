//! Exact expected travel times of a fixed (node, state) -> arc policy.

use std::collections::{BTreeMap, VecDeque};

use super::full::{FullModel, PolicyTable, ValueTable};
use crate::error::{Error, Result};
use crate::network::{ArcId, NodeId};
use crate::par;
use crate::sparse::CsrMatrix;
use crate::transit::ExpmWorkspace;

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Expected remaining time; infinite where the policy is not admissible.
    pub values: ValueTable,
    admissible: Vec<bool>,
    pub iterations: usize,
    pub converged: bool,
}

impl Evaluation {
    pub fn is_admissible(&self, node: NodeId, state: usize) -> bool {
        self.admissible[node * self.values.n_states + state]
    }

    /// First (node, state) from which the destination is not reached
    /// with probability one, if any.
    pub fn first_inadmissible(&self, nodes: impl IntoIterator<Item = NodeId>) -> Option<(NodeId, usize)> {
        let n = self.values.n_states;
        nodes.into_iter().find_map(|k| (0..n).find(|&s| !self.is_admissible(k, s)).map(|s| (k, s)))
    }

    /// Fails with `NotAdmissible` if the policy fails from `node` anywhere.
    pub fn require_admissible(&self, node: NodeId) -> Result<()> {
        match self.first_inadmissible([node]) {
            Some((node, state)) => Err(Error::NotAdmissible { node, state }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub epsilon: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { epsilon: 1e-10, max_iters: 100_000, tol: 1e-12 }
    }
}

/// States from which some state in `targets` is reachable in the generator graph.
fn backward_reach(qt: &CsrMatrix, targets: &[bool]) -> Vec<bool> {
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..targets.len()).filter(|&s| targets[s]).collect();
    while let Some(s) = queue.pop_front() {
        for (r, v) in qt.row(s) {
            if v > 0.0 && !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
    }
    seen
}

/// Pairs (k, s) that can reach a pair in `seed` under the policy. A move
/// along arc kl from state s can end in any state reachable from s.
fn can_reach(fm: &FullModel, policy: &PolicyTable, qt: &CsrMatrix, seed: Vec<bool>) -> Vec<bool> {
    let n_nodes = fm.model().network().num_nodes();
    let n = fm.n_states();
    let mut set = seed;
    loop {
        let mut changed = false;
        let mut reach: BTreeMap<NodeId, Vec<bool>> = BTreeMap::new();
        for k in (0..n_nodes).filter(|&k| k != policy.destination) {
            for s in 0..n {
                if set[k * n + s] {
                    continue;
                }
                let Some(a) = policy.get(k, s) else { continue };
                let l = fm.model().network().arcs()[a].head;
                let r = reach.entry(l).or_insert_with(|| backward_reach(qt, &set[l * n..(l + 1) * n]));
                if r[s] {
                    set[k * n + s] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return set;
        }
    }
}

/// Pairs from which the destination is reached with probability 1: those
/// that cannot reach any pair from which the destination is unreachable.
fn admissible_set(fm: &FullModel, policy: &PolicyTable) -> Vec<bool> {
    let n_nodes = fm.model().network().num_nodes();
    let n = fm.n_states();
    let qt = fm.generator().transpose();
    let dest = policy.destination;
    let mut at_dest = vec![false; n_nodes * n];
    at_dest[dest * n..(dest + 1) * n].fill(true);
    let reaches_dest = can_reach(fm, policy, &qt, at_dest);
    let stuck: Vec<bool> = reaches_dest.iter().map(|&r| !r).collect();
    let may_get_stuck = can_reach(fm, policy, &qt, stuck);
    may_get_stuck.iter().map(|&b| !b).collect()
}

/// Arcs chosen at one node, each with the states that choose it.
type ArcGroups = Vec<(ArcId, Vec<usize>)>;

/// Solves J = τ^π + P^π J by Jacobi sweeps of block-exponential actions.
pub fn evaluate_policy(fm: &FullModel, policy: &PolicyTable) -> Result<Evaluation> {
    evaluate_policy_with(fm, policy, EvalOptions::default())
}

pub fn evaluate_policy_with(fm: &FullModel, policy: &PolicyTable, opts: EvalOptions) -> Result<Evaluation> {
    let net = fm.model().network();
    let n_nodes = net.num_nodes();
    let n = fm.n_states();
    if policy.n_states != n || policy.n_nodes() != n_nodes {
        return Err(Error::InvalidArgument("policy does not match the state space".into()));
    }
    let dest = policy.destination;
    let adm = admissible_set(fm, policy);

    // Per node: arcs in use and the admissible states choosing each.
    let groups: Vec<(NodeId, ArcGroups)> = (0..n_nodes)
        .filter(|&k| k != dest)
        .map(|k| {
            let mut by_arc: BTreeMap<ArcId, Vec<usize>> = BTreeMap::new();
            for s in (0..n).filter(|&s| adm[k * n + s]) {
                if let Some(a) = policy.get(k, s) {
                    by_arc.entry(a).or_default().push(s);
                }
            }
            (k, by_arc.into_iter().collect())
        })
        .filter(|(_, g): &(NodeId, Vec<_>)| !g.is_empty())
        .collect();

    let mut values = ValueTable::new(n_nodes, n, 0.0);
    let mut iterations = 0;
    let mut converged = groups.is_empty();
    while !converged && iterations < opts.max_iters {
        iterations += 1;
        let updates = par::map_indexed(groups.len(), |i| -> Result<Vec<(usize, f64)>> {
            let mut ws = ExpmWorkspace::new(opts.tol)?;
            let mut out = Vec::new();
            for (a, states) in &groups[i].1 {
                let l = net.arcs()[*a].head;
                let v = fm.kernel(*a).value(&mut ws, values.node(l))?;
                out.extend(states.iter().map(|&s| (s, v[s])));
            }
            Ok(out)
        });
        let mut delta: f64 = 0.0;
        for (i, upd) in updates.into_iter().enumerate() {
            let k = groups[i].0;
            for (s, v) in upd? {
                delta = delta.max((v - values.get(k, s)).abs());
                values.set(k, s, v);
            }
        }
        converged = delta < opts.epsilon;
    }
    if !converged {
        log::warn!("policy evaluation stopped after {iterations} sweeps without converging");
    }
    for k in 0..n_nodes {
        for s in 0..n {
            if !adm[k * n + s] {
                values.set(k, s, f64::INFINITY);
            }
        }
    }
    Ok(Evaluation { values, admissible: adm, iterations, converged })
}
