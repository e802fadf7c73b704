//! Loopless k-shortest paths at maximum speeds.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::network::{ArcId, Network, NodeId};
use crate::routing::astar;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPath {
    pub arcs: Vec<ArcId>,
    /// Travel time at maximum speeds (hours).
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate(RankedPath);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cost.total_cmp(&other.0.cost).then_with(|| self.0.arcs.cmp(&other.0.arcs))
    }
}

fn cost(net: &Network, arcs: &[ArcId]) -> f64 {
    arcs.iter().map(|&a| net.min_time(a)).sum()
}

/// Shortest path avoiding the given arcs and nodes.
fn restricted_path(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    banned_arcs: &[bool],
    banned_nodes: &[bool],
) -> Option<Vec<ArcId>> {
    astar(
        net,
        origin,
        destination,
        |a| {
            let arc = &net.arcs()[a];
            if banned_arcs[a] || banned_nodes[arc.head] {
                f64::INFINITY
            } else {
                net.min_time(a)
            }
        },
        |_| 0.0,
    )
    .ok()
}

/// Up to `m` loopless paths in order of maximum-speed travel time; ties are
/// broken by the arc-id sequence.
pub fn yen_k_shortest(net: &Network, origin: NodeId, destination: NodeId, m: usize) -> Result<Vec<RankedPath>> {
    yen_excluding(net, origin, destination, m, &vec![false; net.num_arcs()])
}

/// As `yen_k_shortest` on the network without the arcs flagged in `removed`.
pub fn yen_excluding(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    m: usize,
    removed: &[bool],
) -> Result<Vec<RankedPath>> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    net.node(origin)?;
    net.node(destination)?;
    let no_nodes = vec![false; net.num_nodes()];
    let first = restricted_path(net, origin, destination, removed, &no_nodes)
        .ok_or(Error::Unreachable { origin, destination })?;
    let mut found = vec![RankedPath { cost: cost(net, &first), arcs: first }];
    let mut candidates: BTreeSet<Candidate> = BTreeSet::new();

    while found.len() < m {
        let prev = found.last().expect("non-empty").arcs.clone();
        let mut spur_node = origin;
        for i in 0..prev.len() {
            let root = &prev[..i];
            let mut banned_arcs = removed.to_vec();
            for p in &found {
                if p.arcs.len() > i && p.arcs[..i] == *root {
                    banned_arcs[p.arcs[i]] = true;
                }
            }
            let mut banned_nodes = vec![false; net.num_nodes()];
            let mut at = origin;
            for &a in root {
                banned_nodes[at] = true;
                at = net.arcs()[a].head;
            }
            if let Some(spur) = restricted_path(net, spur_node, destination, &banned_arcs, &banned_nodes) {
                let mut arcs = root.to_vec();
                arcs.extend(spur);
                let cand = Candidate(RankedPath { cost: cost(net, &arcs), arcs });
                if !found.iter().any(|p| p.arcs == cand.0.arcs) {
                    candidates.insert(cand);
                }
            }
            spur_node = net.arcs()[prev[i]].head;
        }
        match candidates.pop_first() {
            Some(c) => found.push(c.0),
            None => break,
        }
    }
    Ok(found)
}
