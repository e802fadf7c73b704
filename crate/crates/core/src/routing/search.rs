//! Deterministic searches: lower bounds, A*, and the two baselines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::background::{CompositeState, Model};
use crate::error::{Error, Result};
use crate::network::{ArcId, Network, NodeId};

/// Min-heap entry ordered by (key, node, path length).
#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapEntry {
    pub key: f64,
    pub node: NodeId,
    pub hops: usize,
    pub label: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so that BinaryHeap pops the smallest entry.
        other
            .key
            .total_cmp(&self.key)
            .then(other.node.cmp(&self.node))
            .then(other.hops.cmp(&self.hops))
            .then(other.label.cmp(&self.label))
    }
}

/// Admissible travel-time bounds towards one destination.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBounds {
    pub destination: NodeId,
    /// Hours; `f64::INFINITY` where the destination is unreachable.
    pub lb: Vec<f64>,
}

impl LowerBounds {
    /// Bounds that are identically zero (plain best-first search).
    pub fn zero(net: &Network, destination: NodeId) -> Self {
        LowerBounds { destination, lb: vec![0.0; net.num_nodes()] }
    }

    pub fn get(&self, k: NodeId) -> f64 {
        self.lb[k]
    }

    pub fn reachable(&self, k: NodeId) -> bool {
        self.lb[k].is_finite()
    }
}

/// Reverse Dijkstra with arc cost length / max speed.
pub fn lower_bounds(net: &Network, destination: NodeId) -> Result<LowerBounds> {
    net.node(destination)?;
    let mut lb = vec![f64::INFINITY; net.num_nodes()];
    let mut done = vec![false; net.num_nodes()];
    lb[destination] = 0.0;
    let mut heap = BinaryHeap::from([HeapEntry { key: 0.0, node: destination, hops: 0, label: 0 }]);
    while let Some(e) = heap.pop() {
        if done[e.node] {
            continue;
        }
        done[e.node] = true;
        for &a in net.in_arcs(e.node) {
            let arc = &net.arcs()[a];
            if !arc.routable {
                continue;
            }
            let cand = e.key + net.min_time(a);
            if cand < lb[arc.tail] {
                lb[arc.tail] = cand;
                heap.push(HeapEntry { key: cand, node: arc.tail, hops: e.hops + 1, label: 0 });
            }
        }
    }
    Ok(LowerBounds { destination, lb })
}

/// A* over routable arcs with non-negative `cost` and a consistent heuristic.
/// Ties go to the smaller node id, then the smaller arc id.
pub fn astar(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    cost: impl Fn(ArcId) -> f64,
    heuristic: impl Fn(NodeId) -> f64,
) -> Result<Vec<ArcId>> {
    net.node(origin)?;
    net.node(destination)?;
    let n = net.num_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<ArcId>> = vec![None; n];
    let mut hops = vec![0usize; n];
    let mut done = vec![false; n];
    dist[origin] = 0.0;
    let mut heap = BinaryHeap::from([HeapEntry { key: heuristic(origin), node: origin, hops: 0, label: 0 }]);
    while let Some(e) = heap.pop() {
        if done[e.node] {
            continue;
        }
        done[e.node] = true;
        if e.node == destination {
            let mut path = Vec::with_capacity(hops[destination]);
            let mut at = destination;
            while let Some(a) = pred[at] {
                path.push(a);
                at = net.arcs()[a].tail;
            }
            path.reverse();
            return Ok(path);
        }
        for (a, head) in net.neighbors(e.node)? {
            if done[head] {
                continue;
            }
            let cand = dist[e.node] + cost(a);
            if cand < dist[head] {
                dist[head] = cand;
                pred[head] = Some(a);
                hops[head] = hops[e.node] + 1;
                heap.push(HeapEntry { key: cand + heuristic(head), node: head, hops: hops[head], label: 0 });
            }
        }
    }
    Err(Error::Unreachable { origin, destination })
}

/// Shortest path at maximum speeds.
pub fn ds_route(net: &Network, origin: NodeId, destination: NodeId) -> Result<Vec<ArcId>> {
    let lb = lower_bounds(net, destination)?;
    if !lb.reachable(origin) {
        return Err(Error::Unreachable { origin, destination });
    }
    astar(net, origin, destination, |a| net.min_time(a), |k| lb.get(k))
}

/// Shortest path with every arc frozen at its speed in `state`.
pub fn dd_route(model: &Model, origin: NodeId, state: &CompositeState, destination: NodeId) -> Result<Vec<ArcId>> {
    let net = model.network();
    let lb = lower_bounds(net, destination)?;
    if !lb.reachable(origin) {
        return Err(Error::Unreachable { origin, destination });
    }
    astar(net, origin, destination, |a| net.arcs()[a].length_km / model.speed_at(a, state), |k| lb.get(k))
}

/// First arc of the frozen-speed shortest path; `None` at the destination.
pub fn dd_step(model: &Model, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
    if node == destination {
        return Ok(None);
    }
    Ok(dd_route(model, node, state, destination)?.first().copied())
}

/// Total time of a path at maximum speeds.
pub fn path_min_time(net: &Network, path: &[ArcId]) -> f64 {
    path.iter().map(|&a| net.min_time(a)).sum()
}
