//! Best achievable arrival time for a known sample path.

use std::collections::BinaryHeap;

use super::trajectory::{realized_arc_time, Trajectory};
use crate::error::{Error, Result};
use crate::network::NodeId;
use crate::routing::HeapEntry;

/// Earliest arrival at `destination` leaving `origin` at `t_start`, with
/// full knowledge of the sample path. Label setting is exact because arc
/// traversals are first-in first-out.
pub fn optimal_realized(traj: &mut Trajectory<'_>, origin: NodeId, destination: NodeId, t_start: f64) -> Result<f64> {
    let net = traj.model().network();
    net.node(origin)?;
    net.node(destination)?;
    let n = net.num_nodes();
    let mut arrival = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    arrival[origin] = t_start;
    let mut heap = BinaryHeap::from([HeapEntry { key: t_start, node: origin, hops: 0, label: 0 }]);
    while let Some(e) = heap.pop() {
        if done[e.node] {
            continue;
        }
        done[e.node] = true;
        if e.node == destination {
            return Ok(e.key);
        }
        for (a, head) in net.neighbors(e.node)? {
            if done[head] {
                continue;
            }
            let t = e.key + realized_arc_time(traj, a, e.key);
            if t < arrival[head] {
                arrival[head] = t;
                heap.push(HeapEntry { key: t, node: head, hops: 0, label: 0 });
            }
        }
    }
    Err(Error::Unreachable { origin, destination })
}
