//! Driving a policy along a sampled background path.

use std::time::{Duration, Instant};

use super::oracle::Oracle;
use crate::background::CompositeState;
use crate::error::{Error, Result};
use crate::network::{ArcId, NodeId};
use crate::simulator::{realized_arc_time, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub time: f64,
    pub node: NodeId,
    pub state: CompositeState,
}

#[derive(Debug, Clone)]
pub struct DriveRecord {
    pub arcs: Vec<ArcId>,
    pub epochs: Vec<Epoch>,
    pub arrival: f64,
    /// Wall-clock time spent in oracle calls.
    pub decision_time: Duration,
}

impl DriveRecord {
    pub fn travel_time(&self) -> f64 {
        self.arrival - self.epochs.first().map_or(0.0, |e| e.time)
    }
}

/// Alternates oracle decisions and realized traversals until the
/// destination is reached. Fails after 10·|N| decision epochs.
pub fn drive(
    oracle: &dyn Oracle,
    traj: &mut Trajectory<'_>,
    origin: NodeId,
    destination: NodeId,
    t0: f64,
) -> Result<DriveRecord> {
    let net = traj.model().network();
    net.node(origin)?;
    net.node(destination)?;
    let limit = 10 * net.num_nodes();
    let mut t = t0;
    let mut node = origin;
    let mut arcs = Vec::new();
    let mut epochs = Vec::new();
    let mut decision_time = Duration::ZERO;
    loop {
        let state = traj.state_at(t).clone();
        epochs.push(Epoch { time: t, node, state: state.clone() });
        if node == destination {
            return Ok(DriveRecord { arcs, epochs, arrival: t, decision_time });
        }
        if arcs.len() >= limit {
            return Err(Error::StepLimit(limit));
        }
        let start = Instant::now();
        let next = oracle.next_arc(node, &state, destination)?;
        decision_time += start.elapsed();
        let a = next.ok_or(Error::Unreachable { origin: node, destination })?;
        let arc = net.arc(a)?;
        if arc.tail != node {
            return Err(Error::InvalidArgument(format!("oracle chose arc {a} not leaving node {node}")));
        }
        t += realized_arc_time(traj, a, t);
        node = arc.head;
        arcs.push(a);
    }
}
