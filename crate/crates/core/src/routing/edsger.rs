//! Best-first search with stochastic labels: each label carries the
//! accumulated expected time and the state distribution on arrival.

use std::collections::BinaryHeap;

use super::full::FullModel;
use super::search::{HeapEntry, LowerBounds};
use crate::error::{Error, Result};
use crate::network::{ArcId, Network, NodeId};
use crate::transit::{ExpmWorkspace, DEFAULT_TOL};

/// Path returned by the stochastic searches.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub path: Vec<ArcId>,
    /// Label of the destination (hours).
    pub expected: f64,
    /// Label at the head of each path arc.
    pub cumulative: Vec<f64>,
}

impl SearchResult {
    pub fn empty() -> Self {
        SearchResult { path: Vec::new(), expected: 0.0, cumulative: Vec::new() }
    }
}

pub(crate) struct Label<P> {
    pub d: f64,
    pub extra: P,
    pub pred: Option<(usize, ArcId)>,
    pub hops: usize,
}

pub(crate) fn trace<P>(labels: &[Label<P>], mut idx: usize) -> SearchResult {
    let expected = labels[idx].d;
    let mut path = Vec::new();
    let mut cumulative = Vec::new();
    while let Some((prev, a)) = labels[idx].pred {
        path.push(a);
        cumulative.push(labels[idx].d);
        idx = prev;
    }
    path.reverse();
    cumulative.reverse();
    SearchResult { path, expected, cumulative }
}

/// Generic label-setting skeleton; `relax(label, arc)` returns the new label
/// value and payload for the arc's head.
pub(crate) fn label_search<P>(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    lb: &LowerBounds,
    start: P,
    mut relax: impl FnMut(&Label<P>, ArcId) -> Result<(f64, P)>,
) -> Result<SearchResult> {
    net.node(origin)?;
    net.node(destination)?;
    if lb.destination != destination {
        return Err(Error::InvalidArgument("lower bounds belong to another destination".into()));
    }
    if origin == destination {
        return Ok(SearchResult::empty());
    }
    if !lb.reachable(origin) {
        return Err(Error::Unreachable { origin, destination });
    }
    let n = net.num_nodes();
    let mut best = vec![f64::INFINITY; n];
    let mut finalized = vec![false; n];
    let mut labels = vec![Label { d: 0.0, extra: start, pred: None, hops: 0 }];
    best[origin] = 0.0;
    let mut heap = BinaryHeap::from([HeapEntry { key: lb.get(origin), node: origin, hops: 0, label: 0 }]);
    while let Some(e) = heap.pop() {
        if finalized[e.node] {
            continue;
        }
        finalized[e.node] = true;
        if e.node == destination {
            return Ok(trace(&labels, e.label));
        }
        for (a, k) in net.neighbors(e.node)? {
            if finalized[k] || !lb.reachable(k) {
                continue;
            }
            let (d, extra) = relax(&labels[e.label], a)?;
            if d < best[k] {
                best[k] = d;
                let hops = labels[e.label].hops + 1;
                labels.push(Label { d, extra, pred: Some((e.label, a)), hops });
                heap.push(HeapEntry { key: d + lb.get(k), node: k, hops, label: labels.len() - 1 });
            }
        }
    }
    Err(Error::Unreachable { origin, destination })
}

/// Stochastic A*-style search over the full composite space from state
/// index `s0`.
pub fn edsger_sp(
    fm: &FullModel,
    origin: NodeId,
    s0: usize,
    destination: NodeId,
    lb: &LowerBounds,
) -> Result<SearchResult> {
    let n = fm.n_states();
    if s0 >= n {
        return Err(Error::InvalidArgument(format!("state index {s0} out of range")));
    }
    let mut p0 = vec![0.0; n];
    p0[s0] = 1.0;
    let mut ws = ExpmWorkspace::new(DEFAULT_TOL)?;
    label_search(fm.model().network(), origin, destination, lb, p0, |label, a| {
        let (mut p, dt) = fm.kernel(a).propagate(&mut ws, &label.extra)?;
        for x in &mut p {
            *x = x.max(0.0);
        }
        Ok((label.d + dt, p))
    })
}
