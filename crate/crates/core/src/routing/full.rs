//! The enumerated composite model shared by the exact methods.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::background::{CompositeState, Model, StateSpace};
use crate::error::{Error, Result};
use crate::network::{ArcId, NodeId};
use crate::sparse::CsrMatrix;
use crate::transit::ArcKernel;

/// Full composite state space, its generator and one traversal kernel per arc.
#[derive(Debug, Clone)]
pub struct FullModel<'m> {
    model: &'m Model,
    space: StateSpace,
    q: Arc<CsrMatrix>,
    kernels: Vec<ArcKernel>,
}

impl<'m> FullModel<'m> {
    pub fn new(model: &'m Model) -> Result<Self> {
        let space = model.full_space()?;
        Self::with_space(model, space)
    }

    /// Uses a given (for instance pruned) space over all arcs.
    pub fn with_space(model: &'m Model, space: StateSpace) -> Result<Self> {
        if space.num_coords() != model.network().num_arcs() {
            return Err(Error::InvalidArgument("space does not cover every arc".into()));
        }
        let q = Arc::new(model.generator(&space));
        let kernels = model
            .network()
            .arcs()
            .iter()
            .map(|arc| {
                let speeds = model.speeds_on(&space, arc.id);
                ArcKernel::new(Arc::clone(&q), &speeds, arc.length_km, arc.id)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FullModel { model, space, q, kernels })
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn generator(&self) -> &CsrMatrix {
        &self.q
    }

    pub fn kernel(&self, a: ArcId) -> &ArcKernel {
        &self.kernels[a]
    }

    pub fn n_states(&self) -> usize {
        self.space.len()
    }

    /// Index of a full state given in arc order.
    pub fn state_index(&self, s: &CompositeState) -> Result<usize> {
        self.space.index_of(s).ok_or_else(|| Error::InvalidArgument(format!("state {s:?} is not in the state space")))
    }
}

/// Arc chosen in each (node, state); `None` at the destination or where the
/// destination cannot be reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub destination: NodeId,
    pub n_states: usize,
    arcs: Vec<Option<ArcId>>,
}

impl PolicyTable {
    pub fn new(destination: NodeId, n_nodes: usize, n_states: usize) -> Self {
        PolicyTable { destination, n_states, arcs: vec![None; n_nodes * n_states] }
    }

    pub fn get(&self, node: NodeId, state: usize) -> Option<ArcId> {
        self.arcs[node * self.n_states + state]
    }

    pub fn set(&mut self, node: NodeId, state: usize, arc: Option<ArcId>) {
        self.arcs[node * self.n_states + state] = arc;
    }

    pub fn n_nodes(&self) -> usize {
        self.arcs.len() / self.n_states.max(1)
    }
}

/// Expected remaining travel time (hours) per (node, state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub n_states: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(n_nodes: usize, n_states: usize, fill: f64) -> Self {
        ValueTable { n_states, values: vec![fill; n_nodes * n_states] }
    }

    pub fn get(&self, node: NodeId, state: usize) -> f64 {
        self.values[node * self.n_states + state]
    }

    pub fn set(&mut self, node: NodeId, state: usize, v: f64) {
        self.values[node * self.n_states + state] = v;
    }

    pub fn node(&self, node: NodeId) -> &[f64] {
        &self.values[node * self.n_states..(node + 1) * self.n_states]
    }

    pub fn node_mut(&mut self, node: NodeId) -> &mut [f64] {
        &mut self.values[node * self.n_states..(node + 1) * self.n_states]
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.n_states.max(1)
    }
}
