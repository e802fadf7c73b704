//! Routing decisions at decision epochs, and policy extraction.

use std::collections::HashMap;
use std::ops::Deref;
use std::sync::{Arc, Mutex};

use super::edsger::edsger_sp;
use super::full::{FullModel, PolicyTable};
use super::search::{dd_step, ds_route, lower_bounds, LowerBounds};
use super::star::StarEngine;
use crate::background::{CompositeState, Model, StateSpace};
use crate::error::{Error, Result};
use crate::network::{ArcId, Network, NodeId};
use crate::par;

/// Chooses the next arc at a node given the observed background state
/// (in arc order). Returns `None` at the destination.
pub trait Oracle: Sync {
    fn name(&self) -> &str;
    fn next_arc(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>>;
}

/// Lower bounds per destination.
#[derive(Debug, Default)]
pub struct BoundsCache {
    map: Mutex<HashMap<NodeId, Arc<LowerBounds>>>,
}

impl BoundsCache {
    pub fn get(&self, net: &Network, destination: NodeId) -> Result<Arc<LowerBounds>> {
        if let Some(lb) = self.map.lock().expect("bounds cache").get(&destination) {
            return Ok(Arc::clone(lb));
        }
        let lb = Arc::new(lower_bounds(net, destination)?);
        self.map.lock().expect("bounds cache").insert(destination, Arc::clone(&lb));
        Ok(lb)
    }
}

pub(crate) type DecisionKey = (NodeId, NodeId, CompositeState);

/// Memo of decisions for deterministic oracles.
#[derive(Debug, Default)]
pub(crate) struct DecisionCache {
    map: Mutex<HashMap<DecisionKey, Option<ArcId>>>,
}

impl DecisionCache {
    pub(crate) fn get_or(&self, key: DecisionKey, f: impl FnOnce() -> Result<Option<ArcId>>) -> Result<Option<ArcId>> {
        if let Some(&a) = self.map.lock().expect("decision cache").get(&key) {
            return Ok(a);
        }
        let a = f()?;
        self.map.lock().expect("decision cache").insert(key, a);
        Ok(a)
    }
}

/// Lookup in a precomputed policy table.
pub struct TableOracle<'a> {
    name: String,
    space: &'a StateSpace,
    table: PolicyTable,
}

impl<'a> TableOracle<'a> {
    pub fn new(name: impl Into<String>, space: &'a StateSpace, table: PolicyTable) -> Self {
        TableOracle { name: name.into(), space, table }
    }

    pub fn table(&self) -> &PolicyTable {
        &self.table
    }
}

impl Oracle for TableOracle<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn next_arc(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        if node == destination {
            return Ok(None);
        }
        if destination != self.table.destination {
            return Err(Error::InvalidArgument("policy table belongs to another destination".into()));
        }
        let s = self
            .space
            .index_of(state)
            .ok_or_else(|| Error::InvalidArgument(format!("state {state:?} is not in the policy's space")))?;
        self.table.get(node, s).map(Some).ok_or(Error::Unreachable { origin: node, destination })
    }
}

/// Re-runs the full-space stochastic search at every epoch.
pub struct EdsgerOracle<'a, 'm> {
    fm: &'a FullModel<'m>,
    bounds: BoundsCache,
    cache: DecisionCache,
}

impl<'a, 'm> EdsgerOracle<'a, 'm> {
    pub fn new(fm: &'a FullModel<'m>) -> Self {
        EdsgerOracle { fm, bounds: BoundsCache::default(), cache: DecisionCache::default() }
    }
}

impl Oracle for EdsgerOracle<'_, '_> {
    fn name(&self) -> &str {
        "edsger"
    }

    fn next_arc(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        if node == destination {
            return Ok(None);
        }
        self.cache.get_or((node, destination, state.clone()), || {
            let lb = self.bounds.get(self.fm.model().network(), destination)?;
            let s0 = self.fm.state_index(state)?;
            Ok(edsger_sp(self.fm, node, s0, destination, &lb)?.path.first().copied())
        })
    }
}

/// Re-runs the reduced-space search at every epoch.
pub struct StarOracle<M> {
    engine: StarEngine<M>,
    bounds: BoundsCache,
    cache: DecisionCache,
}

impl<M: Deref<Target = Model>> StarOracle<M> {
    pub fn new(engine: StarEngine<M>) -> Self {
        StarOracle { engine, bounds: BoundsCache::default(), cache: DecisionCache::default() }
    }

    pub fn engine(&self) -> &StarEngine<M> {
        &self.engine
    }
}

impl<M: Deref<Target = Model> + Sync> Oracle for StarOracle<M> {
    fn name(&self) -> &str {
        "edsger-star"
    }

    fn next_arc(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        if node == destination {
            return Ok(None);
        }
        self.cache.get_or((node, destination, state.clone()), || {
            let lb = self.bounds.get(self.engine.model().network(), destination)?;
            Ok(self.engine.shortest_path(node, state, destination, &lb)?.path.first().copied())
        })
    }
}

/// Follows the maximum-speed shortest path.
pub struct DsOracle<'a> {
    net: &'a Network,
    cache: Mutex<HashMap<(NodeId, NodeId), Option<ArcId>>>,
}

impl<'a> DsOracle<'a> {
    pub fn new(net: &'a Network) -> Self {
        DsOracle { net, cache: Mutex::new(HashMap::new()) }
    }
}

impl Oracle for DsOracle<'_> {
    fn name(&self) -> &str {
        "ds"
    }

    fn next_arc(&self, node: NodeId, _state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        if node == destination {
            return Ok(None);
        }
        if let Some(&a) = self.cache.lock().expect("ds cache").get(&(node, destination)) {
            return Ok(a);
        }
        let a = ds_route(self.net, node, destination)?.first().copied();
        self.cache.lock().expect("ds cache").insert((node, destination), a);
        Ok(a)
    }
}

/// Shortest path on the currently observed speeds.
pub struct DdOracle<'a> {
    model: &'a Model,
}

impl<'a> DdOracle<'a> {
    pub fn new(model: &'a Model) -> Self {
        DdOracle { model }
    }
}

impl Oracle for DdOracle<'_> {
    fn name(&self) -> &str {
        "dd"
    }

    fn next_arc(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        dd_step(self.model, node, state, destination)
    }
}

/// Runs `oracle` from every (node, state) of `fm` and stores first arcs.
/// Nodes that cannot reach the destination are left empty.
pub fn extract_policy(fm: &FullModel, oracle: &dyn Oracle, destination: NodeId) -> Result<PolicyTable> {
    let net = fm.model().network();
    let lb = lower_bounds(net, destination)?;
    let n = fm.n_states();
    let mut table = PolicyTable::new(destination, net.num_nodes(), n);
    let nodes: Vec<NodeId> = (0..net.num_nodes()).filter(|&k| k != destination && lb.reachable(k)).collect();
    let rows = par::map_indexed(nodes.len(), |i| -> Result<Vec<Option<ArcId>>> {
        (0..n).map(|s| oracle.next_arc(nodes[i], &fm.space().state(s), destination)).collect()
    });
    for (i, row) in rows.into_iter().enumerate() {
        for (s, a) in row?.into_iter().enumerate() {
            table.set(nodes[i], s, a);
        }
    }
    Ok(table)
}

/// Policy that always takes the next arc of a fixed path.
pub fn fixed_path_policy(fm: &FullModel, origin: NodeId, path: &[ArcId]) -> Result<PolicyTable> {
    let net = fm.model().network();
    if !net.is_path_from(origin, path) || path.is_empty() {
        return Err(Error::InvalidArgument("not a path from the origin".into()));
    }
    let destination = net.path_end(origin, path);
    let mut table = PolicyTable::new(destination, net.num_nodes(), fm.n_states());
    for &a in path {
        let tail = net.arcs()[a].tail;
        for s in 0..fm.n_states() {
            table.set(tail, s, Some(a));
        }
    }
    Ok(table)
}
