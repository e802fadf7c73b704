//! Subnetwork extraction around the k shortest paths.

use std::collections::{BTreeSet, HashMap};
use std::ops::Deref;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::yen::{yen_excluding, yen_k_shortest, RankedPath};
use crate::background::{Background, CompositeState, Model};
use crate::error::{Error, Result};
use crate::network::{self, ArcId, Network, NodeId};
use crate::routing::{lower_bounds, DecisionCache, LowerBounds, Oracle, StarEngine};

/// Paths found by the reduction and the arcs they span.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReduction {
    pub paths: Vec<RankedPath>,
    /// Arcs on every one of the `m` shortest paths.
    pub mandatory: Vec<ArcId>,
    /// Detour paths found with one mandatory arc removed.
    pub detours: Vec<(ArcId, Vec<RankedPath>)>,
    /// Mandatory arcs whose removal disconnects the pair.
    pub unreachable_rounds: Vec<ArcId>,
    /// Sorted union of all path arcs.
    pub kept_arcs: Vec<ArcId>,
    /// Sorted endpoints of the kept arcs.
    pub kept_nodes: Vec<NodeId>,
}

/// Union of the `m` shortest paths, augmented by `l` detours around every
/// arc that all of them share.
pub fn reduce_network(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    m: usize,
    l: usize,
) -> Result<NetworkReduction> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let paths = yen_k_shortest(net, origin, destination, m)?;
    let mut kept: BTreeSet<ArcId> = paths.iter().flat_map(|p| p.arcs.iter().copied()).collect();
    let mandatory: Vec<ArcId> = paths[0]
        .arcs
        .iter()
        .copied()
        .filter(|a| paths.iter().all(|p| p.arcs.contains(a)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let rounds = crate::par::map_indexed(mandatory.len(), |i| {
        let mut removed = vec![false; net.num_arcs()];
        removed[mandatory[i]] = true;
        yen_excluding(net, origin, destination, l, &removed)
    });
    let mut detours = Vec::new();
    let mut unreachable_rounds = Vec::new();
    for (&a, round) in mandatory.iter().zip(rounds) {
        match round {
            Ok(found) => {
                kept.extend(found.iter().flat_map(|p| p.arcs.iter().copied()));
                detours.push((a, found));
            }
            Err(Error::Unreachable { .. }) => {
                log::info!("no detour exists around arc {a}");
                unreachable_rounds.push(a);
            }
            Err(e) => return Err(e),
        }
    }
    let kept_arcs: Vec<ArcId> = kept.into_iter().collect();
    let kept_nodes: Vec<NodeId> = kept_arcs
        .iter()
        .flat_map(|&a| [net.arcs()[a].tail, net.arcs()[a].head])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(NetworkReduction { paths, mandatory, detours, unreachable_rounds, kept_arcs, kept_nodes })
}

/// Summary of a reduction, in the ids of the original network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub origin: NodeId,
    pub destination: NodeId,
    pub m: usize,
    pub l: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub kept_arcs: Vec<ArcId>,
    pub kept_nodes: Vec<NodeId>,
    /// Arcs kept only for their background state.
    pub shadow_arcs: Vec<ArcId>,
    /// Arcs whose chains were omitted.
    pub dropped_chains: Vec<ArcId>,
    pub unreachable_rounds: Vec<ArcId>,
    pub states_before: f64,
    pub states_after: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states_pruned: Option<usize>,
}

/// A model restricted to a reduced subnetwork. Arcs outside the paths but
/// inside their speed neighbourhoods are kept as non-routable arcs so that
/// speeds on the kept arcs are unchanged.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub model: Model,
    /// Reduced arc id → original arc id.
    pub arc_map: Vec<ArcId>,
    /// Reduced node id → original node id.
    pub node_map: Vec<NodeId>,
    node_index: HashMap<NodeId, NodeId>,
    pub report: ReductionReport,
}

impl ReducedModel {
    /// `radius` widens the retained neighbourhoods beyond the velocity radius
    /// (for reduced-space searches with a larger radius).
    pub fn build(
        model: &Model,
        origin: NodeId,
        destination: NodeId,
        m: usize,
        l: usize,
        radius: Option<usize>,
    ) -> Result<Self> {
        let net = model.network();
        let red = reduce_network(net, origin, destination, m, l)?;
        let radius = radius.unwrap_or(model.radius()).max(model.radius());
        let mut included: BTreeSet<ArcId> = BTreeSet::new();
        for &a in &red.kept_arcs {
            included.extend(model.neighborhood_at(a, radius)?);
        }
        let kept_set: BTreeSet<ArcId> = red.kept_arcs.iter().copied().collect();
        let arc_map: Vec<ArcId> = included.iter().copied().collect();
        let node_map: Vec<NodeId> = arc_map
            .iter()
            .flat_map(|&a| [net.arcs()[a].tail, net.arcs()[a].head])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let node_index: HashMap<NodeId, NodeId> = node_map.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let arc_index: HashMap<ArcId, ArcId> = arc_map.iter().enumerate().map(|(i, &a)| (a, i)).collect();

        let nodes =
            node_map.iter().enumerate().map(|(i, &k)| network::Node { id: i, ..net.nodes()[k].clone() }).collect();
        let arcs = arc_map
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let arc = &net.arcs()[a];
                network::Arc {
                    id: i,
                    tail: node_index[&arc.tail],
                    head: node_index[&arc.head],
                    routable: arc.routable && kept_set.contains(&a),
                    ..arc.clone()
                }
            })
            .collect();
        let reduced_net = Network::new(nodes, arcs)?;

        let background = restrict_background(model.background(), &arc_map, &arc_index, &kept_set)?;
        let reduced = Model::new(reduced_net, background)?.with_state_limit(model.state_limit());

        let report = ReductionReport {
            origin,
            destination,
            m,
            l,
            epsilon: None,
            horizon: None,
            kept_arcs: red.kept_arcs.clone(),
            kept_nodes: red.kept_nodes.clone(),
            shadow_arcs: arc_map.iter().copied().filter(|a| !kept_set.contains(a)).collect(),
            dropped_chains: (0..net.num_arcs()).filter(|a| !included.contains(a)).collect(),
            unreachable_rounds: red.unreachable_rounds,
            states_before: model.count_full_states(),
            states_after: reduced.count_full_states(),
            states_pruned: None,
        };
        Ok(ReducedModel { model: reduced, arc_map, node_map, node_index, report })
    }

    /// Reduced id of an original node.
    pub fn node(&self, original: NodeId) -> Option<NodeId> {
        self.node_index.get(&original).copied()
    }

    pub fn original_arc(&self, a: ArcId) -> ArcId {
        self.arc_map[a]
    }

    pub fn original_node(&self, k: NodeId) -> NodeId {
        self.node_map[k]
    }

    /// Restricts a state of the original model to the reduced arcs.
    pub fn project_state(&self, s: &CompositeState) -> CompositeState {
        CompositeState { global: s.global, arcs: self.arc_map.iter().map(|&a| s.arcs[a]).collect() }
    }
}

fn restrict_background(
    bg: &Background,
    arc_map: &[ArcId],
    arc_index: &HashMap<ArcId, ArcId>,
    kept: &BTreeSet<ArcId>,
) -> Result<Background> {
    let mut out = bg.clone();
    out.chains.retain(|c| arc_index.contains_key(&c.arc));
    if let Some(g) = &mut out.global {
        g.overrides.retain(|o| arc_index.contains_key(&o.arc));
    }
    // Shadow arcs are never driven on, so their own rules are dropped; rules
    // naming arcs outside the reduced network cannot affect kept arcs.
    out.velocity.rules.retain(|r| {
        r.arc.is_none_or(|a| kept.contains(&a))
            && r.explicit.as_ref().is_none_or(|e| e.arcs.iter().all(|(b, _)| arc_index.contains_key(b)))
    });
    if !out.velocity.defaults.is_empty() {
        out.velocity.defaults = arc_map.iter().map(|&a| out.velocity.defaults[a]).collect();
    }
    out.remap(|a| {
        arc_index
            .get(&a)
            .copied()
            .ok_or_else(|| Error::InvalidBackground(format!("arc {a} missing from reduced network")))
    })
}

/// Reduced model, search engine and lower bounds for one (node, destination).
pub struct ReducedQuery {
    pub reduced: ReducedModel,
    pub engine: StarEngine<Arc<Model>>,
    pub bounds: LowerBounds,
}

/// Reduced-space search re-run at every epoch on a subnetwork rebuilt for
/// the current node, with subnetworks cached per (node, destination).
pub struct ReducedStarOracle<M> {
    model: M,
    m: usize,
    l: usize,
    radius: Option<usize>,
    queries: Mutex<HashMap<(NodeId, NodeId), Arc<ReducedQuery>>>,
    cache: DecisionCache,
}

impl<M: Deref<Target = Model>> ReducedStarOracle<M> {
    pub fn new(model: M, m: usize, l: usize, radius: Option<usize>) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::InvalidArgument("m and l must be at least 1".into()));
        }
        Ok(ReducedStarOracle { model, m, l, radius, queries: Mutex::default(), cache: DecisionCache::default() })
    }

    /// Reduced model for a query starting at `node`.
    pub fn query(&self, node: NodeId, destination: NodeId) -> Result<Arc<ReducedQuery>> {
        if let Some(q) = self.queries.lock().expect("reduced models").get(&(node, destination)) {
            return Ok(Arc::clone(q));
        }
        let reduced = ReducedModel::build(&self.model, node, destination, self.m, self.l, self.radius)?;
        let d = reduced.node(destination).expect("destination is kept");
        let bounds = lower_bounds(reduced.model.network(), d)?;
        let engine = StarEngine::new(Arc::new(reduced.model.clone()), self.radius)?;
        let q = Arc::new(ReducedQuery { reduced, engine, bounds });
        self.queries.lock().expect("reduced models").insert((node, destination), Arc::clone(&q));
        Ok(q)
    }

    fn decide(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        let q = self.query(node, destination)?;
        let rm = &q.reduced;
        let (o, d) = (rm.node(node).expect("origin is kept"), rm.node(destination).expect("destination is kept"));
        let found = q.engine.shortest_path(o, &rm.project_state(state), d, &q.bounds)?;
        Ok(found.path.first().map(|&a| rm.original_arc(a)))
    }
}

impl<M: Deref<Target = Model> + Sync> Oracle for ReducedStarOracle<M> {
    fn name(&self) -> &str {
        "reduced-edsger-star"
    }

    fn next_arc(&self, node: NodeId, state: &CompositeState, destination: NodeId) -> Result<Option<ArcId>> {
        if node == destination {
            return Ok(None);
        }
        self.cache.get_or((node, destination, state.clone()), || self.decide(node, state, destination))
    }
}
