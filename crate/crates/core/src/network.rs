//! Directed road multigraph with arc lengths and maximum speeds.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    #[serde(default)]
    pub label: String,
    /// (lat, lon), display only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub id: ArcId,
    pub tail: NodeId,
    pub head: NodeId,
    pub length_km: f64,
    pub max_speed_kmh: f64,
    /// Non-routable arcs carry background state (they influence the speeds
    /// of nearby arcs) but are never offered as a move. Reduced models use
    /// them to keep neighbourhoods intact.
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub routable: bool,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
}

/// Immutable after construction. Node and arc ids are dense and 0-based;
/// the ids used in the source file are kept for lookups.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<ArcId>>,
    in_adj: Vec<Vec<ArcId>>,
    node_source: HashMap<usize, NodeId>,
    arc_source: HashMap<usize, ArcId>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.arcs == other.arcs
    }
}

impl Network {
    /// Validates and normalizes ids. Nodes and arcs are renumbered in
    /// ascending order of their given ids.
    pub fn new(mut nodes: Vec<Node>, mut arcs: Vec<Arc>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        arcs.sort_by_key(|a| a.id);

        let mut node_source = HashMap::with_capacity(nodes.len());
        for (dense, node) in nodes.iter_mut().enumerate() {
            if node_source.insert(node.id, dense).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node id {}", node.id)));
            }
            node.id = dense;
        }

        let mut arc_source = HashMap::with_capacity(arcs.len());
        for (dense, arc) in arcs.iter_mut().enumerate() {
            let src = arc.id;
            if arc_source.insert(src, dense).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate arc id {src}")));
            }
            if !(arc.length_km.is_finite() && arc.length_km > 0.0) {
                return Err(Error::InvalidNetwork(format!("arc {src} has non-positive length {}", arc.length_km)));
            }
            if !(arc.max_speed_kmh.is_finite() && arc.max_speed_kmh > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "arc {src} has non-positive max speed {}",
                    arc.max_speed_kmh
                )));
            }
            let tail = *node_source.get(&arc.tail).ok_or_else(|| {
                Error::InvalidNetwork(format!("arc {src} references undefined tail node {}", arc.tail))
            })?;
            let head = *node_source.get(&arc.head).ok_or_else(|| {
                Error::InvalidNetwork(format!("arc {src} references undefined head node {}", arc.head))
            })?;
            if tail == head {
                return Err(Error::InvalidNetwork(format!("arc {src} is a self-loop")));
            }
            arc.id = dense;
            arc.tail = tail;
            arc.head = head;
        }

        let mut out_adj = vec![Vec::new(); nodes.len()];
        let mut in_adj = vec![Vec::new(); nodes.len()];
        for arc in &arcs {
            out_adj[arc.tail].push(arc.id);
            in_adj[arc.head].push(arc.id);
        }

        Ok(Network { nodes, arcs, out_adj, in_adj, node_source, arc_source })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("network file: {e}")))?;
        Network::new(file.nodes, file.arcs)
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile { nodes: self.nodes.clone(), arcs: self.arcs.clone() };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Network::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn node(&self, k: NodeId) -> Result<&Node> {
        self.nodes.get(k).ok_or(Error::UnknownNode(k))
    }

    pub fn arc(&self, a: ArcId) -> Result<&Arc> {
        self.arcs.get(a).ok_or(Error::UnknownArc(a))
    }

    /// Routable arcs leaving `k` with their heads, in arc-id order.
    pub fn neighbors(&self, k: NodeId) -> Result<Vec<(ArcId, NodeId)>> {
        let out = self.out_adj.get(k).ok_or(Error::UnknownNode(k))?;
        Ok(out.iter().filter(|&&a| self.arcs[a].routable).map(|&a| (a, self.arcs[a].head)).collect())
    }

    /// All arcs leaving `k`, routable or not.
    pub fn out_arcs(&self, k: NodeId) -> &[ArcId] {
        &self.out_adj[k]
    }

    /// All arcs entering `k`, routable or not.
    pub fn in_arcs(&self, k: NodeId) -> &[ArcId] {
        &self.in_adj[k]
    }

    /// Dense id of the node with the given file id.
    pub fn node_by_source_id(&self, id: usize) -> Option<NodeId> {
        self.node_source.get(&id).copied()
    }

    /// Dense id of the arc with the given file id.
    pub fn arc_by_source_id(&self, id: usize) -> Option<ArcId> {
        self.arc_source.get(&id).copied()
    }

    /// Resolves a node by dense id, file id or label (in that order).
    pub fn resolve_node(&self, key: &str) -> Option<NodeId> {
        if let Ok(id) = key.parse::<usize>() {
            if let Some(k) = self.node_by_source_id(id) {
                return Some(k);
            }
        }
        self.nodes.iter().position(|n| n.label == key)
    }

    /// Travel time of an arc at its maximum speed, in hours.
    pub fn min_time(&self, a: ArcId) -> f64 {
        self.arcs[a].length_km / self.arcs[a].max_speed_kmh
    }

    pub fn path_length_km(&self, path: &[ArcId]) -> f64 {
        path.iter().map(|&a| self.arcs[a].length_km).sum()
    }

    /// Checks that `path` is a connected arc sequence from `origin`.
    pub fn is_path_from(&self, origin: NodeId, path: &[ArcId]) -> bool {
        let mut at = origin;
        for &a in path {
            match self.arcs.get(a) {
                Some(arc) if arc.tail == at => at = arc.head,
                _ => return false,
            }
        }
        true
    }

    /// Node reached after following `path` from its first tail.
    pub fn path_end(&self, origin: NodeId, path: &[ArcId]) -> NodeId {
        path.last().map_or(origin, |&a| self.arcs[a].head)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(id: usize, tail: usize, head: usize, len: f64) -> Arc {
        Arc { id, tail, head, length_km: len, max_speed_kmh: 100.0, routable: true }
    }

    fn node(id: usize) -> Node {
        Node { id, label: format!("n{id}"), coords: None }
    }

    #[test]
    fn minimal_instance() {
        let net = Network::from_json(
            r#"{"nodes":[{"id":0,"label":"A"},{"id":1,"label":"B"}],
                "arcs":[{"id":0,"tail":0,"head":1,"length_km":60.0,"max_speed_kmh":120.0}]}"#,
        )
        .unwrap();
        assert_eq!(net.num_nodes(), 2);
        assert_eq!(net.num_arcs(), 1);
        assert_eq!(net.neighbors(1).unwrap(), vec![]);
    }

    #[test]
    fn ids_are_normalized() {
        let net = Network::new(vec![node(10), node(4)], vec![arc(7, 4, 10, 1.0), arc(3, 10, 4, 2.0)]).unwrap();
        assert_eq!(net.arc(0).unwrap().length_km, 2.0);
        assert_eq!(net.arc(0).unwrap().tail, 1);
        assert_eq!(net.node_by_source_id(10), Some(1));
        assert_eq!(net.arc_by_source_id(7), Some(1));
        assert_eq!(net.resolve_node("n4"), Some(0));
    }

    #[test]
    fn validation_errors_name_the_entity() {
        let err = Network::new(vec![node(0)], vec![arc(5, 0, 9, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("arc 5"), "{err}");
        let err = Network::new(vec![node(0), node(1)], vec![arc(2, 0, 1, -1.0)]).unwrap_err();
        assert!(err.to_string().contains("arc 2"), "{err}");
        let err = Network::new(vec![node(0), node(0)], vec![]).unwrap_err();
        assert!(err.to_string().contains("duplicate node id 0"), "{err}");
        let err = Network::new(vec![node(0)], vec![arc(0, 0, 0, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
        assert!(matches!(Network::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_node() {
        let net = Network::new(vec![node(0)], vec![]).unwrap();
        assert!(matches!(net.neighbors(3), Err(Error::UnknownNode(3))));
    }

    #[test]
    fn non_routable_arcs_are_not_neighbors() {
        let mut a = arc(1, 0, 1, 1.0);
        a.routable = false;
        let net = Network::new(vec![node(0), node(1)], vec![arc(0, 0, 1, 1.0), a]).unwrap();
        assert_eq!(net.neighbors(0).unwrap(), vec![(0, 1)]);
        assert_eq!(net.out_arcs(0), &[0, 1]);
        let again = Network::from_json(&net.to_json()).unwrap();
        assert_eq!(again, net);
    }
}
