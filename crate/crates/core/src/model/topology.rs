//! Network graph: switches and hosts joined by undirected links.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::io::FORMAT_VERSION;

/// Identifier of a switch or host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Position of an edge in [`Topology::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Switch,
    Host,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

/// An undirected link.
///
/// `delay_ns` is the per-link delay bound used by the path layout. The residual
/// bandwidth is bookkeeping owned by the layout engine and is never serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    a: NodeId,
    b: NodeId,
    bandwidth_bps: u64,
    delay_ns: u64,
    residual_bps: u64,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, bandwidth_bps: u64, delay_ns: u64) -> Self {
        Self {
            a,
            b,
            bandwidth_bps,
            delay_ns,
            residual_bps: bandwidth_bps,
        }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.a, self.b)
    }

    pub fn bandwidth_bps(&self) -> u64 {
        self.bandwidth_bps
    }

    pub fn delay_ns(&self) -> u64 {
        self.delay_ns
    }

    pub fn residual_bps(&self) -> u64 {
        self.residual_bps
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.a == n || self.b == n
    }

    /// The endpoint opposite to `n`, if `n` is an endpoint.
    pub fn other(&self, n: NodeId) -> Option<NodeId> {
        if self.a == n {
            Some(self.b)
        } else if self.b == n {
            Some(self.a)
        } else {
            None
        }
    }
}

fn pair_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A simple undirected graph of switches and hosts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyFile", into = "TopologyFile")]
pub struct Topology {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    queues_per_port: u32,
    index: HashMap<NodeId, usize>,
    adjacency: Vec<Vec<EdgeId>>,
    pairs: HashMap<(NodeId, NodeId), EdgeId>,
}

pub const DEFAULT_QUEUES_PER_PORT: u32 = 8;

impl Topology {
    pub fn new(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        queues_per_port: u32,
    ) -> Result<Self, ModelError> {
        if queues_per_port == 0 {
            return Err(ModelError::ZeroQueues);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (pos, node) in nodes.iter().enumerate() {
            if index.insert(node.id, pos).is_some() {
                return Err(ModelError::DuplicateNode(node.id));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut pairs = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            let (a, b) = e.endpoints();
            let ia = *index.get(&a).ok_or(ModelError::UnknownNode(a))?;
            let ib = *index.get(&b).ok_or(ModelError::UnknownNode(b))?;
            if a == b {
                return Err(ModelError::SelfLoop(a));
            }
            if e.bandwidth_bps == 0 {
                return Err(ModelError::ZeroBandwidth(a, b));
            }
            if e.delay_ns == 0 {
                return Err(ModelError::ZeroDelay(a, b));
            }
            if e.residual_bps > e.bandwidth_bps {
                return Err(ModelError::InvalidParams(format!(
                    "edge {a}-{b}: residual exceeds bandwidth"
                )));
            }
            if pairs.insert(pair_key(a, b), EdgeId(i)).is_some() {
                return Err(ModelError::ParallelEdge(a, b));
            }
            adjacency[ia].push(EdgeId(i));
            adjacency[ib].push(EdgeId(i));
        }
        Ok(Self {
            nodes,
            edges,
            queues_per_port,
            index,
            adjacency,
            pairs,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn queues_per_port(&self) -> u32 {
        self.queues_per_port
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.index.contains_key(&n)
    }

    /// Dense position of `n` in [`Topology::nodes`].
    pub fn position(&self, n: NodeId) -> Option<usize> {
        self.index.get(&n).copied()
    }

    pub fn kind(&self, n: NodeId) -> Option<NodeKind> {
        self.position(n).map(|p| self.nodes[p].kind)
    }

    pub fn is_host(&self, n: NodeId) -> bool {
        self.kind(n) == Some(NodeKind::Host)
    }

    pub fn is_switch(&self, n: NodeId) -> bool {
        self.kind(n) == Some(NodeKind::Switch)
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.pairs.get(&pair_key(a, b)).copied()
    }

    /// Incident edges of `n` with the neighbor across each of them.
    pub fn neighbors(&self, n: NodeId) -> impl Iterator<Item = (NodeId, EdgeId)> + '_ {
        let adj = self
            .position(n)
            .map(|p| self.adjacency[p].as_slice())
            .unwrap_or(&[]);
        adj.iter().map(move |&e| {
            let other = self.edges[e.0].other(n).expect("adjacency is consistent");
            (other, e)
        })
    }

    pub fn switches(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Switch)
            .map(|n| n.id)
    }

    pub fn hosts(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Host)
            .map(|n| n.id)
    }

    /// The switch a host hangs off, when the host has exactly one switch neighbor.
    pub fn attachment(&self, host: NodeId) -> Option<NodeId> {
        if !self.is_host(host) {
            return None;
        }
        let mut sw = self.neighbors(host).filter(|(n, _)| self.is_switch(*n));
        match (sw.next(), sw.next()) {
            (Some((s, _)), None) => Some(s),
            _ => None,
        }
    }

    pub fn min_bandwidth_bps(&self) -> Option<u64> {
        self.edges.iter().map(|e| e.bandwidth_bps).min()
    }

    pub fn max_delay_ns(&self) -> Option<u64> {
        self.edges.iter().map(|e| e.delay_ns).max()
    }

    /// Hop distances from `from` to every node (by position); `None` when unreachable.
    pub fn hop_distances(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.nodes.len()];
        let Some(start) = self.position(from) else {
            return dist;
        };
        dist[start] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let du = dist[self.index[&u]].unwrap();
            for (v, _) in self.neighbors(u) {
                let pv = self.index[&v];
                if dist[pv].is_none() {
                    dist[pv] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Unweighted diameter: the largest eccentricity of any vertex.
    /// `None` if the graph is empty or disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = None;
        for n in &self.nodes {
            let ecc = self
                .hop_distances(n.id)
                .into_iter()
                .try_fold(0u32, |acc, d| d.map(|d| acc.max(d)))?;
            best = Some(best.map_or(ecc, |b: u32| b.max(ecc)));
        }
        best
    }

    /// Whether the switches alone form a connected subgraph.
    pub fn switches_connected(&self) -> bool {
        let switches: Vec<NodeId> = self.switches().collect();
        let Some(&first) = switches.first() else {
            return true;
        };
        let mut seen = vec![false; self.nodes.len()];
        seen[self.index[&first]] = true;
        let mut stack = vec![first];
        while let Some(u) = stack.pop() {
            for (v, _) in self.neighbors(u) {
                let pv = self.index[&v];
                if self.nodes[pv].kind == NodeKind::Switch && !seen[pv] {
                    seen[pv] = true;
                    stack.push(v);
                }
            }
        }
        switches.iter().all(|s| seen[self.index[s]])
    }

    pub(crate) fn reserve(&mut self, edge: EdgeId, bps: u64) {
        let e = &mut self.edges[edge.0];
        debug_assert!(
            e.residual_bps >= bps,
            "reservation exceeds residual on {edge}"
        );
        e.residual_bps = e.residual_bps.saturating_sub(bps);
    }

    /// Restores every residual to the full link bandwidth.
    pub fn reset_residuals(&mut self) {
        for e in &mut self.edges {
            e.residual_bps = e.bandwidth_bps;
        }
    }
}

/// On-disk shape of a topology.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyFile {
    pub format_version: u32,
    pub nodes: Vec<Node>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default = "default_queues")]
    pub queues_per_port: u32,
}

fn default_queues() -> u32 {
    DEFAULT_QUEUES_PER_PORT
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: NodeId,
    pub b: NodeId,
    pub bandwidth_bps: u64,
    pub delay_ns: u64,
}

impl TryFrom<TopologyFile> for Topology {
    type Error = ModelError;

    fn try_from(file: TopologyFile) -> Result<Self, Self::Error> {
        if file.format_version != FORMAT_VERSION {
            return Err(ModelError::UnsupportedFormatVersion(file.format_version));
        }
        let edges = file
            .edges
            .into_iter()
            .map(|e| Edge::new(e.a, e.b, e.bandwidth_bps, e.delay_ns))
            .collect();
        Topology::new(file.nodes, edges, file.queues_per_port)
    }
}

impl From<Topology> for TopologyFile {
    fn from(t: Topology) -> Self {
        TopologyFile {
            format_version: FORMAT_VERSION,
            nodes: t.nodes,
            edges: t
                .edges
                .into_iter()
                .map(|e| EdgeRecord {
                    a: e.a,
                    b: e.b,
                    bandwidth_bps: e.bandwidth_bps,
                    delay_ns: e.delay_ns,
                })
                .collect(),
            queues_per_port: t.queues_per_port,
        }
    }
}
