//! Path searches over the combined fiber/wireless graph.
//!
//! Labels carry their full node sequence so that ties are broken by hop
//! count and then by the lexicographically smallest node sequence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::topology::{NodeId, RadioId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HopKind {
    /// Transmitted by the given radio of the sending node.
    Wireless(RadioId),
    /// ONU to OLT.
    FiberUp,
    /// OLT to ONU.
    FiberDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub to: NodeId,
    pub kind: HopKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub hops: Vec<HopKind>,
}

impl Path {
    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    pub fn wireless_hops(&self) -> usize {
        self.hops.iter().filter(|h| matches!(h, HopKind::Wireless(_))).count()
    }

    pub fn uses_fiber(&self) -> bool {
        self.hops.iter().any(|h| !matches!(h, HopKind::Wireless(_)))
    }

    /// (sender, hop) pairs in path order.
    pub fn steps(&self) -> impl Iterator<Item = (NodeId, HopKind)> + '_ {
        self.nodes.iter().copied().zip(self.hops.iter().copied())
    }
}

/// Adjacency of a topology. STAs and conventional ONUs can only be the ends
/// of a path.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<Edge>>,
    relay: Vec<bool>,
}

impl Graph {
    pub fn new(topology: &Topology) -> Self {
        let n = topology.nodes().len();
        let mut adj = vec![Vec::new(); n];
        for onu in topology.onu_ids() {
            if topology.fiber_link(onu) {
                adj[onu.0].push(Edge { to: NodeId::OLT, kind: HopKind::FiberUp });
                adj[0].push(Edge { to: onu, kind: HopKind::FiberDown });
            }
        }
        for node in topology.nodes() {
            for (to, radio) in topology.wireless_neighbors(node.id) {
                adj[node.id.0].push(Edge { to, kind: HopKind::Wireless(radio) });
            }
        }
        for edges in &mut adj {
            edges.sort_by_key(|e| e.to);
        }
        let relay = topology
            .nodes()
            .iter()
            .map(|node| !node.removed && node.role.forwards())
            .collect();
        Self { adj, relay }
    }

    pub fn edges(&self, node: NodeId) -> &[Edge] {
        &self.adj[node.0]
    }

    pub fn can_relay(&self, node: NodeId) -> bool {
        self.relay[node.0]
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }
}

#[derive(Debug, Clone)]
struct Label {
    key: f64,
    sum: f64,
    max: f64,
    nodes: Vec<NodeId>,
    hops: Vec<HopKind>,
}

impl Label {
    fn order(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.hops.len().cmp(&other.hops.len()))
            .then_with(|| self.nodes.cmp(&other.nodes))
    }

    fn last(&self) -> NodeId {
        *self.nodes.last().expect("labels are never empty")
    }

    fn extend(&self, edge: &Edge, sum: f64, max: f64, key: f64) -> Self {
        let mut nodes = Vec::with_capacity(self.nodes.len() + 1);
        nodes.extend_from_slice(&self.nodes);
        nodes.push(edge.to);
        let mut hops = Vec::with_capacity(self.hops.len() + 1);
        hops.extend_from_slice(&self.hops);
        hops.push(edge.kind);
        Self { key, sum, max, nodes, hops }
    }

    fn into_path(self) -> Path {
        Path { nodes: self.nodes, hops: self.hops }
    }
}

struct MinFirst(Label);

impl PartialEq for MinFirst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MinFirst {}

impl PartialOrd for MinFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MinFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.order(&self.0)
    }
}

/// Least-cost path for non-negative additive hop costs, ties broken by hop
/// count then node sequence.
pub fn shortest_path(graph: &Graph, src: NodeId, dst: NodeId, cost: impl Fn(NodeId, &Edge) -> f64) -> Option<Path> {
    let mut settled = vec![false; graph.node_count()];
    let mut heap = BinaryHeap::new();
    heap.push(MinFirst(Label { key: 0.0, sum: 0.0, max: 0.0, nodes: vec![src], hops: Vec::new() }));
    while let Some(MinFirst(label)) = heap.pop() {
        let v = label.last();
        if settled[v.0] {
            continue;
        }
        settled[v.0] = true;
        if v == dst {
            return Some(label.into_path());
        }
        if v != src && !graph.can_relay(v) {
            continue;
        }
        for edge in graph.edges(v) {
            if settled[edge.to.0] {
                continue;
            }
            let c = cost(v, edge);
            debug_assert!(c >= 0.0, "hop costs must be non-negative");
            let key = label.key + c;
            heap.push(MinFirst(label.extend(edge, key, 0.0, key)));
        }
    }
    None
}

/// Path minimising `Σ w + max w` over its hops, where `w` is the intensity of
/// the element transmitting each hop. Pareto labels on (sum, max) are kept per
/// node; labels are expanded best-first on the objective, which never
/// decreases along a path, so the first label reaching `dst` is optimal.
pub fn min_sum_max_path(graph: &Graph, src: NodeId, dst: NodeId, weight: impl Fn(NodeId, &Edge) -> f64) -> Option<Path> {
    let mut fronts: Vec<Vec<(f64, f64, usize)>> = vec![Vec::new(); graph.node_count()];
    let mut heap = BinaryHeap::new();
    heap.push(MinFirst(Label { key: 0.0, sum: 0.0, max: 0.0, nodes: vec![src], hops: Vec::new() }));
    while let Some(MinFirst(label)) = heap.pop() {
        let v = label.last();
        let hops = label.hops.len();
        if fronts[v.0].iter().any(|&(s, m, h)| s <= label.sum && m <= label.max && h <= hops) {
            continue;
        }
        fronts[v.0].push((label.sum, label.max, hops));
        if v == dst {
            return Some(label.into_path());
        }
        if v != src && !graph.can_relay(v) {
            continue;
        }
        for edge in graph.edges(v) {
            if label.nodes.contains(&edge.to) {
                continue;
            }
            let w = weight(v, edge);
            let sum = label.sum + w;
            let max = label.max.max(w);
            heap.push(MinFirst(label.extend(edge, sum, max, sum + max)));
        }
    }
    None
}

/// Every simple path from `src` to `dst`; for tests and small graphs only.
pub fn all_simple_paths(graph: &Graph, src: NodeId, dst: NodeId) -> Vec<Path> {
    fn walk(graph: &Graph, dst: NodeId, path: &mut Path, out: &mut Vec<Path>) {
        let v = *path.nodes.last().unwrap();
        if v == dst {
            out.push(path.clone());
            return;
        }
        if path.nodes.len() > 1 && !graph.can_relay(v) {
            return;
        }
        for edge in graph.edges(v) {
            if path.nodes.contains(&edge.to) {
                continue;
            }
            path.nodes.push(edge.to);
            path.hops.push(edge.kind);
            walk(graph, dst, path, out);
            path.nodes.pop();
            path.hops.pop();
        }
    }
    let mut out = Vec::new();
    let mut path = Path { nodes: vec![src], hops: Vec::new() };
    walk(graph, dst, &mut path, &mut out);
    out
}
