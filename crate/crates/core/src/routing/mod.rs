//! Single-path routing over the FiWi graph and the resulting rate split.
//!
//! Static algorithms (minimum hop, minimum interference) depend only on the
//! graph. The load-adaptive ones (minimum delay, OFRA) start from minimum hop
//! routes and make one greedy sweep over the source-destination pairs, asking
//! a [`LoadModel`] for per-hop costs under the current assignment.

mod search;

use serde::{Deserialize, Serialize};

pub use search::{all_simple_paths, min_sum_max_path, shortest_path, Edge, Graph, HopKind, Path};

use crate::error::{Error, Result};
use crate::pon::FiberFlows;
use crate::topology::{NodeId, Topology};
use crate::traffic::TrafficMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutingAlgo {
    MinHop,
    MinInterference,
    MinDelay,
    Ofra,
}

impl RoutingAlgo {
    pub const ALL: [RoutingAlgo; 4] = [Self::MinHop, Self::MinInterference, Self::MinDelay, Self::Ofra];

    pub fn name(self) -> &'static str {
        match self {
            Self::MinHop => "min-hop",
            Self::MinInterference => "min-interference",
            Self::MinDelay => "min-delay",
            Self::Ofra => "ofra",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, Self::MinDelay | Self::Ofra)
    }
}

impl std::str::FromStr for RoutingAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown routing algorithm {s}")))
    }
}

/// A routed source-destination pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub src: NodeId,
    pub dst: NodeId,
    /// Offered rate, frames/s.
    pub rate: f64,
    /// Relative weight of the pair in delay averages. Equals the rate of the
    /// traffic pattern at unit intensity, so averages stay defined at zero load.
    pub weight: f64,
    pub path: Path,
}

impl Flow {
    /// (Γ_ij, Γ̃_ij): rate carried in the fiber and in the wireless domain.
    pub fn gamma(&self) -> (f64, f64) {
        let fiber = if self.path.uses_fiber() { self.rate } else { 0.0 };
        let wireless = if self.path.wireless_hops() > 0 { self.rate } else { 0.0 };
        (fiber, wireless)
    }
}

/// Paths of all pairs plus the loads they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingOutcome {
    pub flows: Vec<Flow>,
    pub n_frames: usize,
    /// Frames/s transmitted by each radio.
    pub radio_frames: Vec<f64>,
    /// Fiber segment rates, frames/s.
    pub fiber: FiberFlows,
    /// Fiber segment weights (pattern rates).
    pub fiber_weight: FiberFlows,
    /// Frames/s arriving at each ONU from the fiber and continuing wirelessly.
    pub mpp_inbound: Vec<f64>,
}

impl RoutingOutcome {
    fn empty(topology: &Topology, n_frames: usize) -> Self {
        Self {
            flows: Vec::new(),
            n_frames,
            radio_frames: vec![0.0; topology.radios().len()],
            fiber: FiberFlows::zeros(topology.onus()),
            fiber_weight: FiberFlows::zeros(topology.onus()),
            mpp_inbound: vec![0.0; topology.onus() + 1],
        }
    }

    /// Builds the outcome for fixed paths and accumulates all loads.
    pub fn from_flows(topology: &Topology, flows: Vec<Flow>, n_frames: usize) -> Self {
        let mut out = Self::empty(topology, n_frames);
        for flow in &flows {
            out.account(flow, 1.0);
        }
        out.flows = flows;
        out
    }

    /// Adds (`sign` = 1) or removes (`sign` = -1) the loads of one flow.
    fn account(&mut self, flow: &Flow, sign: f64) {
        let rate = sign * flow.rate;
        let weight = sign * flow.weight;
        let mut run_start: Option<NodeId> = None;
        let nodes = &flow.path.nodes;
        for (k, hop) in flow.path.hops.iter().enumerate() {
            match hop {
                HopKind::Wireless(radio) => {
                    self.radio_frames[radio.0] += rate;
                }
                HopKind::FiberUp | HopKind::FiberDown => {
                    run_start.get_or_insert(nodes[k]);
                    let next_is_fiber = flow.path.hops.get(k + 1).is_some_and(|h| !matches!(h, HopKind::Wireless(_)));
                    if !next_is_fiber {
                        let from = run_start.take().expect("fiber run has a start");
                        let to = nodes[k + 1];
                        self.fiber.add(from.0, to.0, rate);
                        self.fiber_weight.add(from.0, to.0, weight);
                        if k + 1 < flow.path.hops.len() {
                            self.mpp_inbound[to.0] += rate;
                        }
                    }
                }
            }
        }
        if sign < 0.0 {
            for x in self.radio_frames.iter_mut().chain(self.mpp_inbound.iter_mut()) {
                if x.abs() < 1e-9 {
                    *x = 0.0;
                }
            }
        }
    }

    /// Aggregates/s per radio.
    pub fn sigma(&self) -> Vec<f64> {
        let n = self.n_frames as f64;
        self.radio_frames.iter().map(|f| f / n).collect()
    }

    pub fn offered(&self) -> f64 {
        self.flows.iter().map(|f| f.rate).sum()
    }

    /// Share of the offered traffic whose path never touches the fiber plant.
    pub fn wireless_only_share(&self) -> f64 {
        let total: f64 = self.flows.iter().map(|f| f.weight).sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.flows.iter().filter(|f| !f.path.uses_fiber()).map(|f| f.weight).sum::<f64>() / total
    }

    /// Share of the offered traffic that uses the fiber plant.
    pub fn fiber_share(&self) -> f64 {
        let total: f64 = self.flows.iter().map(|f| f.weight).sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.flows.iter().filter(|f| f.path.uses_fiber()).map(|f| f.weight).sum::<f64>() / total
    }

    fn reassign(&mut self, k: usize, path: Path) {
        let mut flow = self.flows[k].clone();
        flow.path = path;
        self.account(&flow, 1.0);
        self.flows[k] = flow;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Mean delay of each hop, seconds.
    Delay,
    /// Traffic intensity of the element transmitting each hop.
    Intensity,
}

/// Per-hop costs. `up[o]` applies to hops ONU o → OLT, `down[o]` to OLT → ONU o.
#[derive(Debug, Clone, PartialEq)]
pub struct HopCosts {
    pub radio: Vec<f64>,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl HopCosts {
    pub fn uniform(topology: &Topology, value: f64) -> Self {
        Self {
            radio: vec![value; topology.radios().len()],
            up: vec![value; topology.onus() + 1],
            down: vec![value; topology.onus() + 1],
        }
    }

    pub fn of(&self, from: NodeId, edge: &Edge) -> f64 {
        match edge.kind {
            HopKind::Wireless(r) => self.radio[r.0],
            HopKind::FiberUp => self.up[from.0],
            HopKind::FiberDown => self.down[edge.to.0],
        }
    }

    pub fn path_sum(&self, path: &Path) -> f64 {
        path.steps()
            .zip(path.nodes.iter().skip(1))
            .map(|((from, kind), &to)| self.of(from, &Edge { to, kind }))
            .sum()
    }
}

/// Supplies per-hop costs for load-adaptive routing.
pub trait LoadModel {
    fn hop_costs(&mut self, outcome: &RoutingOutcome, metric: Metric) -> HopCosts;
}

/// Routing input: rates plus the unit-intensity weights of the pattern.
#[derive(Debug, Clone)]
pub struct Demand<'a> {
    pub rates: &'a TrafficMatrix,
    pub weights: &'a TrafficMatrix,
}

impl<'a> Demand<'a> {
    /// Demand whose weights are its own rates.
    pub fn plain(rates: &'a TrafficMatrix) -> Self {
        Self { rates, weights: rates }
    }

    fn pairs(&self) -> Vec<(NodeId, NodeId, f64, f64)> {
        self.weights
            .flows()
            .map(|(s, d, w)| (s, d, self.rates.get(s.0, d.0), w))
            .chain(self.rates.flows().filter(|(s, d, _)| self.weights.get(s.0, d.0) == 0.0).map(|(s, d, r)| (s, d, r, r)))
            .collect()
    }
}

fn static_path(topology: &Topology, graph: &Graph, src: NodeId, dst: NodeId, algo: RoutingAlgo) -> Result<Path> {
    let path = if fiber_pinned(topology, src, dst) {
        shortest_path(graph, src, dst, |_, e| if matches!(e.kind, HopKind::Wireless(_)) { f64::INFINITY } else { 1.0 })
            .filter(|p| p.wireless_hops() == 0)
    } else {
        None
    };
    if let Some(p) = path {
        return Ok(p);
    }
    let path = match algo {
        RoutingAlgo::MinInterference => {
            shortest_path(graph, src, dst, |_, e| if matches!(e.kind, HopKind::Wireless(_)) { 1.0 } else { 0.0 })
        }
        _ => shortest_path(graph, src, dst, |_, _| 1.0),
    };
    path.ok_or(Error::Unreachable { src, dst })
}

/// Minimum-hop or minimum-interference routes for every pair with traffic.
pub fn route_static(topology: &Topology, demand: &Demand<'_>, algo: RoutingAlgo, n_frames: usize) -> Result<RoutingOutcome> {
    let graph = Graph::new(topology);
    let mut flows = Vec::new();
    for (src, dst, rate, weight) in demand.pairs() {
        check_endpoints(topology, src, dst)?;
        let path = static_path(topology, &graph, src, dst, algo)?;
        flows.push(Flow { src, dst, rate, weight, path });
    }
    Ok(RoutingOutcome::from_flows(topology, flows, n_frames))
}

fn check_endpoints(topology: &Topology, src: NodeId, dst: NodeId) -> Result<()> {
    for id in [src, dst] {
        if id.0 >= topology.nodes().len() {
            return Err(Error::UnknownNode(id));
        }
        if !topology.is_endpoint(id) {
            return Err(Error::Unreachable { src, dst });
        }
    }
    Ok(())
}

pub fn min_hop(topology: &Topology, matrix: &TrafficMatrix, n_frames: usize) -> Result<RoutingOutcome> {
    route_static(topology, &Demand::plain(matrix), RoutingAlgo::MinHop, n_frames)
}

pub fn min_interference(topology: &Topology, matrix: &TrafficMatrix, n_frames: usize) -> Result<RoutingOutcome> {
    route_static(topology, &Demand::plain(matrix), RoutingAlgo::MinInterference, n_frames)
}

/// Whether a pair between the OLT and ONUs stays in the fiber domain: both
/// ends must have a working fiber connection.
pub fn fiber_pinned(topology: &Topology, src: NodeId, dst: NodeId) -> bool {
    let optical = |n: NodeId| (n == NodeId::OLT && topology.fiber_active()) || topology.fiber_link(n);
    optical(src) && optical(dst)
}

/// Greedy load-adaptive routing: minimum-hop start, then one sweep in order
/// of decreasing rate (ties by source, destination) re-routing each pair on
/// the best path under the loads of all other pairs. Pairs between optical
/// nodes keep their fiber route.
pub fn route_adaptive(
    topology: &Topology,
    demand: &Demand<'_>,
    algo: RoutingAlgo,
    n_frames: usize,
    model: &mut dyn LoadModel,
) -> Result<RoutingOutcome> {
    let mut outcome = route_static(topology, demand, RoutingAlgo::MinHop, n_frames)?;
    if !algo.is_adaptive() {
        return Ok(outcome);
    }
    let graph = Graph::new(topology);
    let mut order: Vec<usize> = (0..outcome.flows.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (&outcome.flows[a], &outcome.flows[b]);
        fb.weight.total_cmp(&fa.weight).then((fa.src, fa.dst).cmp(&(fb.src, fb.dst)))
    });
    for k in order {
        let flow = outcome.flows[k].clone();
        if fiber_pinned(topology, flow.src, flow.dst) {
            continue;
        }
        outcome.account(&flow, -1.0);
        let path = match algo {
            RoutingAlgo::MinDelay => {
                let costs = model.hop_costs(&outcome, Metric::Delay);
                shortest_path(&graph, flow.src, flow.dst, |from, e| costs.of(from, e))
            }
            RoutingAlgo::Ofra => {
                let costs = model.hop_costs(&outcome, Metric::Intensity);
                min_sum_max_path(&graph, flow.src, flow.dst, |from, e| costs.of(from, e))
            }
            _ => unreachable!("static algorithms return early"),
        };
        let path = path.ok_or(Error::Unreachable { src: flow.src, dst: flow.dst })?;
        outcome.reassign(k, path);
    }
    Ok(outcome)
}
