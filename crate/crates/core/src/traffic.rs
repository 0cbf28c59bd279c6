//! Frame length distributions, traffic matrices and scenario generators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Discrete frame length pmf in bits, sorted by length with merged duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLengthDist {
    points: Vec<(u64, f64)>,
}

impl FrameLengthDist {
    pub fn new(points: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let mut pts: Vec<(u64, f64)> = points.into_iter().collect();
        if pts.is_empty() {
            return Err(Error::Distribution("empty pmf".into()));
        }
        if let Some((l, _)) = pts.iter().find(|(l, _)| *l == 0) {
            return Err(Error::Distribution(format!("frame length {l} must be positive")));
        }
        if let Some((_, p)) = pts.iter().find(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Distribution(format!("invalid probability {p}")));
        }
        let total: f64 = pts.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Distribution(format!("probabilities sum to {total}, not 1")));
        }
        pts.sort_by_key(|(l, _)| *l);
        let mut merged: Vec<(u64, f64)> = Vec::with_capacity(pts.len());
        for (l, p) in pts {
            match merged.last_mut() {
                Some((last, q)) if *last == l => *q += p,
                _ => merged.push((l, p)),
            }
        }
        merged.retain(|(_, p)| *p > 0.0);
        Ok(Self { points: merged })
    }

    pub fn point(bits: u64) -> Result<Self> {
        Self::new([(bits, 1.0)])
    }

    pub fn fixed_bytes(bytes: u64) -> Result<Self> {
        Self::point(bytes * 8)
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|&(l, p)| l as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.points.iter().map(|&(l, p)| p * (l as f64 - m).powi(2)).sum()
    }

    /// (L̄, ς²) in bits and bits².
    pub fn moments(&self) -> (f64, f64) {
        (self.mean(), self.variance())
    }

    pub fn max_len(&self) -> u64 {
        self.points.last().map(|(l, _)| *l).unwrap_or(0)
    }

    /// E[x^L] for a per-bit survival factor x.
    pub fn survival(&self, x: f64, overhead_bits: u64) -> f64 {
        self.points.iter().map(|&(l, p)| p * x.powf((l + overhead_bits) as f64)).sum()
    }
}

/// Square matrix of frame rates (frames/s) over OLT, ONUs and STAs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    n: usize,
    rates: Vec<f64>,
}

impl TrafficMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, rates: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, rate: f64) -> Result<()> {
        if i == j && rate != 0.0 {
            return Err(Error::Scenario(format!("diagonal entry ({i},{i}) must be zero")));
        }
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Scenario(format!("rate {rate} at ({i},{j}) must be non-negative")));
        }
        self.rates[i * self.n + j] = rate;
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { n: self.n, rates: self.rates.iter().map(|r| r * factor).collect() }
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Non-zero entries as (src, dst, rate) in row-major order.
    pub fn flows(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.rates.iter().enumerate().filter(|(_, r)| **r > 0.0).map(move |(k, r)| {
            (NodeId(k / self.n), NodeId(k % self.n), *r)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    P2p,
    Upstream,
    Uniform,
    Nonuniform,
    BMatrix,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [Self::P2p, Self::Upstream, Self::Uniform, Self::Nonuniform, Self::BMatrix];

    pub fn name(self) -> &'static str {
        match self {
            Self::P2p => "p2p",
            Self::Upstream => "upstream",
            Self::Uniform => "uniform",
            Self::Nonuniform => "nonuniform",
            Self::BMatrix => "b-matrix",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown scenario {s}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotSet {
    pub nodes: Vec<NodeId>,
    pub surcharge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub alpha: f64,
    pub b: f64,
    /// Overrides the default hot set for [`ScenarioKind::Nonuniform`].
    pub hot_set: Option<HotSet>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, alpha: f64) -> Self {
        Self { kind, alpha, b: 1.0, hot_set: None }
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Scenario(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.b.is_finite() && self.b >= 1.0) {
            return Err(Error::Scenario(format!("B must be >= 1, got {}", self.b)));
        }
        if let Some(hot) = &self.hot_set {
            if !(hot.surcharge.is_finite() && hot.surcharge >= 0.0) {
                return Err(Error::Scenario("surcharge must be >= 0".into()));
            }
        }
        Ok(())
    }
}

/// ONU 1, ONU 2 and the STAs sharing a zone with either, at 30% surcharge.
pub fn default_hot_set(topology: &Topology) -> HotSet {
    let mut nodes = Vec::new();
    for onu in [NodeId(1), NodeId(2)] {
        if onu.0 > topology.onus() {
            continue;
        }
        nodes.push(onu);
        for &rid in &topology.node(onu).radios {
            let zone = topology.radio(rid).zone;
            for &member in &topology.zones()[zone.0].members {
                let owner = topology.radio(member).owner;
                if topology.is_sta(owner) && !nodes.contains(&owner) {
                    nodes.push(owner);
                }
            }
        }
    }
    nodes.sort();
    HotSet { nodes, surcharge: 0.3 }
}

fn spread(m: &mut TrafficMatrix, sources: &[NodeId], rate_of: impl Fn(NodeId) -> f64) -> Result<()> {
    if sources.len() < 2 {
        return Err(Error::Scenario("need at least two traffic sources".into()));
    }
    let share = 1.0 / (sources.len() - 1) as f64;
    for &s in sources {
        for &d in sources {
            if s != d {
                m.set(s.0, d.0, rate_of(s) * share)?;
            }
        }
    }
    Ok(())
}

/// Builds the traffic matrix of a scenario.
///
/// Uniform traffic mixes OLT, ONUs and STAs when the fiber backhaul carries
/// traffic, uses ONUs only in a network without stations and STAs only when
/// no fiber is in service.
pub fn generate_matrix(spec: &ScenarioSpec, topology: &Topology) -> Result<TrafficMatrix> {
    spec.validate()?;
    let n = topology.endpoint_count();
    let mut m = TrafficMatrix::zeros(n);
    let alpha = spec.alpha;
    let stas: Vec<NodeId> = topology.sta_ids().filter(|&s| topology.is_endpoint(s)).collect();
    let needs_stas = |what: &str| -> Result<()> {
        if stas.is_empty() {
            Err(Error::Scenario(format!("{what} traffic needs stations")))
        } else {
            Ok(())
        }
    };
    match spec.kind {
        ScenarioKind::P2p => {
            needs_stas("peer-to-peer")?;
            spread(&mut m, &stas, |_| alpha)?;
        }
        ScenarioKind::Upstream => {
            needs_stas("upstream")?;
            if !topology.is_endpoint(NodeId::OLT) {
                return Err(Error::Scenario("upstream traffic needs an OLT with a working fiber".into()));
            }
            for &s in &stas {
                m.set(s.0, 0, alpha)?;
            }
        }
        ScenarioKind::Uniform | ScenarioKind::Nonuniform => {
            let sources = uniform_sources(topology);
            let rate_of: Box<dyn Fn(NodeId) -> f64> = if spec.kind == ScenarioKind::Nonuniform {
                let hot = spec.hot_set.clone().unwrap_or_else(|| default_hot_set(topology));
                Box::new(move |s| if hot.nodes.contains(&s) { alpha * (1.0 + hot.surcharge) } else { alpha })
            } else {
                Box::new(|_| alpha)
            };
            spread(&mut m, &sources, rate_of)?;
        }
        ScenarioKind::BMatrix => {
            let endpoints = topology.endpoints();
            for &s in &endpoints {
                for &d in &endpoints {
                    if s == d {
                        continue;
                    }
                    let optical = !topology.is_sta(s) && !topology.is_sta(d);
                    m.set(s.0, d.0, if optical { spec.b * alpha } else { alpha })?;
                }
            }
        }
    }
    Ok(m)
}

fn uniform_sources(topology: &Topology) -> Vec<NodeId> {
    let endpoints = topology.endpoints();
    if !topology.fiber_active() {
        endpoints.into_iter().filter(|&e| topology.is_sta(e)).collect()
    } else if topology.stas() == 0 {
        endpoints.into_iter().filter(|&e| topology.is_onu(e)).collect()
    } else {
        endpoints
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::topology::{FiberPlant, TopologySpec};
    use proptest::prelude::*;

    fn fig4() -> Topology {
        let (spec, plant) = presets::fig4_topology();
        Topology::build(&spec, Some(plant)).unwrap()
    }

    fn fig4x2() -> Topology {
        let (spec, plant) = presets::fig4x2_topology();
        Topology::build(&spec, Some(plant)).unwrap()
    }

    #[test]
    fn point_mass_moments() {
        let d = FrameLengthDist::fixed_bytes(1500).unwrap();
        assert_eq!(d.moments(), (12000.0, 0.0));
    }

    #[test]
    fn two_point_moments() {
        let d = FrameLengthDist::new([(8000, 0.5), (16000, 0.5)]).unwrap();
        assert_eq!(d.moments(), (12000.0, 1.6e7));
    }

    #[test]
    fn trimodal_moments() {
        let d = FrameLengthDist::new([(320, 0.5), (4640, 0.25), (12000, 0.25)]).unwrap();
        let mean = 160.0 + 1160.0 + 3000.0;
        let var = 0.5 * (320.0f64 - mean).powi(2) + 0.25 * (4640.0f64 - mean).powi(2) + 0.25 * (12000.0f64 - mean).powi(2);
        assert!((d.mean() - mean).abs() < 1e-9);
        assert!((d.variance() - var).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_pmf() {
        assert!(FrameLengthDist::new(Vec::<(u64, f64)>::new()).is_err());
        assert!(FrameLengthDist::new([(100, 0.5)]).is_err());
        assert!(FrameLengthDist::new([(0, 1.0)]).is_err());
        assert!(FrameLengthDist::new([(10, 1.5), (20, -0.5)]).is_err());
    }

    #[test]
    fn b_matrix_entries() {
        let t = fig4x2();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::BMatrix, 10.0).with_b(100.0), &t).unwrap();
        assert_eq!(m.get(1, 2), 1000.0);
        assert_eq!(m.get(0, 5), 1000.0);
        assert_eq!(m.get(1, 9), 10.0);
        assert_eq!(m.get(9, 0), 10.0);
        assert_eq!(m.get(3, 3), 0.0);
    }

    #[test]
    fn b_equal_one_is_flat() {
        let t = fig4();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::BMatrix, 3.0), &t).unwrap();
        for i in 0..m.size() {
            for j in 0..m.size() {
                assert_eq!(m.get(i, j), if i == j { 0.0 } else { 3.0 });
            }
        }
    }

    #[test]
    fn upstream_targets_olt() {
        let t = fig4();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::Upstream, 5.0), &t).unwrap();
        for s in t.sta_ids() {
            assert_eq!(m.get(s.0, 0), 5.0);
        }
        assert_eq!(m.total(), 5.0 * 16.0);
    }

    #[test]
    fn p2p_splits_over_other_stations() {
        let t = fig4();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::P2p, 15.0), &t).unwrap();
        assert_eq!(m.get(5, 6), 1.0);
        assert_eq!(m.get(5, 0), 0.0);
        assert!((m.total() - 15.0 * 16.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_source_classes() {
        let t = fig4();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::Uniform, 20.0), &t).unwrap();
        assert_eq!(m.get(0, 7), 1.0);
        let (spec, _) = presets::fig4_topology();
        let wmn = Topology::build(&spec, None).unwrap();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::Uniform, 15.0), &wmn).unwrap();
        assert_eq!(m.get(5, 6), 1.0);
        assert_eq!(m.get(0, 5), 0.0);
        let pon = TopologySpec { onu_mpp: vec![false; 4], stas: 0, mp_radios: vec![], maps: 0, zones: vec![] };
        let pon = Topology::build(&pon, Some(FiberPlant::tdm(4, 1e9, 1e-4))).unwrap();
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::Uniform, 3.0), &pon).unwrap();
        assert_eq!(m.get(1, 2), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn nonuniform_hot_set() {
        let t = fig4();
        let hot = default_hot_set(&t);
        assert_eq!(hot.nodes, [1, 2, 5, 6, 7, 8].map(NodeId).to_vec());
        let m = generate_matrix(&ScenarioSpec::new(ScenarioKind::Nonuniform, 20.0), &t).unwrap();
        let row = |i: usize| (0..m.size()).map(|j| m.get(i, j)).sum::<f64>();
        assert!((row(1) - 26.0).abs() < 1e-9);
        assert!((row(3) - 20.0).abs() < 1e-9);
        assert!((row(5) - 26.0).abs() < 1e-9);
    }

    #[test]
    fn station_scenarios_need_stations() {
        let pon = TopologySpec { onu_mpp: vec![false; 2], stas: 0, mp_radios: vec![], maps: 0, zones: vec![] };
        let pon = Topology::build(&pon, Some(FiberPlant::tdm(2, 1e9, 1e-4))).unwrap();
        assert!(generate_matrix(&ScenarioSpec::new(ScenarioKind::P2p, 1.0), &pon).is_err());
        assert!(generate_matrix(&ScenarioSpec::new(ScenarioKind::Upstream, 1.0), &pon).is_err());
    }

    proptest! {
        #[test]
        fn generators_are_homogeneous(alpha in 0.0f64..500.0, s in 0.0f64..10.0, b in 1.0f64..200.0, k in 0usize..5) {
            let kind = [ScenarioKind::P2p, ScenarioKind::Upstream, ScenarioKind::Uniform, ScenarioKind::Nonuniform, ScenarioKind::BMatrix][k];
            let t = fig4();
            let base = generate_matrix(&ScenarioSpec::new(kind, alpha).with_b(b), &t).unwrap();
            let scaled = generate_matrix(&ScenarioSpec::new(kind, alpha * s).with_b(b), &t).unwrap();
            for i in 0..base.size() {
                prop_assert_eq!(base.get(i, i), 0.0);
                for j in 0..base.size() {
                    prop_assert!(base.get(i, j) >= 0.0);
                    let want = base.get(i, j) * s;
                    prop_assert!((scaled.get(i, j) - want).abs() <= 1e-12 * want.max(1.0));
                }
            }
        }
    }
}
