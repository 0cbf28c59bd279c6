//! End-to-end analysis: routing, PON and WLAN models composed into the mean
//! delay D = D^d + D^u + D^wi with a stability verdict, plus load sweeps and
//! the search for the largest stable load.

use std::io::Write;

use rayon::prelude::*;

use crate::aggregation::{aggregate_error_prob, AggregateDist, AggregationConfig};
use crate::dcf::{self, Access, DcfParams, DcfSolution, RadioState, SlotTimes, SolverOptions, ZoneState};
use crate::error::{Error, Result};
use crate::pon::{self, Direction, PonDelayReport, PonLoad};
use crate::routing::{self, Demand, HopCosts, HopKind, LoadModel, Metric, RoutingAlgo, RoutingOutcome};
use crate::topology::{NodeId, NodeRole, RadioId, Topology};
use crate::traffic::{generate_matrix, FrameLengthDist, ScenarioSpec, TrafficMatrix};
use crate::wireless_delay::{self, NodeDelay, PathDelay, WirelessFlow};

/// Cost of a hop through a saturated element in delay-driven routing, on top
/// of its intensity.
const SATURATED_HOP_COST: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerConfig {
    pub frame: FrameLengthDist,
    pub aggregation: AggregationConfig,
    pub dcf: DcfParams,
    pub solver: SolverOptions,
    pub routing: RoutingAlgo,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            frame: FrameLengthDist::fixed_bytes(1500).expect("valid point mass"),
            aggregation: AggregationConfig::a_msdu(),
            dcf: DcfParams::default(),
            solver: SolverOptions::default(),
            routing: RoutingAlgo::MinHop,
        }
    }
}

/// Element of the network that limits stability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Radio { radio: RadioId, node: NodeId },
    PonDown { sector: usize },
    PonUp { sector: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Stable,
    Saturated { element: Element, rho: f64 },
    NonConvergent { zone: usize, iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayReport {
    pub alpha: f64,
    /// Offered load, bit/s.
    pub throughput_bps: f64,
    /// NaN unless stable.
    pub d_down: f64,
    pub d_up: f64,
    pub d_wi: f64,
    pub d_total: f64,
    pub status: Status,
    pub pon_stable: bool,
    pub wireless_stable: bool,
    /// Intensity per node: radios report σΔ (largest over the node's radios),
    /// the OLT its largest downstream and ONUs their sector's upstream intensity.
    pub node_rho: Vec<f64>,
    pub max_rho: f64,
    pub max_rho_node: NodeId,
    pub pon_load: Option<PonLoad>,
    pub pon: Option<PonDelayReport>,
    pub path: Option<PathDelay>,
    pub nodes: Vec<NodeDelay>,
    pub dcf: Option<DcfSolution>,
    pub outcome: RoutingOutcome,
}

impl DelayReport {
    pub fn is_stable(&self) -> bool {
        self.status == Status::Stable
    }

    pub fn csv_header() -> [&'static str; 9] {
        ["alpha", "throughput_bps", "D_d_s", "D_u_s", "D_wi_s", "D_s", "stable", "max_rho_node_id", "max_rho"]
    }

    pub fn csv_record(&self) -> Vec<String> {
        let delay = |x: f64| if self.is_stable() { format!("{x:e}") } else { String::new() };
        vec![
            format!("{}", self.alpha),
            format!("{:e}", self.throughput_bps),
            delay(self.d_down),
            delay(self.d_up),
            delay(self.d_wi),
            delay(self.d_total),
            self.is_stable().to_string(),
            self.max_rho_node.to_string(),
            format!("{:.9}", self.max_rho),
        ]
    }
}

/// Writes sweep rows as CSV after a `#` comment line.
pub fn write_csv<W: Write>(out: W, comment: &str, rows: &[DelayReport]) -> Result<()> {
    let mut out = out;
    writeln!(out, "# {comment}").map_err(io_err)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(DelayReport::csv_header()).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.csv_record()).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

/// Wireless front-end state under a given assignment.
#[derive(Debug, Clone)]
struct WirelessState {
    radios: Vec<RadioState>,
    zones: Vec<Option<ZoneState>>,
    nodes: Vec<NodeDelay>,
    failure: Option<Error>,
}

/// Per-zone DCF solutions reused while only a few zones change.
#[derive(Debug, Default)]
struct ZoneCache {
    entries: Vec<Option<(Vec<f64>, std::result::Result<(Vec<RadioState>, ZoneState), Error>)>>,
}

#[derive(Debug, Clone)]
pub struct Analyzer {
    topology: Topology,
    cfg: AnalyzerConfig,
    agg: AggregateDist,
    p_e: f64,
    slots: SlotTimes,
    mean: f64,
    var: f64,
}

impl Analyzer {
    pub fn new(topology: Topology, cfg: AnalyzerConfig) -> Result<Self> {
        cfg.dcf.validate()?;
        let agg = AggregateDist::build(&cfg.frame, &cfg.aggregation)?;
        let p_e = aggregate_error_prob(&cfg.frame, &agg, &cfg.aggregation, cfg.dcf.bit_error_rate)?;
        let slots = dcf::slot_durations(&cfg.dcf, &agg);
        let (mean, var) = cfg.frame.moments();
        Ok(Self { topology, cfg, agg, p_e, slots, mean, var })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn config(&self) -> &AnalyzerConfig {
        &self.cfg
    }

    pub fn aggregate(&self) -> &AggregateDist {
        &self.agg
    }

    pub fn error_prob(&self) -> f64 {
        self.p_e
    }

    pub fn slot_times(&self) -> SlotTimes {
        self.slots
    }

    pub fn with_routing(&self, routing: RoutingAlgo) -> Self {
        let mut out = self.clone();
        out.cfg.routing = routing;
        out
    }

    /// Routes a demand with the configured algorithm.
    pub fn route(&self, demand: &Demand<'_>) -> Result<RoutingOutcome> {
        let n = self.agg.n_frames;
        if self.cfg.routing.is_adaptive() {
            let mut model = AnalyzerModel { analyzer: self, cache: ZoneCache::default() };
            routing::route_adaptive(&self.topology, demand, self.cfg.routing, n, &mut model)
        } else {
            routing::route_static(&self.topology, demand, self.cfg.routing, n)
        }
    }

    /// Routes and analyses a traffic matrix.
    pub fn evaluate(&self, matrix: &TrafficMatrix) -> Result<DelayReport> {
        let outcome = self.route(&Demand::plain(matrix))?;
        self.analyze(outcome)
    }

    /// Evaluates `pattern` scaled by `alpha`; averages use the pattern as
    /// weights so the result is continuous down to zero load.
    pub fn evaluate_pattern(&self, pattern: &TrafficMatrix, alpha: f64) -> Result<DelayReport> {
        let rates = pattern.scaled(alpha);
        let outcome = self.route(&Demand { rates: &rates, weights: pattern })?;
        let mut report = self.analyze(outcome)?;
        report.alpha = alpha;
        Ok(report)
    }

    pub fn evaluate_scenario(&self, spec: &ScenarioSpec) -> Result<DelayReport> {
        let pattern = self.pattern(spec)?;
        self.evaluate_pattern(&pattern, spec.alpha)
    }

    /// The scenario's traffic matrix at unit intensity.
    pub fn pattern(&self, spec: &ScenarioSpec) -> Result<TrafficMatrix> {
        let unit = ScenarioSpec { alpha: 1.0, ..spec.clone() };
        generate_matrix(&unit, &self.topology)
    }

    /// One report per α, evaluated in parallel.
    pub fn sweep(&self, spec: &ScenarioSpec, alphas: &[f64]) -> Result<Vec<DelayReport>> {
        let pattern = self.pattern(spec)?;
        alphas.par_iter().map(|&a| self.evaluate_pattern(&pattern, a)).collect()
    }

    /// Largest stable α (to 0.1 % by bisection) and the corresponding offered
    /// throughput in bit/s.
    pub fn max_stable_alpha(&self, spec: &ScenarioSpec) -> Result<(f64, f64)> {
        let pattern = self.pattern(spec)?;
        let stable = |a: f64| -> Result<bool> { Ok(self.evaluate_pattern(&pattern, a)?.is_stable()) };
        let bits_per_alpha = pattern.total() * self.mean;
        if bits_per_alpha <= 0.0 {
            return Err(Error::Scenario("scenario carries no traffic".into()));
        }
        let mut lo = 0.0;
        let mut hi = 1e6 / bits_per_alpha;
        while stable(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi * bits_per_alpha > 1e15 {
                return Err(Error::Scenario("no saturation below 1 Pb/s".into()));
            }
        }
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if stable(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, lo * bits_per_alpha))
    }

    fn wireless_state(&self, outcome: &RoutingOutcome, cache: Option<&mut ZoneCache>) -> WirelessState {
        let t = &self.topology;
        let sigma = outcome.sigma();
        let mut local = ZoneCache::default();
        let cache = cache.unwrap_or(&mut local);
        if cache.entries.len() != t.zones().len() {
            cache.entries = vec![None; t.zones().len()];
        }
        let stale: Vec<usize> = t
            .zones()
            .iter()
            .filter(|z| {
                let sig: Vec<f64> = z.members.iter().map(|r| sigma[r.0]).collect();
                !matches!(&cache.entries[z.id.0], Some((cached, _)) if *cached == sig)
            })
            .map(|z| z.id.0)
            .collect();
        let solved: Vec<_> = stale
            .par_iter()
            .map(|&z| {
                let sig: Vec<f64> = t.zones()[z].members.iter().map(|r| sigma[r.0]).collect();
                let res = dcf::solve_zone(z, &sig, self.slots, self.p_e, &self.cfg.dcf, &self.cfg.solver);
                (z, sig, res)
            })
            .collect();
        for (z, sig, res) in solved {
            cache.entries[z] = Some((sig, res));
        }

        let idle = RadioState { sigma: 0.0, q: 0.0, p: self.p_e, p_c: 0.0, tau: 0.0, q_saturated: false };
        let mut radios = vec![idle; t.radios().len()];
        let mut zones = vec![None; t.zones().len()];
        let mut nodes = vec![NodeDelay::new(0.0, 0.0, 0.0); t.radios().len()];
        let mut failure = None;
        for zone in t.zones() {
            let (_, res) = cache.entries[zone.id.0].as_ref().expect("every zone solved");
            let (states, zs) = match res {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e.clone());
                    for r in &zone.members {
                        let mut nd = NodeDelay::new(sigma[r.0], f64::INFINITY, 0.0);
                        nd.intensity = if sigma[r.0] > 0.0 { f64::INFINITY } else { 0.0 };
                        nodes[r.0] = nd;
                    }
                    continue;
                }
            };
            zones[zone.id.0] = Some(*zs);
            let service: Vec<f64> = states
                .iter()
                .map(|st| {
                    let s = match self.cfg.dcf.access {
                        Access::Basic => wireless_delay::service_time_basic(st.p, self.slots, &self.cfg.dcf),
                        Access::RtsCts => wireless_delay::service_time_rtscts(self.p_e, st.p_c, self.slots, &self.cfg.dcf),
                    };
                    s.unwrap_or(f64::INFINITY)
                })
                .collect();
            let sig: Vec<f64> = states.iter().map(|s| s.sigma).collect();
            let sensing = wireless_delay::sensing_delay(&sig, &service);
            for (k, r) in zone.members.iter().enumerate() {
                radios[r.0] = states[k];
                let mut nd = NodeDelay::new(sig[k], service[k], sensing[k]);
                let owner = t.radio(*r).owner;
                if t.node(owner).role == NodeRole::OnuMpp {
                    nd = nd.with_mpp_correction(self.mpp_phi(owner, outcome));
                }
                nodes[r.0] = nd;
            }
        }
        WirelessState { radios, zones, nodes, failure }
    }

    fn mpp_phi(&self, onu: NodeId, outcome: &RoutingOutcome) -> f64 {
        let Some(plant) = self.topology.plant() else { return 0.0 };
        let Ok(sector) = plant.sector_of(onu.0) else { return 0.0 };
        let c = plant.rate(sector);
        let rho = self.mean / c * outcome.mpp_inbound[onu.0];
        if rho < 1.0 {
            pon::pk_phi(rho, c, self.mean, self.var).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    fn pon_loads(&self, outcome: &RoutingOutcome) -> Option<(PonLoad, PonLoad)> {
        let plant = self.topology.plant()?;
        Some((
            pon::intensities(&outcome.fiber, plant, self.mean),
            pon::intensities(&outcome.fiber_weight, plant, self.mean),
        ))
    }

    /// Analyses a routed assignment.
    pub fn analyze(&self, outcome: RoutingOutcome) -> Result<DelayReport> {
        let t = &self.topology;
        let ws = self.wireless_state(&outcome, None);
        let loads = self.pon_loads(&outcome);

        let mut node_rho = vec![0.0f64; t.nodes().len()];
        for (r, nd) in ws.nodes.iter().enumerate() {
            let owner = t.radio(RadioId(r)).owner;
            node_rho[owner.0] = node_rho[owner.0].max(nd.intensity);
        }
        let mut pon_stable = true;
        let mut worst: Option<(Element, f64)> = None;
        let mut consider = |el: Element, rho: f64| {
            if rho >= 1.0 && worst.as_ref().is_none_or(|(_, w)| rho > *w) {
                worst = Some((el, rho));
            }
        };
        if let (Some((load, _)), Some(plant)) = (&loads, t.plant()) {
            pon_stable = load.stable();
            node_rho[0] = load.down.iter().cloned().fold(0.0, f64::max);
            for onu in t.onu_ids() {
                if t.fiber_link(onu) {
                    let s = plant.sector_of(onu.0).unwrap_or(0);
                    node_rho[onu.0] = node_rho[onu.0].max(load.up[s]);
                }
            }
            let (dir, sector, rho) = load.max_intensity();
            let el = match dir {
                Direction::Down => Element::PonDown { sector },
                Direction::Up => Element::PonUp { sector },
            };
            consider(el, rho);
        }
        let mut wireless_stable = ws.failure.is_none();
        for (r, nd) in ws.nodes.iter().enumerate() {
            if !nd.stable {
                wireless_stable = false;
                consider(Element::Radio { radio: RadioId(r), node: t.radio(RadioId(r)).owner }, nd.intensity);
            }
        }
        let (max_rho_node, max_rho) = node_rho
            .iter()
            .enumerate()
            .fold((NodeId(0), f64::NEG_INFINITY), |(bn, br), (n, &r)| if r > br { (NodeId(n), r) } else { (bn, br) });

        let throughput_bps = outcome.offered() * self.mean;
        let status = if let Some(Error::NonConvergence { zone, iterations, residual }) = &ws.failure {
            Status::NonConvergent { zone: *zone, iterations: *iterations, residual: *residual }
        } else if let Some((element, rho)) = worst {
            Status::Saturated { element, rho }
        } else if !(pon_stable && wireless_stable) {
            let rho = max_rho;
            Status::Saturated { element: Element::PonDown { sector: 0 }, rho }
        } else {
            Status::Stable
        };

        let dcf_solution = if ws.failure.is_none() {
            Some(DcfSolution {
                radios: ws.radios.clone(),
                zones: ws.zones.iter().map(|z| z.expect("all zones solved")).collect(),
                p_e: self.p_e,
            })
        } else {
            None
        };

        let mut report = DelayReport {
            alpha: f64::NAN,
            throughput_bps,
            d_down: f64::NAN,
            d_up: f64::NAN,
            d_wi: f64::NAN,
            d_total: f64::NAN,
            status,
            pon_stable,
            wireless_stable,
            node_rho,
            max_rho,
            max_rho_node,
            pon_load: loads.as_ref().map(|(l, _)| l.clone()),
            pon: None,
            path: None,
            nodes: ws.nodes.clone(),
            dcf: dcf_solution,
            outcome,
        };
        if !report.is_stable() {
            return Ok(report);
        }

        if let (Some((load, weights)), Some(plant)) = (&loads, t.plant()) {
            let mut rep = pon::delays(load, plant, self.mean, self.var)?;
            let wd: f64 = weights.down.iter().sum();
            let wu: f64 = weights.up.iter().sum();
            rep.avg_down = pon::weighted_mean(&rep.down, &weights.down);
            rep.avg_up = pon::weighted_mean(&rep.up, &weights.up);
            report.d_down = if wd > 0.0 { rep.avg_down } else { 0.0 };
            report.d_up = if wu > 0.0 { rep.avg_up } else { 0.0 };
            report.pon = Some(rep);
        } else {
            report.d_down = 0.0;
            report.d_up = 0.0;
        }

        let n = self.agg.n_frames as f64;
        let flows: Vec<WirelessFlow> = report
            .outcome
            .flows
            .iter()
            .filter(|f| f.path.wireless_hops() > 0)
            .map(|f| WirelessFlow {
                rate: f.rate / n,
                weight: f.weight,
                hops: f
                    .path
                    .hops
                    .iter()
                    .filter_map(|h| match h {
                        HopKind::Wireless(r) => Some(ws.nodes[r.0]),
                        _ => None,
                    })
                    .collect(),
            })
            .collect();
        let path = wireless_delay::path_delay(&flows)?;
        report.d_wi = path.mean;
        report.path = Some(path);
        report.d_total = report.d_down + report.d_up + report.d_wi;
        Ok(report)
    }

    fn hop_costs(&self, outcome: &RoutingOutcome, metric: Metric, cache: &mut ZoneCache) -> HopCosts {
        let t = &self.topology;
        let ws = self.wireless_state(outcome, Some(cache));
        let mut costs = HopCosts::uniform(t, 0.0);
        for (r, nd) in ws.nodes.iter().enumerate() {
            costs.radio[r] = match metric {
                Metric::Intensity => nd.intensity,
                Metric::Delay if nd.stable => nd.corrected,
                Metric::Delay => SATURATED_HOP_COST + nd.intensity.min(1e6),
            };
        }
        if let (Some((load, _)), Some(plant)) = (self.pon_loads(outcome), t.plant()) {
            for lam in 0..load.sectors() {
                let members: Vec<usize> = if plant.is_routed() {
                    plant.sector_members(lam).collect()
                } else {
                    (1..=t.onus()).collect()
                };
                let (down, up) = match metric {
                    Metric::Intensity => (load.down[lam], load.up[lam]),
                    Metric::Delay => match pon::sector_delay(&load, plant, lam, self.mean, self.var) {
                        Ok(s) => (s.down, s.up),
                        Err(_) => {
                            let sat = |rho: f64, d: f64| if rho < 1.0 { d } else { SATURATED_HOP_COST + rho };
                            let floor = plant.propagation(lam) + self.mean / plant.rate(lam);
                            (sat(load.down[lam], SATURATED_HOP_COST + floor), sat(load.up[lam], SATURATED_HOP_COST + floor))
                        }
                    },
                };
                for o in members {
                    costs.down[o] = down;
                    costs.up[o] = up;
                }
            }
        }
        costs
    }

    /// Largest relative residual of the DCF equations in a report.
    pub fn dcf_residual(&self, report: &DelayReport) -> Option<f64> {
        report.dcf.as_ref().map(|s| s.max_residual(&self.topology, &self.cfg.dcf))
    }
}

struct AnalyzerModel<'a> {
    analyzer: &'a Analyzer,
    cache: ZoneCache,
}

impl LoadModel for AnalyzerModel<'_> {
    fn hop_costs(&mut self, outcome: &RoutingOutcome, metric: Metric) -> HopCosts {
        self.analyzer.hop_costs(outcome, metric, &mut self.cache)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::topology::{FiberPlant, TopologySpec};
    use crate::traffic::ScenarioKind;

    fn fig4(routing: RoutingAlgo) -> Analyzer {
        let (spec, plant) = presets::fig4_topology();
        let t = Topology::build(&spec, Some(plant)).unwrap();
        Analyzer::new(t, AnalyzerConfig { routing, ..Default::default() }).unwrap()
    }

    #[test]
    fn zero_load_gives_floors() {
        let a = fig4(RoutingAlgo::MinInterference);
        let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::P2p, 0.0)).unwrap();
        assert!(r.is_stable());
        assert_eq!(r.throughput_bps, 0.0);
        assert!(r.d_total > 0.0 && r.d_total.is_finite());
        assert!(r.d_up >= 4e-4);
        let s = a.slot_times().success / (1.0 - a.error_prob());
        assert!(r.d_wi >= 2.0 * s);
    }

    #[test]
    fn delay_grows_with_load() {
        let a = fig4(RoutingAlgo::MinInterference);
        let rows = a.sweep(&ScenarioSpec::new(ScenarioKind::P2p, 0.0), &[0.0, 200.0, 400.0, 800.0]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].d_total > w[0].d_total);
        }
    }

    #[test]
    fn saturated_report_names_element() {
        let a = fig4(RoutingAlgo::MinHop);
        let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::P2p, 1e5)).unwrap();
        assert!(!r.is_stable());
        assert!(r.d_total.is_nan());
        assert!(matches!(r.status, Status::Saturated { rho, .. } if rho >= 1.0));
        assert!(r.max_rho >= 1.0);
    }

    #[test]
    fn pure_pon_traffic_has_no_wireless_delay() {
        let spec = TopologySpec { onu_mpp: vec![false; 4], stas: 0, mp_radios: vec![], maps: 0, zones: vec![] };
        let t = Topology::build(&spec, Some(FiberPlant::tdm(4, 1e9, 1e-4))).unwrap();
        let a = Analyzer::new(t, AnalyzerConfig::default()).unwrap();
        let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::Uniform, 1000.0)).unwrap();
        assert_eq!(r.d_wi, 0.0);
        let load = r.pon_load.as_ref().unwrap();
        let plant = a.topology().plant().unwrap();
        let rep = pon::delays(load, plant, 12000.0, 0.0).unwrap();
        assert!((r.d_down - rep.avg_down).abs() < 1e-18);
        assert!((r.d_up - rep.avg_up).abs() < 1e-18);
    }

    #[test]
    fn mesh_only_has_no_pon_delay() {
        let (spec, _) = presets::fig4_topology();
        let t = Topology::build(&spec, None).unwrap();
        let a = Analyzer::new(t, AnalyzerConfig { routing: RoutingAlgo::MinInterference, ..Default::default() }).unwrap();
        let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::P2p, 100.0)).unwrap();
        assert_eq!((r.d_down, r.d_up), (0.0, 0.0));
        assert!(r.d_wi > 0.0);
    }

    #[test]
    fn csv_output_shape() {
        let a = fig4(RoutingAlgo::MinHop);
        let rows = a.sweep(&ScenarioSpec::new(ScenarioKind::P2p, 0.0), &[0.0, 1e5]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, "test", &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# test");
        assert_eq!(lines[1], "alpha,throughput_bps,D_d_s,D_u_s,D_wi_s,D_s,stable,max_rho_node_id,max_rho");
        assert!(lines[2].contains(",true,"));
        assert!(lines[3].contains(",,,,,false,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn adaptive_routing_at_zero_load_matches_min_hop() {
        let hop = fig4(RoutingAlgo::MinHop);
        let ofra = fig4(RoutingAlgo::Ofra);
        let spec = ScenarioSpec::new(ScenarioKind::P2p, 0.0);
        let a = hop.evaluate_scenario(&spec).unwrap();
        let b = ofra.evaluate_scenario(&spec).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.d_total, b.d_total);
    }
}
