use fiwi::dcf::DcfParams;
use fiwi::evaluator::{AnalyzerConfig, Analyzer};
use fiwi::presets;
use fiwi::routing::RoutingAlgo;
use fiwi::sim::{run_sim, SimConfig};
use fiwi::topology::{NodeRole, Topology, TopologySpec};
use fiwi::traffic::{ScenarioKind, ScenarioSpec, TrafficMatrix};

fn pair_analyzer() -> Analyzer {
    let spec = TopologySpec {
        onu_mpp: vec![],
        stas: 2,
        mp_radios: vec![],
        maps: 0,
        zones: vec![vec!["STA1".into(), "STA2".into()]],
    };
    let t = Topology::build(&spec, None).unwrap();
    let cfg = AnalyzerConfig { dcf: DcfParams { bit_error_rate: 0.0, ..DcfParams::default() }, ..Default::default() };
    Analyzer::new(t, cfg).unwrap()
}

fn sta(a: &Analyzer, k: usize) -> usize {
    a.topology().nodes().iter().filter(|n| n.role == NodeRole::Sta).nth(k).unwrap().id.0
}

fn quick() -> SimConfig {
    SimConfig { duration_s: 20.0, warmup_s: 2.0, replications: 8, seed: 11 }
}

#[test]
fn lone_sender_pays_no_backoff_at_light_load() {
    let a = pair_analyzer();
    let n = a.aggregate().n_frames as f64;
    let sigma = 40.0;
    let mut m = TrafficMatrix::zeros(a.topology().nodes().len());
    m.set(sta(&a, 0), sta(&a, 1), sigma * n).unwrap();
    let report = a.evaluate(&m).unwrap();
    let sim = run_sim(&a, &report.outcome, &quick()).unwrap();

    // Post-backoff is over before almost every arrival, so the head packet
    // goes out at once: delay is T_s plus rare waits.
    let ts = a.slot_times().success;
    let eps = a.config().dcf.slot_s;
    let w = a.config().dcf.w0 as f64;
    let busy = sigma * (ts + (w - 1.0) / 2.0 * eps);
    assert!(sim.delay.mean > ts);
    assert!(sim.delay.mean < ts * (1.0 + busy), "sim {:?} T_s {ts:e}", sim.delay);
    assert!((sim.delay.mean - report.d_wi).abs() / report.d_wi < 0.02);
    assert_eq!(sim.radio_collision.iter().flatten().copied().fold(0.0, f64::max), 0.0);
}

#[test]
fn zero_traffic_gives_no_samples() {
    let a = pair_analyzer();
    let m = TrafficMatrix::zeros(a.topology().nodes().len());
    let report = a.evaluate(&m).unwrap();
    let sim = run_sim(&a, &report.outcome, &quick()).unwrap();
    assert_eq!(sim.generated, 0);
    assert_eq!(sim.delivered, 0);
    assert_eq!(sim.throughput_bps.mean, 0.0);
    assert!(sim.delay.mean.is_nan());
}

fn fig4() -> Analyzer {
    let (spec, plant) = presets::fig4_topology();
    let t = Topology::build(&spec, Some(plant)).unwrap();
    Analyzer::new(t, AnalyzerConfig { routing: RoutingAlgo::MinHop, ..Default::default() }).unwrap()
}

#[test]
fn same_seed_same_result() {
    let a = fig4();
    let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::P2p, 300.0)).unwrap();
    let cfg = SimConfig { duration_s: 3.0, warmup_s: 0.5, replications: 3, seed: 5 };
    let x = run_sim(&a, &r.outcome, &cfg).unwrap();
    let y = run_sim(&a, &r.outcome, &cfg).unwrap();
    assert_eq!(x, y);
    let z = run_sim(&a, &r.outcome, &SimConfig { seed: 6, ..cfg }).unwrap();
    assert_ne!(x.delay, z.delay);
}

#[test]
fn stable_load_conserves_frames() {
    let a = fig4();
    let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::Upstream, 300.0)).unwrap();
    assert!(r.is_stable());
    let cfg = SimConfig { duration_s: 100.0, warmup_s: 5.0, replications: 2, seed: 3 };
    let sim = run_sim(&a, &r.outcome, &cfg).unwrap();
    assert!(sim.delivered <= sim.generated);
    let share = sim.delivered as f64 / sim.generated as f64;
    assert!((share - 1.0).abs() < 0.01, "delivered share {share}");
    let rel = (sim.throughput_bps.mean - sim.offered_bps).abs() / sim.offered_bps;
    assert!(rel < 0.01, "throughput {} offered {}", sim.throughput_bps.mean, sim.offered_bps);
}

#[test]
fn overload_is_reported_not_thrown() {
    let a = fig4();
    let r = a.evaluate_scenario(&ScenarioSpec::new(ScenarioKind::P2p, 5000.0)).unwrap();
    assert!(!r.is_stable());
    let cfg = SimConfig { duration_s: 2.0, warmup_s: 0.5, replications: 2, seed: 1 };
    let sim = run_sim(&a, &r.outcome, &cfg).unwrap();
    assert!(sim.delivered < sim.generated);
    assert!(sim.replications.iter().all(|rep| rep.backlog > 0));
}
