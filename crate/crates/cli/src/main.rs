use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fiwi::config::{Mode, RunConfig};
use fiwi::evaluator::{write_csv, Analyzer, DelayReport};
use fiwi::routing::RoutingAlgo;
use fiwi::sim::{run_sim, SimResult};
use fiwi::traffic::ScenarioKind;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Analyze,
    Simulate,
    Compare,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analyze => Mode::Analyze,
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::Compare => Mode::Compare,
        }
    }
}

/// Delay and throughput of fiber-wireless access networks.
#[derive(Debug, Parser)]
#[command(name = "fiwi", version)]
struct Cli {
    /// analyze, simulate or compare; overrides the mode in the config.
    #[arg(value_enum)]
    command: Option<ModeArg>,

    /// Run configuration file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Bundled configuration: fig4, fig4x2 or vht.
    #[arg(long)]
    preset: Option<String>,

    #[arg(long, value_enum)]
    mode: Option<ModeArg>,

    /// min-hop, min-interference, min-delay or ofra.
    #[arg(long)]
    routing: Option<String>,

    /// p2p, upstream, uniform, nonuniform or b-matrix.
    #[arg(long)]
    scenario: Option<String>,

    /// Per-flow rate(s); replaces the sweep in the config.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,

    /// Traffic ratio of the b-matrix scenario.
    #[arg(long = "B")]
    b: Option<f64>,

    /// Cut the distribution fiber of this ONU (1-based); repeatable.
    #[arg(long = "fail-fiber")]
    fail_fiber: Vec<usize>,

    /// Simulation seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV path; `-` for stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Saturated(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("FIWI_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FIWI_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Saturated(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::load(path).map_err(usage)?,
        (None, Some(name)) => RunConfig::preset(name).map_err(usage)?,
        (None, None) => return Err(Failure::Usage("one of --config or --preset is required".into())),
    };
    if let Some(m) = cli.mode.or(cli.command) {
        cfg.mode = m.into();
    }
    if let Some(r) = &cli.routing {
        cfg.routing = r.parse::<RoutingAlgo>().map_err(usage)?;
    }
    if let Some(s) = &cli.scenario {
        cfg.scenario.kind = s.parse::<ScenarioKind>().map_err(usage)?;
    }
    if !cli.alpha.is_empty() {
        cfg.scenario.alphas = cli.alpha.clone();
    }
    if let Some(b) = cli.b {
        cfg.scenario.b = b;
    }
    cfg.failures.fibers.extend(&cli.fail_fiber);
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(out) = &cli.output {
        cfg.output = Some(out.clone());
        cfg.base_dir = None;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load(&cli)?;
    let topology = cfg.build_topology().map_err(usage)?;
    let analyzer = Analyzer::new(topology, cfg.analyzer_config().map_err(usage)?).map_err(usage)?;
    let alphas = cfg.scenario.alphas.clone();
    let reports: Vec<DelayReport> = alphas
        .iter()
        .map(|&a| analyzer.evaluate_scenario(&cfg.scenario_spec(a)))
        .collect::<Result<_, _>>()
        .map_err(usage)?;

    let comment = format!(
        "fiwi {} mode={} routing={} scenario={} config={} seed={}",
        env!("CARGO_PKG_VERSION"),
        mode_name(cfg.mode),
        cfg.routing.name(),
        cfg.scenario.kind.name(),
        cfg.hash(),
        cfg.sim.seed
    );

    let mut buf = Vec::new();
    match cfg.mode {
        Mode::Analyze => write_csv(&mut buf, &comment, &reports).map_err(usage)?,
        Mode::Simulate | Mode::Compare => {
            let sim_cfg = cfg.sim_config();
            let sims: Vec<SimResult> = reports
                .iter()
                .map(|r| run_sim(&analyzer, &r.outcome, &sim_cfg))
                .collect::<Result<_, _>>()
                .map_err(usage)?;
            write_sim_csv(&mut buf, &comment, cfg.mode, &reports, &sims).map_err(usage)?;
        }
    }
    emit(cfg.output_path(), &buf)?;

    if cfg.mode == Mode::Analyze && reports.iter().all(|r| !r.is_stable()) {
        let worst = &reports[0];
        return Err(Failure::Saturated(format!(
            "every point of the sweep is unstable; at alpha={} the bottleneck is node {} (rho={:.4})",
            worst.alpha, worst.max_rho_node, worst.max_rho
        )));
    }
    Ok(())
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Analyze => "analyze",
        Mode::Simulate => "simulate",
        Mode::Compare => "compare",
    }
}

fn emit(path: Option<PathBuf>, buf: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::write(&p, buf).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))
        }
        _ => std::io::stdout().write_all(buf).map_err(usage),
    }
}

fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

fn write_sim_csv(
    out: &mut Vec<u8>,
    comment: &str,
    mode: Mode,
    reports: &[DelayReport],
    sims: &[SimResult],
) -> Result<(), Box<dyn std::error::Error>> {
    writeln!(out, "# {comment}")?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let sim_cols = [
        "sim_throughput_bps",
        "sim_throughput_ci_bps",
        "sim_D_d_s",
        "sim_D_d_ci_s",
        "sim_D_u_s",
        "sim_D_u_ci_s",
        "sim_D_wi_s",
        "sim_D_wi_ci_s",
        "sim_D_s",
        "sim_D_ci_s",
        "sim_e2e_s",
        "sim_e2e_ci_s",
    ];
    let mut header: Vec<&str> = match mode {
        Mode::Compare => DelayReport::csv_header().to_vec(),
        _ => vec!["alpha", "max_rho_node_id", "max_rho"],
    };
    header.extend(sim_cols);
    if mode == Mode::Compare {
        header.push("rel_error");
    }
    w.write_record(&header)?;
    for (r, s) in reports.iter().zip(sims) {
        let mut rec = match mode {
            Mode::Compare => r.csv_record(),
            _ => vec![r.alpha.to_string(), r.max_rho_node.to_string(), format!("{:.9}", r.max_rho)],
        };
        for e in [s.throughput_bps, s.delay_down, s.delay_up, s.delay_wireless, s.composite, s.delay] {
            rec.push(sci(e.mean));
            rec.push(sci(e.half_width));
        }
        if mode == Mode::Compare {
            let rel = if r.is_stable() { (r.d_total - s.composite.mean) / s.composite.mean } else { f64::NAN };
            rec.push(sci(rel));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
