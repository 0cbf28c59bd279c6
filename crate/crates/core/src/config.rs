//! Run configuration documents (TOML) and the bundled presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{AggregationConfig, Scheme};
use crate::dcf::{DcfParams, SolverOptions};
use crate::error::{Error, Result};
use crate::evaluator::AnalyzerConfig;
use crate::presets;
use crate::routing::RoutingAlgo;
use crate::sim::SimConfig;
use crate::topology::{FailureSet, FiberPlant, NodeId, PonKind, Topology, TopologySpec};
use crate::traffic::{FrameLengthDist, ScenarioKind, ScenarioSpec};

pub const CONFIG_VERSION: u32 = 1;

const FIG4: &str = include_str!("../presets/fig4.cfg");
const FIG4X2: &str = include_str!("../presets/fig4x2.cfg");
const VHT: &str = include_str!("../presets/vht.cfg");

/// Names accepted by [`RunConfig::preset`].
pub const PRESETS: [&str; 3] = ["fig4", "fig4x2", "vht"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Analyze,
    Simulate,
    Compare,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analyze" => Ok(Self::Analyze),
            "simulate" => Ok(Self::Simulate),
            "compare" => Ok(Self::Compare),
            other => Err(Error::Config(format!("unknown mode {other}"))),
        }
    }
}

/// Node layout: a built-in layout name, a TOML file holding a
/// [`TopologySpec`], or an inline spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<TopologySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PonSetting {
    /// Wireless mesh only.
    None,
    Tdm,
    WdmBroadcast,
    WavelengthRouted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PonSection {
    pub kind: PonSetting,
    #[serde(default = "one")]
    pub channels: usize,
    #[serde(default = "gigabit")]
    pub rate_bps: f64,
    #[serde(default = "twenty")]
    pub distance_km: f64,
    /// Explicit sector sizes for a wavelength-routed plant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector_sizes: Option<Vec<usize>>,
}

fn one() -> usize {
    1
}

fn gigabit() -> f64 {
    1e9
}

fn twenty() -> f64 {
    20.0
}

impl Default for PonSection {
    fn default() -> Self {
        Self { kind: PonSetting::Tdm, channels: 1, rate_bps: 1e9, distance_km: 20.0, sector_sizes: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    /// Frame lengths in bytes.
    pub lengths_bytes: Vec<u64>,
    /// Probabilities of the lengths; uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

impl Default for FrameSection {
    fn default() -> Self {
        Self { lengths_bytes: vec![1500], probabilities: None }
    }
}

impl FrameSection {
    pub fn distribution(&self) -> Result<FrameLengthDist> {
        let n = self.lengths_bytes.len();
        let probs = match &self.probabilities {
            Some(p) if p.len() != n => {
                return Err(Error::Config("frame.probabilities must match frame.lengths_bytes".into()))
            }
            Some(p) => p.clone(),
            None => vec![1.0 / n.max(1) as f64; n],
        };
        FrameLengthDist::new(self.lengths_bytes.iter().map(|b| 8 * b).zip(probs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationSection {
    pub scheme: Scheme,
    /// Overrides the standard aggregate limit of the scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bytes: Option<u64>,
}

impl Default for AggregationSection {
    fn default() -> Self {
        Self { scheme: Scheme::AMsdu, max_bytes: None }
    }
}

impl AggregationSection {
    pub fn resolve(&self) -> AggregationConfig {
        let base = match self.scheme {
            Scheme::AMsdu => AggregationConfig::a_msdu(),
            Scheme::AMpdu => AggregationConfig::a_mpdu(),
        };
        AggregationConfig { max_bytes: self.max_bytes.unwrap_or(base.max_bytes), ..base }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    pub alphas: Vec<f64>,
    #[serde(default = "unit")]
    pub b: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { kind: ScenarioKind::P2p, alphas: vec![0.0], b: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FailureSection {
    /// ONU indices (1-based) whose distribution fiber is cut.
    #[serde(default)]
    pub fibers: Vec<usize>,
    /// Node ids taken out of service.
    #[serde(default)]
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub duration_s: f64,
    pub warmup_s: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { duration_s: 60.0, warmup_s: 10.0, replications: 20, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_routing")]
    pub routing: RoutingAlgo,
    #[serde(default)]
    pub topology: TopologySection,
    #[serde(default)]
    pub pon: PonSection,
    #[serde(default)]
    pub wlan: DcfParams,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub aggregation: AggregationSection,
    #[serde(default)]
    pub frame: FrameSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub failures: FailureSection,
    #[serde(default)]
    pub sim: SimSection,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_routing() -> RoutingAlgo {
    RoutingAlgo::MinHop
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(format_toml_error(text, &e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        if let Some(file) = &cfg.topology.file {
            let full = cfg.resolve_path(file);
            if !full.exists() {
                return Err(Error::Config(format!("topology file {} does not exist", full.display())));
            }
        }
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "fig4" => FIG4,
            "fig4x2" => FIG4X2,
            "vht" => VHT,
            other => return Err(Error::Config(format!("unknown preset {other}"))),
        };
        Self::parse(text)
    }

    /// Canonical TOML form with every field spelled out.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical form, first 16 digits.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        if self.scenario.alphas.is_empty() {
            return Err(Error::Config("scenario.alphas must not be empty".into()));
        }
        if self.scenario.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Config("scenario.alphas must be finite and non-negative".into()));
        }
        let t = &self.topology;
        let sources = t.preset.is_some() as u8 + t.file.is_some() as u8 + t.spec.is_some() as u8;
        if sources > 1 {
            return Err(Error::Config("topology needs exactly one of preset, file or spec".into()));
        }
        if let Some(p) = &t.preset {
            if !matches!(p.as_str(), "fig4" | "fig4x2") {
                return Err(Error::Config(format!("unknown topology preset {p}")));
            }
        }
        if self.pon.channels == 0 {
            return Err(Error::Config("pon.channels must be positive".into()));
        }
        let s = &self.sim;
        if !(s.duration_s > s.warmup_s && s.warmup_s >= 0.0) || s.replications == 0 {
            return Err(Error::Config("sim needs duration_s > warmup_s >= 0 and replications >= 1".into()));
        }
        self.wlan.validate()
    }

    fn resolve_path(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|p| self.resolve_path(p))
    }

    pub fn topology_spec(&self) -> Result<TopologySpec> {
        let t = &self.topology;
        if let Some(spec) = &t.spec {
            return Ok(spec.clone());
        }
        if let Some(file) = &t.file {
            let path = self.resolve_path(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            return toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), format_toml_error(&text, &e))));
        }
        match t.preset.as_deref().unwrap_or("fig4") {
            "fig4x2" => Ok(presets::fig4x2_topology().0),
            _ => Ok(presets::fig4_topology().0),
        }
    }

    pub fn plant(&self, onus: usize) -> Result<Option<FiberPlant>> {
        let p = &self.pon;
        let psi = presets::propagation_for_km(p.distance_km);
        let plant = match p.kind {
            PonSetting::None => return Ok(None),
            PonSetting::Tdm => presets::plant(PonKind::Tdm, onus, 1, p.rate_bps, p.distance_km),
            PonSetting::WdmBroadcast => presets::plant(PonKind::WdmBroadcast, onus, p.channels, p.rate_bps, p.distance_km),
            PonSetting::WavelengthRouted => match &p.sector_sizes {
                Some(sizes) => {
                    let n = sizes.len();
                    FiberPlant::wavelength_routed(sizes.clone(), vec![p.rate_bps; n], vec![psi; n])
                }
                None => presets::plant(PonKind::WavelengthRouted, onus, p.channels, p.rate_bps, p.distance_km),
            },
        };
        plant.validate()?;
        Ok(Some(plant))
    }

    pub fn failures(&self) -> FailureSet {
        FailureSet {
            fibers: self.failures.fibers.iter().map(|&o| NodeId(o)).collect(),
            nodes: self.failures.nodes.iter().map(|&n| NodeId(n)).collect(),
        }
    }

    /// The network with failures applied.
    pub fn build_topology(&self) -> Result<Topology> {
        let spec = self.topology_spec()?;
        let plant = self.plant(spec.onu_mpp.len())?;
        let t = Topology::build(&spec, plant)?;
        let failures = self.failures();
        if failures.is_empty() {
            Ok(t)
        } else {
            t.apply_failures(&failures)
        }
    }

    pub fn analyzer_config(&self) -> Result<AnalyzerConfig> {
        Ok(AnalyzerConfig {
            frame: self.frame.distribution()?,
            aggregation: self.aggregation.resolve(),
            dcf: self.wlan.clone(),
            solver: self.solver,
            routing: self.routing,
        })
    }

    pub fn scenario_spec(&self, alpha: f64) -> ScenarioSpec {
        ScenarioSpec::new(self.scenario.kind, alpha).with_b(self.scenario.b)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            duration_s: self.sim.duration_s,
            warmup_s: self.sim.warmup_s,
            replications: self.sim.replications,
            seed: self.sim.seed,
        }
    }
}

fn format_toml_error(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim_end();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {msg}")
        }
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_build() {
        for name in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            cfg.build_topology().unwrap();
            cfg.analyzer_config().unwrap();
        }
    }

    #[test]
    fn canonical_round_trip() {
        for name in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            let text = cfg.to_canonical();
            let again = RunConfig::parse(&text).unwrap();
            assert_eq!(cfg, again);
            assert_eq!(text, again.to_canonical());
        }
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = RunConfig::parse("version = 1\n").unwrap();
        assert_eq!(cfg.wlan, DcfParams::default());
        assert_eq!(cfg.aggregation.resolve(), AggregationConfig::a_msdu());
        assert_eq!(cfg.pon, PonSection::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::parse("version = 1\n[wlan]\nrate_bps = \"fast\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = RunConfig::parse("version = 1\nbogus = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(RunConfig::parse("version = 2\n").is_err());
        assert!(RunConfig::parse("version = 1\n[scenario]\nkind = \"p2p\"\nalphas = []\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::preset("fig4").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.scenario.b = 2.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn failures_apply() {
        let mut cfg = RunConfig::preset("fig4").unwrap();
        cfg.failures.fibers = vec![1];
        let t = cfg.build_topology().unwrap();
        assert!(!t.fiber_link(NodeId(1)));
        assert!(t.fiber_link(NodeId(2)));
    }
}
