//! Discrete-event simulator of the FiWi network: slotted CSMA/CA per zone
//! with binary exponential backoff and post-backoff, RTS/CTS or basic access
//! and bit errors, and a PON with gated polling upstream and FIFO channels
//! downstream.
//!
//! Traffic enters as Poisson streams of full aggregates on the routes of a
//! [`RoutingOutcome`]. Replications run in parallel, each on its own
//! ChaCha8 stream derived from the seed.

mod engine;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::evaluator::Analyzer;
use crate::routing::RoutingOutcome;

pub use engine::RepStats;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub duration_s: f64,
    pub warmup_s: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { duration_s: 60.0, warmup_s: 10.0, replications: 20, seed: 1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > self.warmup_s && self.warmup_s >= 0.0) {
            return Err(Error::Config("simulation needs duration > warmup >= 0".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("at least one replication is required".into()));
        }
        Ok(())
    }
}

/// Mean over replications and the half-width of its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let xs: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, half_width: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, half_width: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom").inverse_cdf(0.975);
        Self { mean, half_width: t * (var / n as f64).sqrt() }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.mean).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub seed: u64,
    /// Mean end-to-end delay of delivered aggregates, s.
    pub delay: Estimate,
    /// Sum of the upstream, downstream and wireless segment means, each over
    /// the aggregates that cross the segment; untraversed segments count 0.
    pub composite: Estimate,
    pub delay_up: Estimate,
    pub delay_down: Estimate,
    pub delay_wireless: Estimate,
    /// Delivered payload, bit/s.
    pub throughput_bps: Estimate,
    pub offered_bps: f64,
    /// Collided share of transmission attempts per radio, pooled over
    /// replications; `None` for radios that never transmitted.
    pub radio_collision: Vec<Option<f64>>,
    /// Attempt-weighted collision share per zone.
    pub zone_collision: Vec<Option<f64>>,
    pub generated: u64,
    pub delivered: u64,
    pub replications: Vec<RepStats>,
}

/// Runs all replications of the routed traffic of `outcome`.
pub fn run_sim(analyzer: &Analyzer, outcome: &RoutingOutcome, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let model = engine::Model::new(analyzer, outcome)?;
    let reps: Vec<RepStats> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| engine::replicate(&model, cfg, r as u64))
        .collect();

    let pick = |f: &dyn Fn(&RepStats) -> f64| Estimate::from_samples(&reps.iter().map(f).collect::<Vec<_>>());
    let radios = analyzer.topology().radios().len();
    let mut attempts = vec![0u64; radios];
    let mut collisions = vec![0u64; radios];
    for rep in &reps {
        for r in 0..radios {
            attempts[r] += rep.attempts[r];
            collisions[r] += rep.collisions[r];
        }
    }
    let ratio = |c: u64, a: u64| if a > 0 { Some(c as f64 / a as f64) } else { None };
    let radio_collision = (0..radios).map(|r| ratio(collisions[r], attempts[r])).collect();
    let zone_collision = analyzer
        .topology()
        .zones()
        .iter()
        .map(|z| {
            let a: u64 = z.members.iter().map(|r| attempts[r.0]).sum();
            let c: u64 = z.members.iter().map(|r| collisions[r.0]).sum();
            ratio(c, a)
        })
        .collect();

    Ok(SimResult {
        seed: cfg.seed,
        delay: pick(&|r| r.mean_delay()),
        composite: pick(&|r| r.composite_delay()),
        delay_up: pick(&|r| r.up.mean()),
        delay_down: pick(&|r| r.down.mean()),
        delay_wireless: pick(&|r| r.wireless.mean()),
        throughput_bps: pick(&|r| r.delivered_bits / (cfg.duration_s - cfg.warmup_s)),
        offered_bps: outcome.offered() * analyzer.config().frame.mean(),
        radio_collision,
        zone_collision,
        generated: reps.iter().map(|r| r.generated).sum(),
        delivered: reps.iter().map(|r| r.delivered).sum(),
        replications: reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant_samples() {
        let e = Estimate::from_samples(&[2.0, 2.0, 2.0]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.half_width, 0.0);
        assert!(Estimate::from_samples(&[]).mean.is_nan());
    }

    #[test]
    fn estimate_half_width() {
        let e = Estimate::from_samples(&[1.0, 3.0]);
        // t(0.975, 1) = 12.7062..., s = sqrt(2), n = 2.
        assert!((e.half_width - 12.706204736174698).abs() < 1e-9);
        assert_eq!(e.mean, 2.0);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert!(SimConfig { warmup_s: 60.0, ..Default::default() }.validate().is_err());
        assert!(SimConfig { replications: 0, ..Default::default() }.validate().is_err());
    }
}
