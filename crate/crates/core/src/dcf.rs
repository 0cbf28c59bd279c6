//! Nonsaturated 802.11 DCF model per zone.
//!
//! Each radio ω carries the unknowns (q, p, τ) and each zone the mean slot
//! length E. Zones only interact through their offered loads σ, so every zone
//! is solved on its own by damped fixed-point iteration on τ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::AggregateDist;
use crate::error::{Error, Result};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Access {
    Basic,
    RtsCts,
}

/// MAC/PHY timing. Durations in seconds, control frames in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcfParams {
    pub w0: u32,
    pub h: u32,
    pub slot_s: f64,
    pub sifs_s: f64,
    pub difs_s: f64,
    pub phy_header_s: f64,
    pub rts_bits: f64,
    pub cts_bits: f64,
    pub ack_bits: f64,
    pub rate_bps: f64,
    pub propagation_s: f64,
    pub bit_error_rate: f64,
    pub access: Access,
}

impl Default for DcfParams {
    fn default() -> Self {
        Self {
            w0: 16,
            h: 6,
            slot_s: 9e-6,
            sifs_s: 16e-6,
            difs_s: 34e-6,
            phy_header_s: 20e-6,
            rts_bits: 160.0,
            cts_bits: 112.0,
            ack_bits: 112.0,
            rate_bps: 300e6,
            propagation_s: 1.0 / 3.0 * 1e-5,
            bit_error_rate: 1e-6,
            access: Access::RtsCts,
        }
    }
}

impl DcfParams {
    pub fn validate(&self) -> Result<()> {
        if self.w0 < 2 {
            return Err(Error::Config("W0 must be at least 2".into()));
        }
        if self.h > 30 {
            return Err(Error::Config("maximum backoff stage must be at most 30".into()));
        }
        let durations = [self.slot_s, self.sifs_s, self.difs_s, self.phy_header_s, self.rate_bps];
        if durations.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Config("slot, SIFS, DIFS, PHY header and rate must be positive".into()));
        }
        if [self.rts_bits, self.cts_bits, self.ack_bits, self.propagation_s].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config("control frame sizes and propagation must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.bit_error_rate) {
            return Err(Error::Config("bit error rate must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Mean backoff before the b-th retransmission, b >= 1.
    pub fn backoff_stage_mean(&self, b: u32) -> f64 {
        let stage = b.min(self.h);
        ((1u64 << stage) as f64 * self.w0 as f64 - 1.0) / 2.0 * self.slot_s
    }
}

/// Mean durations of a successful and a collided aggregate transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotTimes {
    pub success: f64,
    pub collision: f64,
}

pub fn slot_durations(params: &DcfParams, agg: &AggregateDist) -> SlotTimes {
    let r = params.rate_bps;
    let d = params.propagation_s;
    match params.access {
        Access::Basic => {
            let theta_s = params.difs_s + params.phy_header_s + params.sifs_s + d + params.ack_bits / r + d;
            let theta_c = params.phy_header_s + params.difs_s + d;
            SlotTimes { success: theta_s + agg.success_bits() / r, collision: theta_c + agg.collision_bits() / r }
        }
        Access::RtsCts => {
            let theta_s = params.difs_s
                + params.rts_bits / r
                + params.sifs_s
                + d
                + params.cts_bits / r
                + params.sifs_s
                + d
                + params.phy_header_s
                + params.sifs_s
                + d
                + params.ack_bits / r
                + d;
            SlotTimes { success: theta_s + agg.success_bits() / r, collision: params.rts_bits / r + params.difs_s + d }
        }
    }
}

/// `[1 - p - p(2p)^(H-1)] / (1 - 2p)` written as the polynomial it reduces
/// to, so p = 1/2 needs no special case.
fn stage_ratio(p: f64, h: u32) -> f64 {
    if h == 0 {
        return 0.5;
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..h.saturating_sub(1) {
        sum += term;
        term *= 2.0 * p;
    }
    1.0 + p * sum
}

/// Transmission probability of a nonsaturated station with queue-occupancy
/// probability `q` and failure probability `p`.
///
/// Numerator and η are both multiplied by 1 - q before dividing, which keeps
/// the expression finite at q = 1.
pub fn tau_of(q: f64, p: f64, w0: u32, h: u32) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let w = w0 as f64;
    let u = 1.0 - q;
    let g = -(w * (-q).ln_1p()).exp_m1();
    let ok = 1.0 - p;
    let num = q * q * w / (ok * g) - q * q * ok;
    let x = 2.0 * w * stage_ratio(p, h) + 1.0;
    let eta = u * q * w / g
        + q * w * (q * w + 3.0 * q - 2.0) / (2.0 * g)
        + u * u
        + q * (w + 1.0) * (p * u - q * ok * ok) / 2.0
        + p * q * q / (2.0 * ok) * (w / g - ok * ok) * x;
    num / eta
}

/// 1 - p_c for every radio: product of (1 - τ) over the other radios.
pub fn idle_others(taus: &[f64]) -> Vec<f64> {
    let n = taus.len();
    let mut out = vec![1.0; n];
    let mut prefix = 1.0;
    for i in 0..n {
        out[i] = prefix;
        prefix *= 1.0 - taus[i];
    }
    let mut suffix = 1.0;
    for i in (0..n).rev() {
        out[i] *= suffix;
        suffix *= 1.0 - taus[i];
    }
    out
}

pub fn collision_prob(taus: &[f64], radio: usize) -> f64 {
    1.0 - idle_others(taus)[radio]
}

/// Zone transmission and success probabilities (P_tr, P_s).
pub fn zone_probabilities(taus: &[f64]) -> (f64, f64) {
    let log_idle: f64 = taus.iter().map(|t| (-t).ln_1p()).sum();
    let p_tr = -log_idle.exp_m1();
    if p_tr <= 0.0 {
        return (0.0, 1.0);
    }
    let others = idle_others(taus);
    let single: f64 = taus.iter().zip(&others).map(|(t, o)| t * o).sum();
    (p_tr, (single / p_tr).min(1.0))
}

pub fn expected_slot(p_tr: f64, p_s: f64, slots: SlotTimes, slot_s: f64) -> f64 {
    (1.0 - p_tr) * slot_s + p_tr * (p_s * slots.success + (1.0 - p_s) * slots.collision)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { damping: 0.5, tolerance: 1e-11, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioState {
    pub sigma: f64,
    pub q: f64,
    pub p: f64,
    pub p_c: f64,
    pub tau: f64,
    /// Queue is practically never empty (q within 1e-12 of 1).
    pub q_saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneState {
    pub p_tr: f64,
    pub p_s: f64,
    pub t_s: f64,
    pub t_c: f64,
    pub e: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcfSolution {
    /// Indexed by radio id.
    pub radios: Vec<RadioState>,
    /// Indexed by zone id.
    pub zones: Vec<ZoneState>,
    pub p_e: f64,
}

impl DcfSolution {
    /// Largest relative violation of the four defining equations.
    pub fn max_residual(&self, topology: &Topology, params: &DcfParams) -> f64 {
        let mut worst = 0.0f64;
        for zone in topology.zones() {
            let members = &zone.members;
            let taus: Vec<f64> = members.iter().map(|r| self.radios[r.0].tau).collect();
            let zs = &self.zones[zone.id.0];
            let (p_tr, p_s) = zone_probabilities(&taus);
            let e = expected_slot(p_tr, p_s, SlotTimes { success: zs.t_s, collision: zs.t_c }, params.slot_s);
            worst = worst.max(rel(e, zs.e));
            let others = idle_others(&taus);
            for (k, r) in members.iter().enumerate() {
                let st = &self.radios[r.0];
                worst = worst.max(rel(1.0 - st.q, (-st.sigma * zs.e).exp()));
                let p = 1.0 - (1.0 - self.p_e) * others[k];
                worst = worst.max(rel(p, st.p));
                worst = worst.max(rel(tau_of(st.q, st.p, params.w0, params.h), st.tau));
            }
        }
        worst
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

struct ZoneEval {
    q: Vec<f64>,
    p: Vec<f64>,
    p_c: Vec<f64>,
    tau: Vec<f64>,
    p_tr: f64,
    p_s: f64,
    e: f64,
}

fn evaluate_zone(taus: &[f64], sigmas: &[f64], slots: SlotTimes, p_e: f64, params: &DcfParams) -> ZoneEval {
    let (p_tr, p_s) = zone_probabilities(taus);
    let e = expected_slot(p_tr, p_s, slots, params.slot_s);
    let others = idle_others(taus);
    let n = taus.len();
    let (mut q, mut p, mut p_c, mut tau) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        q[k] = -(-sigmas[k] * e).exp_m1();
        p_c[k] = 1.0 - others[k];
        p[k] = 1.0 - (1.0 - p_e) * others[k];
        tau[k] = tau_of(q[k], p[k], params.w0, params.h);
    }
    ZoneEval { q, p, p_c, tau, p_tr, p_s, e }
}

/// Solves one zone. `zone` is only used for error reporting.
pub fn solve_zone(
    zone: usize,
    sigmas: &[f64],
    slots: SlotTimes,
    p_e: f64,
    params: &DcfParams,
    opts: &SolverOptions,
) -> Result<(Vec<RadioState>, ZoneState)> {
    if !(p_e < 1.0) {
        return Err(Error::Divergent(p_e));
    }
    let mut taus: Vec<f64> = vec![0.0; sigmas.len()];
    let mut damping = opts.damping;
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;
    loop {
        let eval = evaluate_zone(&taus, sigmas, slots, p_e, params);
        let residual = taus.iter().zip(&eval.tau).map(|(&a, &b)| rel(a, b)).fold(0.0, f64::max);
        if residual < opts.tolerance {
            let radios = (0..sigmas.len())
                .map(|k| RadioState {
                    sigma: sigmas[k],
                    q: eval.q[k],
                    p: eval.p[k],
                    p_c: eval.p_c[k],
                    tau: taus[k],
                    q_saturated: eval.q[k] > 1.0 - 1e-12,
                })
                .collect();
            let zs = ZoneState { p_tr: eval.p_tr, p_s: eval.p_s, t_s: slots.success, t_c: slots.collision, e: eval.e, iterations };
            return Ok((radios, zs));
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence { zone, iterations, residual });
        }
        if residual > last_residual && damping > 1e-3 {
            damping *= 0.5;
        }
        last_residual = residual;
        for (t, new) in taus.iter_mut().zip(&eval.tau) {
            *t += damping * (new - *t);
        }
        iterations += 1;
    }
}

/// Solves every zone of the topology for per-radio loads `sigma`
/// (aggregates/s, indexed by radio id).
pub fn solve_fixed_point(
    topology: &Topology,
    sigma: &[f64],
    params: &DcfParams,
    slots: SlotTimes,
    p_e: f64,
    opts: &SolverOptions,
) -> Result<DcfSolution> {
    if let Some(s) = sigma.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::Config(format!("radio load {s} must be non-negative")));
    }
    let solved: Vec<Result<(Vec<RadioState>, ZoneState)>> = topology
        .zones()
        .par_iter()
        .map(|zone| {
            let sig: Vec<f64> = zone.members.iter().map(|r| sigma[r.0]).collect();
            solve_zone(zone.id.0, &sig, slots, p_e, params, opts)
        })
        .collect();
    let idle = RadioState { sigma: 0.0, q: 0.0, p: p_e, p_c: 0.0, tau: 0.0, q_saturated: false };
    let mut radios = vec![idle; topology.radios().len()];
    let mut zones = Vec::with_capacity(solved.len());
    for (zone, res) in topology.zones().iter().zip(solved) {
        let (states, zs) = res?;
        for (r, st) in zone.members.iter().zip(states) {
            radios[r.0] = st;
        }
        zones.push(zs);
    }
    Ok(DcfSolution { radios, zones, p_e })
}
