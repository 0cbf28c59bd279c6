//! Service times, sensing delay and M/M/1 nodal delay of WMN radios, and the
//! traffic-weighted path delay of the wireless front-end.

use crate::dcf::{DcfParams, SlotTimes};
use crate::error::{Error, Result};

/// Σ_{b≥1} p^b · mean backoff before retransmission b.
///
/// Stages above H all use the largest window, so the tail past H is geometric.
fn expected_backoff(p: f64, params: &DcfParams) -> f64 {
    let mut head = 0.0;
    let mut pb = 1.0;
    for b in 1..=params.h {
        pb *= p;
        head += params.backoff_stage_mean(b) * pb;
    }
    let tail = params.backoff_stage_mean(params.h) * pb * p / (1.0 - p);
    head + tail
}

/// Mean service time of an aggregate under basic access, retrying after
/// collisions and transmission errors alike.
pub fn service_time_basic(p: f64, slots: SlotTimes, params: &DcfParams) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Divergent(p));
    }
    Ok(expected_backoff(p, params) + slots.collision * p / (1.0 - p) + slots.success)
}

/// Mean service time under RTS/CTS: collisions hit the RTS only, while a
/// transmission error repeats the whole reservation and aggregate.
pub fn service_time_rtscts(p_e: f64, p_c: f64, slots: SlotTimes, params: &DcfParams) -> Result<f64> {
    for p in [p_e, p_c] {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Divergent(p));
        }
    }
    let attempt = expected_backoff(p_c, params) + slots.collision * p_c / (1.0 - p_c) + slots.success;
    Ok(attempt / (1.0 - p_e))
}

/// Sensing delay of every radio of a zone from the loads and service times of
/// the other radios.
///
/// The printed forms σ/(1/Δ)·Δ are evaluated as σΔ² (first step) and
/// σ(Δ_ser + D_sen)² (second step).
pub fn sensing_delay(sigma: &[f64], service: &[f64]) -> Vec<f64> {
    let load: Vec<f64> = sigma.iter().zip(service).map(|(s, d)| s * d * d).collect();
    let total: f64 = load.iter().sum();
    let first: Vec<f64> = load.iter().map(|l| total - l).collect();
    let second: Vec<f64> = sigma
        .iter()
        .zip(service)
        .zip(&first)
        .map(|((s, d), f)| {
            let busy = d + f;
            s * busy * busy
        })
        .collect();
    let total2: f64 = second.iter().sum();
    second.iter().map(|x| (total2 - x).max(0.0)).collect()
}

/// M/M/1 sojourn time of a radio with load `sigma` and service time `delta`.
pub fn node_delay(sigma: f64, delta: f64) -> Result<f64> {
    let rho = sigma * delta;
    if !(rho < 1.0) {
        return Err(Error::Saturated { rho });
    }
    Ok(1.0 / (1.0 / delta - sigma))
}

/// Queueing delay correction of one flow through a radio.
pub fn flow_correction(gamma: f64, delta: f64) -> Result<f64> {
    let rho = gamma * delta;
    if !(rho < 1.0) {
        return Err(Error::Saturated { rho });
    }
    Ok(gamma * delta / (1.0 / delta - gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeDelay {
    pub service: f64,
    pub sensing: f64,
    pub delta: f64,
    pub delay: f64,
    /// Delay after the ONU/MPP correction (equal to `delay` elsewhere).
    pub corrected: f64,
    pub mpp_correction: f64,
    pub intensity: f64,
    pub stable: bool,
}

impl NodeDelay {
    pub fn new(sigma: f64, service: f64, sensing: f64) -> Self {
        let delta = service + sensing;
        let intensity = sigma * delta;
        let stable = intensity < 1.0;
        let delay = if stable { 1.0 / (1.0 / delta - sigma) } else { f64::INFINITY };
        Self { service, sensing, delta, delay, corrected: delay, mpp_correction: 0.0, intensity, stable }
    }

    /// Subtracts an ONU/MPP correction, never going below the service time.
    pub fn with_mpp_correction(mut self, phi: f64) -> Self {
        if self.stable {
            self.corrected = (self.delay - phi).max(self.delta);
            self.mpp_correction = self.delay - self.corrected;
        }
        self
    }
}

/// One wireless flow: its rate (aggregates/s) and the delays of the radios
/// that transmit it.
#[derive(Debug, Clone, PartialEq)]
pub struct WirelessFlow {
    pub rate: f64,
    /// Weight in the average; frames/s of the flow's wireless traffic.
    pub weight: f64,
    pub hops: Vec<NodeDelay>,
}

/// Weighted mean path delay and the per-flow corrected delays.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDelay {
    pub mean: f64,
    pub uncorrected_mean: f64,
    pub per_flow: Vec<f64>,
}

pub fn path_delay(flows: &[WirelessFlow]) -> Result<PathDelay> {
    let total: f64 = flows.iter().map(|f| f.weight).sum();
    let mut per_flow = Vec::with_capacity(flows.len());
    if total <= 0.0 {
        return Ok(PathDelay { mean: 0.0, uncorrected_mean: 0.0, per_flow: vec![0.0; flows.len()] });
    }
    let (mut mean, mut raw) = (0.0, 0.0);
    for f in flows {
        let mut sum = 0.0;
        let mut sum_raw = 0.0;
        for hop in &f.hops {
            if !hop.stable {
                return Err(Error::Saturated { rho: hop.intensity });
            }
            let b = flow_correction(f.rate, hop.delta)?;
            sum += (hop.corrected - b).max(0.0);
            sum_raw += hop.corrected;
        }
        mean += f.weight / total * sum;
        raw += f.weight / total * sum_raw;
        per_flow.push(sum);
    }
    Ok(PathDelay { mean, uncorrected_mean: raw, per_flow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slots() -> SlotTimes {
        SlotTimes { success: 3.2e-4, collision: 3.787e-5 }
    }

    #[test]
    fn no_retries_costs_one_transmission() {
        let p = DcfParams::default();
        assert_eq!(service_time_basic(0.0, slots(), &p).unwrap(), 3.2e-4);
        assert_eq!(service_time_rtscts(0.0, 0.0, slots(), &p).unwrap(), 3.2e-4);
        assert!(service_time_basic(1.0, slots(), &p).is_err());
        assert!(service_time_rtscts(0.1, 1.0, slots(), &p).is_err());
    }

    #[test]
    fn basic_increases_with_p() {
        let p = DcfParams::default();
        let mut last = 0.0;
        for k in 1..=9 {
            let d = service_time_basic(k as f64 / 10.0, slots(), &p).unwrap();
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn sensing_cases() {
        assert_eq!(sensing_delay(&[100.0], &[1e-3]), vec![0.0]);
        assert_eq!(sensing_delay(&[100.0, 0.0, 0.0], &[1e-3; 3])[0], 0.0);
        let s = sensing_delay(&[50.0; 3], &[1e-3; 3]);
        assert!(s[0] > 0.0 && s[0] == s[1] && s[1] == s[2]);
        let d1 = 50.0 * 1e-6;
        let first = 2.0 * d1;
        let want = 2.0 * 50.0 * (1e-3 + first) * (1e-3 + first);
        assert!((s[0] - want).abs() < 1e-18);
    }

    #[test]
    fn mm1_delay() {
        assert_eq!(node_delay(0.0, 1e-3).unwrap(), 1e-3);
        assert!((node_delay(500.0, 1e-3).unwrap() - 2e-3).abs() < 1e-15);
        assert!(matches!(node_delay(1000.0, 1e-3), Err(Error::Saturated { .. })));
    }

    #[test]
    fn mpp_correction_floors_at_service() {
        let n = NodeDelay::new(500.0, 1e-3, 0.0).with_mpp_correction(5e-3);
        assert_eq!(n.corrected, 1e-3);
        let plain = NodeDelay::new(500.0, 1e-3, 0.0).with_mpp_correction(0.0);
        assert_eq!(plain.corrected, plain.delay);
    }

    #[test]
    fn path_delay_cases() {
        let hop = NodeDelay::new(200.0, 1e-3, 0.0);
        let tiny = WirelessFlow { rate: 1e-9, weight: 1.0, hops: vec![hop] };
        let d = path_delay(&[tiny]).unwrap();
        assert!((d.mean - hop.delay).abs() < 1e-12);
        assert_eq!(path_delay(&[]).unwrap().mean, 0.0);
        let f = WirelessFlow { rate: 100.0, weight: 5.0, hops: vec![hop] };
        let two = path_delay(&[f.clone(), f.clone()]).unwrap();
        let one = path_delay(&[f]).unwrap();
        assert!((two.mean - one.mean).abs() < 1e-18);
        assert!(one.mean < hop.delay);
    }

    proptest! {
        #[test]
        fn delay_grows_with_load(delta in 1e-5f64..1e-2, a in 0.0f64..0.98, b in 0.0f64..0.98) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi > lo);
            let d_lo = node_delay(lo / delta, delta).unwrap();
            let d_hi = node_delay(hi / delta, delta).unwrap();
            prop_assert!(d_hi > d_lo);
            prop_assert!(d_lo >= delta);
        }
    }
}
