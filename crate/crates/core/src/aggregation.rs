//! A-MSDU / A-MPDU frame aggregation: aggregate size distribution, frames per
//! aggregate, longest colliding aggregate and aggregate error probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::FrameLengthDist;

/// Upper bound on the support of an aggregate size pmf.
pub const MAX_SUPPORT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    AMsdu,
    AMpdu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationConfig {
    pub scheme: Scheme,
    pub max_bytes: u64,
    /// A-MSDU subframe header or A-MPDU delimiter.
    pub subframe_overhead_bytes: u64,
    pub align_bytes: u64,
    pub mac_header_bytes: u64,
    pub fcs_bytes: u64,
}

impl AggregationConfig {
    pub fn a_msdu() -> Self {
        Self {
            scheme: Scheme::AMsdu,
            max_bytes: 7935,
            subframe_overhead_bytes: 14,
            align_bytes: 4,
            mac_header_bytes: 36,
            fcs_bytes: 4,
        }
    }

    pub fn a_mpdu() -> Self {
        Self { scheme: Scheme::AMpdu, max_bytes: 65535, subframe_overhead_bytes: 4, ..Self::a_msdu() }
    }

    pub fn vht(scheme: Scheme) -> Self {
        match scheme {
            Scheme::AMsdu => Self { max_bytes: 11406, ..Self::a_msdu() },
            Scheme::AMpdu => Self { max_bytes: 1_048_575, ..Self::a_mpdu() },
        }
    }

    /// MAC header plus FCS, in bits.
    pub fn mpdu_overhead_bits(&self) -> u64 {
        8 * (self.mac_header_bytes + self.fcs_bytes)
    }

    /// Overhead bits carried by every aggregated frame.
    fn per_frame_bits(&self) -> u64 {
        match self.scheme {
            Scheme::AMsdu => 8 * self.subframe_overhead_bytes,
            Scheme::AMpdu => 8 * self.subframe_overhead_bytes + self.mpdu_overhead_bits(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_bytes == 0 || self.align_bytes == 0 {
            return Err(Error::Config("aggregate limit and alignment must be positive".into()));
        }
        Ok(())
    }
}

/// Largest number of frames of the longest length that fit in one aggregate.
/// Every subframe except the last is padded to the alignment boundary.
pub fn frames_per_aggregate(dist: &FrameLengthDist, cfg: &AggregationConfig) -> Result<usize> {
    cfg.validate()?;
    let raw = dist.max_len() + cfg.per_frame_bits();
    let align = 8 * cfg.align_bytes;
    let padded = raw.div_ceil(align) * align;
    let max_bits = 8 * cfg.max_bytes;
    if raw > max_bits {
        return Err(Error::FrameTooLarge { frame_bits: raw, max_bits });
    }
    Ok(1 + ((max_bits - raw) / padded) as usize)
}

/// Payload size distribution of an aggregate of `n_frames` i.i.d. frames.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateDist {
    pub scheme: Scheme,
    pub n_frames: usize,
    pmf: Vec<(f64, f64)>,
    mean: f64,
    longest: f64,
    frame_overhead_bits: f64,
    mpdu_overhead_bits: f64,
}

impl AggregateDist {
    pub fn build(dist: &FrameLengthDist, cfg: &AggregationConfig) -> Result<Self> {
        let n = frames_per_aggregate(dist, cfg)?;
        let pmf = convolve_power(dist, n);
        let mean = pmf.iter().map(|(x, p)| x * p).sum();
        let longest = longest_of_two(&pmf);
        Ok(Self {
            scheme: cfg.scheme,
            n_frames: n,
            pmf,
            mean,
            longest,
            frame_overhead_bits: cfg.per_frame_bits() as f64,
            mpdu_overhead_bits: cfg.mpdu_overhead_bits() as f64,
        })
    }

    pub fn pmf(&self) -> &[(f64, f64)] {
        &self.pmf
    }

    /// Mean payload bits per aggregate.
    pub fn mean_payload(&self) -> f64 {
        self.mean
    }

    /// Mean payload bits of the longer of two colliding aggregates.
    pub fn longest_payload(&self) -> f64 {
        self.longest
    }

    /// Bits sent on air for an average aggregate, PHY header excluded.
    pub fn success_bits(&self) -> f64 {
        self.on_air(self.mean)
    }

    /// Bits sent on air for the longest of two colliding aggregates.
    pub fn collision_bits(&self) -> f64 {
        self.on_air(self.longest)
    }

    fn on_air(&self, payload: f64) -> f64 {
        match self.scheme {
            Scheme::AMsdu => self.mpdu_overhead_bits + payload,
            Scheme::AMpdu => payload + self.n_frames as f64 * self.frame_overhead_bits,
        }
    }
}

fn convolve_power(dist: &FrameLengthDist, n: usize) -> Vec<(f64, f64)> {
    let base: Vec<(f64, f64)> = dist.points().iter().map(|&(l, p)| (l as f64, p)).collect();
    let mut acc = base.clone();
    for _ in 1..n {
        let mut next = Vec::with_capacity(acc.len() * base.len());
        for &(x, p) in &acc {
            for &(y, q) in &base {
                next.push((x + y, p * q));
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
        for (x, p) in next {
            match merged.last_mut() {
                Some((last, q)) if *last == x => *q += p,
                _ => merged.push((x, p)),
            }
        }
        acc = if merged.len() > MAX_SUPPORT { quantile_bins(&merged, MAX_SUPPORT) } else { merged };
    }
    acc
}

/// Collapses a sorted pmf into at most `bins` points of roughly equal mass,
/// each placed at its conditional mean. Total mass and mean are preserved.
fn quantile_bins(sorted: &[(f64, f64)], bins: usize) -> Vec<(f64, f64)> {
    let target = 1.0 / bins as f64;
    let mut out = Vec::with_capacity(bins);
    let (mut mass, mut moment) = (0.0, 0.0);
    for (k, &(x, p)) in sorted.iter().enumerate() {
        mass += p;
        moment += x * p;
        let remaining_points = sorted.len() - k - 1;
        let remaining_bins = bins - out.len() - 1;
        if mass >= target || remaining_points <= remaining_bins {
            if mass > 0.0 {
                out.push((moment / mass, mass));
            }
            mass = 0.0;
            moment = 0.0;
        }
    }
    if mass > 0.0 {
        match out.last_mut() {
            Some((x, p)) => {
                let total = *p + mass;
                *x = (*x * *p + moment) / total;
                *p = total;
            }
            None => out.push((moment / mass, mass)),
        }
    }
    out
}

/// E[max(X1, X2)] for i.i.d. draws from a sorted pmf.
pub fn longest_of_two(sorted: &[(f64, f64)]) -> f64 {
    let mut cdf = 0.0f64;
    let mut total = 0.0;
    for &(x, p) in sorted {
        let next = cdf + p;
        total += x * (next * next - cdf * cdf);
        cdf = next;
    }
    total
}

/// Probability that an aggregate is corrupted at bit error rate `p_b`.
pub fn aggregate_error_prob(dist: &FrameLengthDist, agg: &AggregateDist, cfg: &AggregationConfig, p_b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_b) {
        return Err(Error::Config(format!("bit error rate {p_b} outside [0, 1)")));
    }
    if p_b == 0.0 {
        return Ok(0.0);
    }
    let log_keep = (-p_b).ln_1p();
    let overhead = cfg.mpdu_overhead_bits() as f64;
    Ok(match agg.scheme {
        Scheme::AMsdu => agg.pmf.iter().map(|&(x, p)| -p * ((x + overhead) * log_keep).exp_m1()).sum(),
        Scheme::AMpdu => {
            let frame_ok: f64 = dist.points().iter().map(|&(l, p)| p * ((l as f64 + overhead) * log_keep).exp()).sum();
            (1.0 - frame_ok).powi(agg.n_frames as i32)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixed() -> FrameLengthDist {
        FrameLengthDist::fixed_bytes(1500).unwrap()
    }

    #[test]
    fn five_frames_per_amsdu() {
        assert_eq!(frames_per_aggregate(&fixed(), &AggregationConfig::a_msdu()).unwrap(), 5);
    }

    #[test]
    fn seven_frames_per_vht_amsdu() {
        assert_eq!(frames_per_aggregate(&fixed(), &AggregationConfig::vht(Scheme::AMsdu)).unwrap(), 7);
    }

    #[test]
    fn exact_fit_gives_one_frame() {
        let cfg = AggregationConfig::a_msdu();
        let d = FrameLengthDist::point(8 * (7935 - 14)).unwrap();
        assert_eq!(frames_per_aggregate(&d, &cfg).unwrap(), 1);
        let too_big = FrameLengthDist::point(8 * 7935).unwrap();
        assert!(matches!(frames_per_aggregate(&too_big, &cfg), Err(Error::FrameTooLarge { .. })));
    }

    #[test]
    fn point_mass_convolution() {
        let agg = AggregateDist::build(&fixed(), &AggregationConfig::a_msdu()).unwrap();
        assert_eq!(agg.pmf(), &[(60000.0, 1.0)]);
        assert_eq!(agg.longest_payload(), 60000.0);
    }

    #[test]
    fn two_point_binomial() {
        let d = FrameLengthDist::new([(8000, 0.5), (16000, 0.5)]).unwrap();
        let pmf = convolve_power(&d, 2);
        assert_eq!(pmf, vec![(16000.0, 0.25), (24000.0, 0.5), (32000.0, 0.25)]);
        let mut brute = 0.0;
        for &(x, p) in &pmf {
            for &(y, q) in &pmf {
                brute += p * q * f64::max(x, y);
            }
        }
        assert_eq!(longest_of_two(&pmf), brute);
    }

    #[test]
    fn amsdu_error_probability() {
        let d = fixed();
        let cfg = AggregationConfig::a_msdu();
        let agg = AggregateDist::build(&d, &cfg).unwrap();
        let pe = aggregate_error_prob(&d, &agg, &cfg, 1e-6).unwrap();
        let want = 1.0 - (1.0f64 - 1e-6).powi(60320);
        assert!((pe - want).abs() < 1e-10, "{pe} {want}");
        assert!((pe - 0.0586).abs() < 1e-3);
        assert_eq!(aggregate_error_prob(&d, &agg, &cfg, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_frame_ampdu_matches_single_msdu() {
        let d = FrameLengthDist::point(8 * 60000).unwrap();
        let mpdu = AggregationConfig::a_mpdu();
        let msdu = AggregationConfig { max_bytes: 60014, ..AggregationConfig::a_msdu() };
        let a = AggregateDist::build(&d, &mpdu).unwrap();
        let b = AggregateDist::build(&d, &msdu).unwrap();
        assert_eq!((a.n_frames, b.n_frames), (1, 1));
        let pa = aggregate_error_prob(&d, &a, &mpdu, 1e-7).unwrap();
        let pb = aggregate_error_prob(&d, &b, &msdu, 1e-7).unwrap();
        assert!((pa - pb).abs() < 1e-15);
    }

    #[test]
    fn ampdu_airtime_counts_subframe_overhead() {
        let d = fixed();
        let cfg = AggregationConfig::a_mpdu();
        let agg = AggregateDist::build(&d, &cfg).unwrap();
        assert_eq!(agg.n_frames, 42);
        assert_eq!(agg.success_bits(), 42.0 * (12000.0 + 8.0 * 44.0));
    }

    #[test]
    fn binning_caps_support() {
        let points: Vec<(u64, f64)> = (1..=100).map(|k| (k * 97 + k * k, 0.01)).collect();
        let d = FrameLengthDist::new(points).unwrap();
        let cfg = AggregationConfig { max_bytes: 1_000_000, ..AggregationConfig::a_msdu() };
        let agg = AggregateDist::build(&d, &cfg).unwrap();
        assert!(agg.pmf().len() <= MAX_SUPPORT);
        let mass: f64 = agg.pmf().iter().map(|(_, p)| p).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let want = agg.n_frames as f64 * d.mean();
        assert!((agg.mean_payload() - want).abs() < 1e-9 * want);
    }

    proptest! {
        #[test]
        fn convolution_preserves_mass_and_mean(
            lens in prop::collection::vec(1u64..2000, 1..6),
            weights in prop::collection::vec(0.01f64..1.0, 6),
            n in 1usize..6,
        ) {
            let total: f64 = weights[..lens.len()].iter().sum();
            let mut pts: Vec<(u64, f64)> = lens.iter().zip(&weights).map(|(&l, &w)| (l * 8, w / total)).collect();
            let fix: f64 = 1.0 - pts.iter().map(|(_, p)| p).sum::<f64>();
            pts[0].1 += fix;
            let d = FrameLengthDist::new(pts).unwrap();
            let pmf = convolve_power(&d, n);
            let mass: f64 = pmf.iter().map(|(_, p)| p).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
            let mean: f64 = pmf.iter().map(|(x, p)| x * p).sum();
            prop_assert!((mean - n as f64 * d.mean()).abs() < 1e-9 * mean);
            prop_assert!(longest_of_two(&pmf) >= mean - 1e-9 * mean);
        }

        #[test]
        fn error_prob_increases_with_ber(a in 1e-9f64..1e-4, f in 1.01f64..10.0) {
            let d = FrameLengthDist::new([(320, 0.5), (4640, 0.25), (12000, 0.25)]).unwrap();
            for cfg in [AggregationConfig::a_msdu(), AggregationConfig::a_mpdu()] {
                let agg = AggregateDist::build(&d, &cfg).unwrap();
                let lo = aggregate_error_prob(&d, &agg, &cfg, a).unwrap();
                let hi = aggregate_error_prob(&d, &agg, &cfg, (a * f).min(0.5)).unwrap();
                prop_assert!(hi > lo);
            }
        }
    }
}
