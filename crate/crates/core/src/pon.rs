//! PON backhaul capacity and delay.
//!
//! Fiber traffic enters the analysis as a segment matrix `G`: `G[o][q]` is the
//! frame rate that enters the fiber plant at node `o` (OLT = 0, ONUs 1..=O)
//! and leaves it at node `q`. ONU-to-ONU segments are relayed by the OLT.
//! Broadcast PONs (TDM and wavelength-broadcasting WDM) are handled as a
//! single sector served by `Λ` channels.

use crate::error::{Error, Result};
use crate::topology::FiberPlant;

#[derive(Debug, Clone, PartialEq)]
pub struct FiberFlows {
    onus: usize,
    g: Vec<f64>,
}

impl FiberFlows {
    pub fn zeros(onus: usize) -> Self {
        Self { onus, g: vec![0.0; (onus + 1) * (onus + 1)] }
    }

    pub fn onus(&self) -> usize {
        self.onus
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.g[from * (self.onus + 1) + to]
    }

    pub fn add(&mut self, from: usize, to: usize, rate: f64) {
        self.g[from * (self.onus + 1) + to] += rate;
    }

    pub fn total(&self) -> f64 {
        self.g.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { onus: self.onus, g: self.g.iter().map(|x| x * factor).collect() }
    }
}

/// Intensities per sector; broadcast PONs have a single sector.
#[derive(Debug, Clone, PartialEq)]
pub struct PonLoad {
    pub down: Vec<f64>,
    pub up: Vec<f64>,
    /// `cross[υ][λ]`: intensity of ONU traffic from sector υ relayed into
    /// sector λ. For broadcast PONs the single entry covers all inter-ONU traffic.
    pub cross: Vec<Vec<f64>>,
    pub routed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

impl PonLoad {
    pub fn sectors(&self) -> usize {
        self.down.len()
    }

    /// Largest intensity with its direction and sector.
    pub fn max_intensity(&self) -> (Direction, usize, f64) {
        let mut best = (Direction::Down, 0, f64::NEG_INFINITY);
        for (dir, v) in [(Direction::Down, &self.down), (Direction::Up, &self.up)] {
            for (s, &rho) in v.iter().enumerate() {
                if rho > best.2 {
                    best = (dir, s, rho);
                }
            }
        }
        best
    }

    /// Per-sector verdicts `(down, up)`: true when the intensity is below 1.
    pub fn stable_sectors(&self) -> Vec<(bool, bool)> {
        self.down.iter().zip(&self.up).map(|(&d, &u)| (d < 1.0, u < 1.0)).collect()
    }

    pub fn stable(&self) -> bool {
        self.stable_sectors().iter().all(|&(d, u)| d && u)
    }
}

pub fn wr_intensities(flows: &FiberFlows, plant: &FiberPlant, mean_bits: f64) -> PonLoad {
    let sectors = plant.sectors();
    let members: Vec<Vec<usize>> = (0..sectors).map(|s| plant.sector_members(s).collect()).collect();
    let all = 1..=flows.onus();
    let mut down = vec![0.0; sectors];
    let mut up = vec![0.0; sectors];
    let mut cross = vec![vec![0.0; sectors]; sectors];
    for (lam, onus) in members.iter().enumerate() {
        let scale = mean_bits / plant.rate(lam);
        let d: f64 = onus.iter().map(|&o| flows.get(0, o) + all.clone().map(|q| flows.get(q, o)).sum::<f64>()).sum();
        let u: f64 = onus.iter().map(|&o| flows.get(o, 0) + all.clone().map(|q| flows.get(o, q)).sum::<f64>()).sum();
        down[lam] = scale * d;
        up[lam] = scale * u;
        for (dest, dests) in members.iter().enumerate() {
            let rate: f64 = onus.iter().flat_map(|&o| dests.iter().map(move |&q| (o, q))).map(|(o, q)| flows.get(o, q)).sum();
            cross[lam][dest] = scale * rate;
        }
    }
    PonLoad { down, up, cross, routed: true }
}

pub fn broadcast_intensities(flows: &FiberFlows, plant: &FiberPlant, mean_bits: f64) -> PonLoad {
    let scale = mean_bits / (plant.channels as f64 * plant.rate(0));
    let o = flows.onus();
    let (mut down, mut up, mut relay) = (0.0, 0.0, 0.0);
    for from in 0..=o {
        for to in 0..=o {
            let g = flows.get(from, to);
            if from >= 1 {
                up += g;
            }
            if to >= 1 {
                down += g;
            }
            if from >= 1 && to >= 1 {
                relay += g;
            }
        }
    }
    PonLoad { down: vec![scale * down], up: vec![scale * up], cross: vec![vec![scale * relay]], routed: false }
}

pub fn intensities(flows: &FiberFlows, plant: &FiberPlant, mean_bits: f64) -> PonLoad {
    if plant.is_routed() {
        wr_intensities(flows, plant, mean_bits)
    } else {
        broadcast_intensities(flows, plant, mean_bits)
    }
}

/// Pollaczek-Khintchine mean waiting time for frames of the given moments on
/// a channel of rate `c` at intensity `rho`.
pub fn pk_phi(rho: f64, c: f64, mean_bits: f64, var_bits: f64) -> Result<f64> {
    if !(rho < 1.0) {
        return Err(Error::Saturated { rho });
    }
    if rho <= 0.0 {
        return Ok(0.0);
    }
    Ok(rho / (2.0 * c * (1.0 - rho)) * (var_bits / mean_bits + mean_bits))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PonDelayReport {
    pub down_raw: Vec<f64>,
    pub up_raw: Vec<f64>,
    pub down_correction: Vec<f64>,
    pub up_correction: Vec<f64>,
    pub down: Vec<f64>,
    pub up: Vec<f64>,
    /// Propagation plus transmission floor per sector.
    pub floor: Vec<f64>,
    pub avg_down: f64,
    pub avg_up: f64,
    /// Sector rates differ, so relayed-traffic corrections use the rate of
    /// the originating sector.
    pub heterogeneous: bool,
}

/// Delays of one sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorDelay {
    pub down_raw: f64,
    pub up_raw: f64,
    pub down_correction: f64,
    pub up_correction: f64,
    pub down: f64,
    pub up: f64,
    pub floor: f64,
}

pub fn sector_delay(load: &PonLoad, plant: &FiberPlant, lam: usize, mean_bits: f64, var_bits: f64) -> Result<SectorDelay> {
    let c = plant.rate(lam);
    let psi = plant.propagation(lam);
    let tx = mean_bits / c;
    let ru = load.up[lam];
    let down_raw = pk_phi(load.down[lam], c, mean_bits, var_bits)? + tx + psi;
    let up_raw = pk_phi(ru, c, mean_bits, var_bits)? + tx + 2.0 * psi * (2.0 - ru) / (1.0 - ru);
    let mut b = 0.0;
    for (origin, row) in load.cross.iter().enumerate() {
        b += pk_phi(row[lam], plant.rate(origin), mean_bits, var_bits)?;
    }
    let bu = if load.routed { 0.0 } else { b };
    let floor = psi + tx;
    Ok(SectorDelay {
        down_raw,
        up_raw,
        down_correction: b,
        up_correction: bu,
        down: (down_raw - b).max(floor),
        up: (up_raw - bu).max(floor),
        floor,
    })
}

pub fn delays(load: &PonLoad, plant: &FiberPlant, mean_bits: f64, var_bits: f64) -> Result<PonDelayReport> {
    let sectors = load.sectors();
    let heterogeneous = plant.rates_bps.windows(2).any(|w| w[0] != w[1]);
    let mut rep = PonDelayReport {
        down_raw: Vec::with_capacity(sectors),
        up_raw: Vec::with_capacity(sectors),
        down_correction: Vec::with_capacity(sectors),
        up_correction: Vec::with_capacity(sectors),
        down: Vec::with_capacity(sectors),
        up: Vec::with_capacity(sectors),
        floor: Vec::with_capacity(sectors),
        avg_down: 0.0,
        avg_up: 0.0,
        heterogeneous,
    };
    for lam in 0..sectors {
        let s = sector_delay(load, plant, lam, mean_bits, var_bits)?;
        rep.down_raw.push(s.down_raw);
        rep.up_raw.push(s.up_raw);
        rep.down_correction.push(s.down_correction);
        rep.up_correction.push(s.up_correction);
        rep.down.push(s.down);
        rep.up.push(s.up);
        rep.floor.push(s.floor);
    }
    rep.avg_down = weighted_mean(&rep.down, &load.down);
    rep.avg_up = weighted_mean(&rep.up, &load.up);
    Ok(rep)
}

/// Intensity-weighted mean; the plain mean when all weights vanish.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
