//! Built-in network layouts.

use crate::topology::{FiberPlant, PonKind, TopologySpec};

/// Speed of light in fiber, m/s.
pub const FIBER_SPEED: f64 = 2e8;

pub fn propagation_for_km(km: f64) -> f64 {
    km * 1e3 / FIBER_SPEED
}

/// The verification network: 4 ONU/MPPs, 4 MPs with 3, 4, 4, 3 radios and
/// 16 STAs over 11 zones, on a 1 Gb/s TDM PON at 20 km.
///
/// Zones 1-4 hold one MPP, two STAs and one MP each, zones 5-7 chain the MPs
/// and zones 8-11 attach two further STAs to each MP.
pub fn fig4_topology() -> (TopologySpec, FiberPlant) {
    let spec = mesh_copies(1);
    (spec, FiberPlant::tdm(4, 1e9, propagation_for_km(20.0)))
}

/// Two copies of [`fig4_topology`] behind one wavelength-routed PON with two
/// sectors of four ONUs.
pub fn fig4x2_topology() -> (TopologySpec, FiberPlant) {
    let spec = mesh_copies(2);
    let psi = propagation_for_km(20.0);
    (spec, FiberPlant::wavelength_routed(vec![4, 4], vec![1e9; 2], vec![psi; 2]))
}

/// A fiber plant of the requested kind for `onus` ONUs split into
/// `channels` equal sectors (WR) or shared channels (broadcast).
pub fn plant(kind: PonKind, onus: usize, channels: usize, rate_bps: f64, km: f64) -> FiberPlant {
    let psi = propagation_for_km(km);
    match kind {
        PonKind::Tdm => FiberPlant::tdm(onus, rate_bps, psi),
        PonKind::WdmBroadcast => FiberPlant::wdm_broadcast(onus, channels, rate_bps, psi),
        PonKind::WavelengthRouted => {
            let base = onus / channels;
            let extra = onus % channels;
            let sizes = (0..channels).map(|l| base + usize::from(l < extra)).collect();
            FiberPlant::wavelength_routed(sizes, vec![rate_bps; channels], vec![psi; channels])
        }
    }
}

fn mesh_copies(copies: usize) -> TopologySpec {
    let onus = 4 * copies;
    let mps = 4 * copies;
    let mut mp_radios = Vec::with_capacity(mps);
    let mut zones: Vec<Vec<String>> = Vec::new();
    for c in 0..copies {
        let onu = |k: usize| format!("ONU{}", 4 * c + k);
        let mp = |k: usize| format!("MP{}", 4 * c + k);
        let sta = |k: usize| format!("STA{}", 16 * c + k);
        mp_radios.extend([3, 4, 4, 3]);
        for k in 1..=4 {
            zones.push(vec![onu(k), sta(2 * k - 1), sta(2 * k), mp(k)]);
        }
        for k in 1..=3 {
            zones.push(vec![mp(k), mp(k + 1)]);
        }
        for k in 1..=4 {
            zones.push(vec![mp(k), sta(8 + 2 * k - 1), sta(8 + 2 * k)]);
        }
    }
    TopologySpec { onu_mpp: vec![true; onus], stas: 16 * copies, mp_radios, maps: 0, zones }
}
