//! Network graph of a fiber-wireless access network.
//!
//! Node indices follow a fixed layout so that traffic-matrix rows line up with
//! node ids: the OLT is node 0, ONUs are `1..=O`, stations are `O+1..=O+N`, and
//! the pure forwarding nodes (mesh points, mesh access points) come after.
//! Wireless connectivity is zone membership: two radios in the same zone reach
//! each other in one hop, and contention only happens inside a zone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const OLT: NodeId = NodeId(0);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadioId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZoneId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Olt,
    Onu,
    OnuMpp,
    MpRelay,
    Map,
    Sta,
}

impl NodeRole {
    /// Nodes allowed to sit in the middle of a path.
    pub fn forwards(self) -> bool {
        !matches!(self, NodeRole::Sta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PonKind {
    Tdm,
    WdmBroadcast,
    WavelengthRouted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub role: NodeRole,
    pub name: String,
    pub radios: Vec<RadioId>,
    /// Distribution fiber to the OLT is intact (ONUs only).
    pub fiber: bool,
    pub removed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Radio {
    pub id: RadioId,
    pub owner: NodeId,
    pub zone: ZoneId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: ZoneId,
    pub members: Vec<RadioId>,
    /// Radios of multi-radio relay MPs (R_z).
    pub relay: Vec<RadioId>,
    /// Radios of single-radio nodes (L_z).
    pub single: Vec<RadioId>,
}

/// Optical backhaul parameters.
///
/// For TDM and wavelength-broadcasting PONs `rates_bps` and `propagation_s`
/// hold a single entry shared by all channels and `sector_sizes` is `[O]`.
/// For the wavelength-routed PON each vector has one entry per sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPlant {
    pub kind: PonKind,
    pub channels: usize,
    pub sector_sizes: Vec<usize>,
    pub rates_bps: Vec<f64>,
    pub propagation_s: Vec<f64>,
}

impl FiberPlant {
    pub fn tdm(onus: usize, rate_bps: f64, propagation_s: f64) -> Self {
        Self {
            kind: PonKind::Tdm,
            channels: 1,
            sector_sizes: vec![onus],
            rates_bps: vec![rate_bps],
            propagation_s: vec![propagation_s],
        }
    }

    pub fn wdm_broadcast(onus: usize, channels: usize, rate_bps: f64, propagation_s: f64) -> Self {
        Self {
            kind: PonKind::WdmBroadcast,
            channels,
            sector_sizes: vec![onus],
            rates_bps: vec![rate_bps],
            propagation_s: vec![propagation_s],
        }
    }

    pub fn wavelength_routed(sector_sizes: Vec<usize>, rates_bps: Vec<f64>, propagation_s: Vec<f64>) -> Self {
        Self {
            kind: PonKind::WavelengthRouted,
            channels: sector_sizes.len(),
            sector_sizes,
            rates_bps,
            propagation_s,
        }
    }

    pub fn is_routed(&self) -> bool {
        self.kind == PonKind::WavelengthRouted
    }

    pub fn onus(&self) -> usize {
        self.sector_sizes.iter().sum()
    }

    pub fn sectors(&self) -> usize {
        self.sector_sizes.len()
    }

    /// 0-based sector holding `onu` (ONUs are numbered from 1).
    pub fn sector_of(&self, onu: usize) -> Result<usize> {
        let total = self.onus();
        if onu == 0 || onu > total {
            return Err(Error::OnuOutOfRange { onu, onus: total });
        }
        let mut upper = 0;
        for (sector, size) in self.sector_sizes.iter().enumerate() {
            upper += size;
            if onu <= upper {
                return Ok(sector);
            }
        }
        unreachable!("onu bounded by the sector total")
    }

    /// Channel rate of a sector (the shared rate for broadcast PONs).
    pub fn rate(&self, sector: usize) -> f64 {
        self.rates_bps[sector.min(self.rates_bps.len() - 1)]
    }

    pub fn propagation(&self, sector: usize) -> f64 {
        self.propagation_s[sector.min(self.propagation_s.len() - 1)]
    }

    /// ONU ids (1-based) of a sector.
    pub fn sector_members(&self, sector: usize) -> std::ops::RangeInclusive<usize> {
        let start: usize = self.sector_sizes[..sector].iter().sum();
        start + 1..=start + self.sector_sizes[sector]
    }

    pub fn validate(&self) -> Result<()> {
        if self.sector_sizes.is_empty() {
            return Err(Error::Topology("fiber plant has no sectors".into()));
        }
        if self.channels == 0 {
            return Err(Error::Topology("fiber plant needs at least one channel".into()));
        }
        if self.kind == PonKind::Tdm && self.channels != 1 {
            return Err(Error::Topology("a TDM PON has exactly one channel".into()));
        }
        if self.is_routed() && self.sector_sizes.len() != self.channels {
            return Err(Error::Topology("a wavelength-routed PON needs one sector per channel".into()));
        }
        if self.rates_bps.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Topology("channel rates must be positive".into()));
        }
        if self.propagation_s.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Topology("propagation delays must be non-negative".into()));
        }
        let expected = if self.is_routed() { self.channels } else { 1 };
        if self.rates_bps.len() != expected || self.propagation_s.len() != expected {
            return Err(Error::Topology(format!(
                "expected {expected} channel rate/propagation entries"
            )));
        }
        Ok(())
    }
}

/// Declarative description of the node population and zones.
///
/// Zone members are node names: `ONU<k>`, `STA<k>`, `MP<k>`, `MAP<k>` (1-based).
/// A relay MP listed in several zones owns one radio in each of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    /// MPP flag per ONU; ONU k is entry k-1.
    pub onu_mpp: Vec<bool>,
    pub stas: usize,
    /// Radio count per relay MP.
    #[serde(default)]
    pub mp_radios: Vec<usize>,
    #[serde(default)]
    pub maps: usize,
    pub zones: Vec<Vec<String>>,
}

/// Nodes failed by a scenario: cut distribution fibers and dead nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailureSet {
    pub fibers: BTreeSet<NodeId>,
    pub nodes: BTreeSet<NodeId>,
}

impl FailureSet {
    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty() && self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    radios: Vec<Radio>,
    zones: Vec<Zone>,
    plant: Option<FiberPlant>,
    onus: usize,
    stas: usize,
}

impl Topology {
    /// Builds and validates a topology. `plant = None` gives a mesh-only
    /// network in which the MPP-equipped ONUs act as ordinary relay MPs.
    pub fn build(spec: &TopologySpec, plant: Option<FiberPlant>) -> Result<Self> {
        let onus = spec.onu_mpp.len();
        let stas = spec.stas;
        if let Some(plant) = &plant {
            plant.validate()?;
            if plant.onus() != onus {
                return Err(Error::Topology(format!(
                    "sectors cover {} ONUs but the topology has {onus}",
                    plant.onus()
                )));
            }
        }

        let mut nodes = Vec::with_capacity(1 + onus + stas + spec.mp_radios.len() + spec.maps);
        let mut names = BTreeMap::new();
        let mut push = |nodes: &mut Vec<Node>, role: NodeRole, name: String, fiber: bool, removed: bool| {
            let id = NodeId(nodes.len());
            names.insert(name.clone(), id);
            nodes.push(Node { id, role, name, radios: Vec::new(), fiber, removed });
        };
        let has_plant = plant.is_some();
        push(&mut nodes, NodeRole::Olt, "OLT".into(), false, !has_plant);
        for (k, &mpp) in spec.onu_mpp.iter().enumerate() {
            let role = match (has_plant, mpp) {
                (true, true) => NodeRole::OnuMpp,
                (true, false) => NodeRole::Onu,
                (false, true) => NodeRole::MpRelay,
                (false, false) => NodeRole::Onu,
            };
            push(&mut nodes, role, format!("ONU{}", k + 1), has_plant, !has_plant && !mpp);
        }
        for k in 0..stas {
            push(&mut nodes, NodeRole::Sta, format!("STA{}", k + 1), false, false);
        }
        for k in 0..spec.mp_radios.len() {
            push(&mut nodes, NodeRole::MpRelay, format!("MP{}", k + 1), false, false);
        }
        for k in 0..spec.maps {
            push(&mut nodes, NodeRole::Map, format!("MAP{}", k + 1), false, false);
        }

        let wireless_capable = |id: NodeId, nodes: &[Node]| -> bool {
            let idx = id.0;
            if idx == 0 {
                return false;
            }
            if idx <= onus {
                return spec.onu_mpp[idx - 1];
            }
            !matches!(nodes[idx].role, NodeRole::Olt)
        };

        let mut radios = Vec::new();
        let mut zones = Vec::with_capacity(spec.zones.len());
        for (z, members) in spec.zones.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Topology(format!("zone {} is empty", z + 1)));
            }
            let zone_id = ZoneId(z);
            let mut seen = BTreeSet::new();
            let mut zone_radios = Vec::with_capacity(members.len());
            for name in members {
                let id = *names
                    .get(name.as_str())
                    .ok_or_else(|| Error::Topology(format!("zone {} lists unknown node {name}", z + 1)))?;
                if !wireless_capable(id, &nodes) {
                    return Err(Error::Topology(format!("{name} has no radio and cannot join zone {}", z + 1)));
                }
                if !seen.insert(id) {
                    return Err(Error::Topology(format!("{name} appears twice in zone {}", z + 1)));
                }
                let rid = RadioId(radios.len());
                radios.push(Radio { id: rid, owner: id, zone: zone_id });
                nodes[id.0].radios.push(rid);
                zone_radios.push(rid);
            }
            zones.push(Zone { id: zone_id, members: zone_radios, relay: Vec::new(), single: Vec::new() });
        }

        let mp_base = 1 + onus + stas;
        for node in &nodes {
            let expected = if node.id.0 >= mp_base && node.id.0 < mp_base + spec.mp_radios.len() {
                Some(spec.mp_radios[node.id.0 - mp_base])
            } else if wireless_capable(node.id, &nodes) {
                Some(1)
            } else {
                None
            };
            match expected {
                Some(n) if node.radios.len() > n && n == 1 => {
                    return Err(Error::Topology(format!(
                        "single-radio node {} is listed in {} zones",
                        node.name,
                        node.radios.len()
                    )))
                }
                Some(n) if node.radios.len() != n => {
                    return Err(Error::Topology(format!(
                        "{} declares {n} radio(s) but is a member of {} zone(s)",
                        node.name,
                        node.radios.len()
                    )))
                }
                _ => {}
            }
        }

        for zone in &mut zones {
            for &rid in &zone.members {
                if nodes[radios[rid.0].owner.0].radios.len() > 1 {
                    zone.relay.push(rid);
                } else {
                    zone.single.push(rid);
                }
            }
        }

        Ok(Self { nodes, radios, zones, plant, onus, stas })
    }

    /// Applies fiber cuts and node failures. Cut ONU/MPPs keep their radio as
    /// plain relay MPs; failed nodes leave both graphs.
    pub fn apply_failures(&self, failures: &FailureSet) -> Result<Self> {
        let mut out = self.clone();
        for &id in &failures.fibers {
            if id.0 == 0 || id.0 > self.onus {
                return Err(Error::UnknownNode(id));
            }
            let node = &mut out.nodes[id.0];
            node.fiber = false;
            if node.role == NodeRole::OnuMpp {
                node.role = NodeRole::MpRelay;
            }
        }
        for &id in &failures.nodes {
            let node = out.nodes.get_mut(id.0).ok_or(Error::UnknownNode(id))?;
            node.removed = true;
        }
        Ok(out)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn radios(&self) -> &[Radio] {
        &self.radios
    }

    pub fn radio(&self, id: RadioId) -> &Radio {
        &self.radios[id.0]
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn plant(&self) -> Option<&FiberPlant> {
        self.plant.as_ref()
    }

    pub fn onus(&self) -> usize {
        self.onus
    }

    pub fn stas(&self) -> usize {
        self.stas
    }

    /// Size of the traffic matrix: OLT + ONUs + STAs.
    pub fn endpoint_count(&self) -> usize {
        1 + self.onus + self.stas
    }

    pub fn is_onu(&self, id: NodeId) -> bool {
        id.0 >= 1 && id.0 <= self.onus
    }

    pub fn is_sta(&self, id: NodeId) -> bool {
        id.0 > self.onus && id.0 <= self.onus + self.stas
    }

    pub fn sta_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (self.onus + 1..=self.onus + self.stas).map(NodeId)
    }

    pub fn onu_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..=self.onus).map(NodeId)
    }

    /// Sector (0-based) of an ONU; always 0 for broadcast PONs.
    pub fn sector_of(&self, onu: NodeId) -> Result<usize> {
        let plant = self
            .plant
            .as_ref()
            .ok_or_else(|| Error::Topology("mesh-only network has no sectors".into()))?;
        plant.sector_of(onu.0)
    }

    /// True when the OLT–ONU distribution fiber is usable.
    pub fn fiber_link(&self, onu: NodeId) -> bool {
        self.plant.is_some()
            && self.is_onu(onu)
            && !self.nodes[0].removed
            && !self.nodes[onu.0].removed
            && self.nodes[onu.0].fiber
    }

    /// At least one ONU still reaches the OLT.
    pub fn fiber_active(&self) -> bool {
        self.onu_ids().any(|o| self.fiber_link(o))
    }

    /// Whether a node may source or sink traffic.
    pub fn is_endpoint(&self, id: NodeId) -> bool {
        let node = &self.nodes[id.0];
        if node.removed {
            return false;
        }
        match node.role {
            NodeRole::Olt => self.fiber_active(),
            NodeRole::Onu | NodeRole::OnuMpp => node.fiber && self.plant.is_some(),
            NodeRole::Sta => true,
            NodeRole::MpRelay | NodeRole::Map => false,
        }
    }

    pub fn endpoints(&self) -> Vec<NodeId> {
        (0..self.endpoint_count()).map(NodeId).filter(|&id| self.is_endpoint(id)).collect()
    }

    /// Radio of `node` in `zone`, if any.
    pub fn radio_in_zone(&self, node: NodeId, zone: ZoneId) -> Option<RadioId> {
        self.nodes[node.0].radios.iter().copied().find(|r| self.radios[r.0].zone == zone)
    }

    /// One-hop wireless neighbours of `node`: (neighbour, transmitting radio of `node`).
    /// When two nodes share several zones the lowest zone is used.
    pub fn wireless_neighbors(&self, node: NodeId) -> Vec<(NodeId, RadioId)> {
        let me = &self.nodes[node.0];
        if me.removed {
            return Vec::new();
        }
        let mut best: BTreeMap<NodeId, RadioId> = BTreeMap::new();
        for &rid in &me.radios {
            let zone = &self.zones[self.radios[rid.0].zone.0];
            for &other in &zone.members {
                let owner = self.radios[other.0].owner;
                if owner == node || self.nodes[owner.0].removed {
                    continue;
                }
                best.entry(owner)
                    .and_modify(|cur| {
                        if self.radios[rid.0].zone < self.radios[cur.0].zone {
                            *cur = rid;
                        }
                    })
                    .or_insert(rid);
            }
        }
        best.into_iter().collect()
    }

    /// Number of nodes owning at least one radio.
    pub fn wireless_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.radios.is_empty()).count()
    }

    /// Radios belonging to multi-radio relay MPs.
    pub fn relay_radio_count(&self) -> usize {
        self.zones.iter().map(|z| z.relay.len()).sum()
    }

    /// Zone member radios whose owner is still in service.
    pub fn active_members(&self, zone: ZoneId) -> Vec<RadioId> {
        self.zones[zone.0]
            .members
            .iter()
            .copied()
            .filter(|r| !self.nodes[self.radios[r.0].owner.0].removed)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn fig4() -> Topology {
        let (spec, plant) = presets::fig4_topology();
        Topology::build(&spec, Some(plant)).unwrap()
    }

    #[test]
    fn fig4_counts() {
        let t = fig4();
        assert_eq!(t.wireless_node_count(), 24);
        assert_eq!(t.relay_radio_count(), 14);
        assert_eq!(t.zones().len(), 11);
        assert_eq!(t.endpoint_count(), 21);
    }

    #[test]
    fn doubled_fig4_counts() {
        let (spec, plant) = presets::fig4x2_topology();
        let t = Topology::build(&spec, Some(plant)).unwrap();
        assert_eq!(t.wireless_node_count(), 48);
        assert_eq!(t.zones().len(), 22);
        assert_eq!(t.relay_radio_count(), 28);
    }

    #[test]
    fn pon_only_topology() {
        let spec = TopologySpec { onu_mpp: vec![false], stas: 0, mp_radios: vec![], maps: 0, zones: vec![] };
        let t = Topology::build(&spec, Some(FiberPlant::tdm(1, 1e9, 1e-4))).unwrap();
        assert_eq!(t.wireless_node_count(), 0);
        assert!(t.fiber_link(NodeId(1)));
        assert_eq!(t.endpoints(), vec![NodeId(0), NodeId(1)]);
    }

    #[test]
    fn sector_lookup() {
        let plant = FiberPlant::wavelength_routed(vec![2, 2], vec![1e9; 2], vec![1e-4; 2]);
        assert_eq!(plant.sector_of(2).unwrap(), 0);
        assert_eq!(plant.sector_of(3).unwrap(), 1);
        assert!(matches!(plant.sector_of(5), Err(Error::OnuOutOfRange { .. })));
        assert!(plant.sector_of(0).is_err());
        let tdm = FiberPlant::tdm(4, 1e9, 1e-4);
        assert!((1..=4).all(|o| tdm.sector_of(o).unwrap() == 0));
    }

    #[test]
    fn rejects_bad_specs() {
        let base = TopologySpec {
            onu_mpp: vec![true],
            stas: 2,
            mp_radios: vec![2],
            maps: 0,
            zones: vec![vec!["ONU1".into(), "STA1".into(), "MP1".into()], vec!["MP1".into(), "STA2".into()]],
        };
        let plant = || Some(FiberPlant::tdm(1, 1e9, 0.0));
        assert!(Topology::build(&base, plant()).is_ok());

        let mut dup = base.clone();
        dup.zones[1].push("STA1".into());
        assert!(Topology::build(&dup, plant()).is_err());

        let mut empty = base.clone();
        empty.zones.push(vec![]);
        assert!(Topology::build(&empty, plant()).is_err());

        let unsectored = FiberPlant::wavelength_routed(vec![2], vec![1e9], vec![0.0]);
        assert!(Topology::build(&base, Some(unsectored)).is_err());

        let mut unknown = base.clone();
        unknown.zones[0].push("STA9".into());
        assert!(Topology::build(&unknown, plant()).is_err());
    }

    #[test]
    fn fiber_cut_keeps_radio() {
        let t = fig4();
        let failures = FailureSet { fibers: [NodeId(1)].into(), nodes: BTreeSet::new() };
        let cut = t.apply_failures(&failures).unwrap();
        assert!(!cut.fiber_link(NodeId(1)));
        assert!(cut.fiber_link(NodeId(2)));
        assert_eq!(cut.node(NodeId(1)).role, NodeRole::MpRelay);
        assert_eq!(cut.node(NodeId(1)).radios.len(), 1);
        assert!(!cut.wireless_neighbors(NodeId(1)).is_empty());
        assert!(!cut.is_endpoint(NodeId(1)));
        assert_eq!(cut.apply_failures(&failures).unwrap(), cut);
        assert_eq!(t.apply_failures(&FailureSet::default()).unwrap(), t);
    }

    #[test]
    fn all_fibers_cut() {
        let t = fig4();
        let failures = FailureSet { fibers: t.onu_ids().collect(), nodes: BTreeSet::new() };
        let cut = t.apply_failures(&failures).unwrap();
        assert!(!cut.fiber_active());
        assert!(cut.onu_ids().all(|o| !cut.fiber_link(o)));
    }

    #[test]
    fn failed_node_leaves_both_graphs() {
        let t = fig4();
        let failures = FailureSet { fibers: BTreeSet::new(), nodes: [NodeId(2)].into() };
        let cut = t.apply_failures(&failures).unwrap();
        assert!(!cut.fiber_link(NodeId(2)));
        assert!(cut.wireless_neighbors(NodeId(2)).is_empty());
        assert!(cut
            .nodes()
            .iter()
            .all(|n| cut.wireless_neighbors(n.id).iter().all(|(v, _)| *v != NodeId(2))));
        let bogus = FailureSet { fibers: [NodeId(99)].into(), nodes: BTreeSet::new() };
        assert!(matches!(t.apply_failures(&bogus), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn mesh_only_mpps_become_relays() {
        let (spec, _) = presets::fig4_topology();
        let t = Topology::build(&spec, None).unwrap();
        assert!(!t.fiber_active());
        assert!(t.onu_ids().all(|o| t.node(o).role == NodeRole::MpRelay));
        assert_eq!(t.endpoints().len(), 16);
    }

    #[test]
    fn zone_partition_is_disjoint() {
        let t = fig4();
        let mut seen = BTreeSet::new();
        for zone in t.zones() {
            assert_eq!(zone.relay.len() + zone.single.len(), zone.members.len());
            for r in &zone.members {
                assert!(seen.insert(*r));
            }
        }
        assert_eq!(seen.len(), t.radios().len());
    }
}
