use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::SimConfig;
use crate::aggregation::Scheme;
use crate::dcf::Access;
use crate::error::{Error, Result};
use crate::evaluator::Analyzer;
use crate::routing::{HopKind, RoutingOutcome};
use crate::topology::PonKind;

#[derive(Debug, Clone, Copy)]
enum Step {
    Radio(usize),
    Up { onu: usize },
    Down { group: usize },
}

#[derive(Debug, Clone)]
struct SimFlow {
    /// Aggregates per second.
    rate: f64,
    steps: Vec<Step>,
}

#[derive(Debug, Clone)]
struct Group {
    channels: usize,
    rate: f64,
    psi: f64,
}

/// Everything a replication needs, shared read-only across threads.
#[derive(Debug, Clone)]
pub(super) struct Model {
    flows: Vec<SimFlow>,
    n_frames: usize,
    frame_bits: Vec<f64>,
    frame_cdf: Vec<f64>,
    scheme: Scheme,
    access: Access,
    rate_bps: f64,
    slot: f64,
    w0: u64,
    h: u32,
    log_keep: f64,
    mpdu_overhead: f64,
    theta_s: f64,
    success_overhead: f64,
    t_collision_rts: f64,
    theta_c: f64,
    collision_overhead: f64,
    radio_zone: Vec<usize>,
    zones: usize,
    /// Upstream group of every node that is an ONU, else `usize::MAX`.
    onu_group: Vec<usize>,
    onus_polled: Vec<usize>,
    groups: Vec<Group>,
}

impl Model {
    pub(super) fn new(analyzer: &Analyzer, outcome: &RoutingOutcome) -> Result<Self> {
        let t = analyzer.topology();
        let cfg = analyzer.config();
        let agg = analyzer.aggregate();
        let slots = analyzer.slot_times();
        let r = cfg.dcf.rate_bps;

        let mut onu_group = vec![usize::MAX; t.nodes().len()];
        let mut groups = Vec::new();
        if let Some(plant) = t.plant() {
            let count = if plant.is_routed() { plant.sectors() } else { 1 };
            for g in 0..count {
                let channels = if plant.kind == PonKind::WavelengthRouted { 1 } else { plant.channels };
                groups.push(Group { channels, rate: plant.rate(g), psi: plant.propagation(g) });
            }
            for onu in t.onu_ids() {
                onu_group[onu.0] = if plant.is_routed() { plant.sector_of(onu.0)? } else { 0 };
            }
        }

        let n = agg.n_frames as f64;
        let mut flows = Vec::new();
        let mut polled = vec![false; t.nodes().len()];
        for f in &outcome.flows {
            if f.rate <= 0.0 {
                continue;
            }
            let mut steps = Vec::with_capacity(f.path.hops.len());
            for (k, hop) in f.path.hops.iter().enumerate() {
                let (from, to) = (f.path.nodes[k], f.path.nodes[k + 1]);
                steps.push(match hop {
                    HopKind::Wireless(rid) => Step::Radio(rid.0),
                    HopKind::FiberUp => {
                        polled[from.0] = true;
                        Step::Up { onu: from.0 }
                    }
                    HopKind::FiberDown => Step::Down { group: onu_group[to.0] },
                });
            }
            if steps.iter().any(|s| matches!(s, Step::Down { group } if *group == usize::MAX)) {
                return Err(Error::Topology("fiber hop to a node without a fiber connection".into()));
            }
            flows.push(SimFlow { rate: f.rate / n, steps });
        }

        let total: f64 = cfg.frame.points().iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        let frame_cdf = cfg
            .frame
            .points()
            .iter()
            .map(|&(_, p)| {
                acc += p / total;
                acc
            })
            .collect();

        Ok(Self {
            flows,
            n_frames: agg.n_frames,
            frame_bits: cfg.frame.points().iter().map(|&(l, _)| l as f64).collect(),
            frame_cdf,
            scheme: agg.scheme,
            access: cfg.dcf.access,
            rate_bps: r,
            slot: cfg.dcf.slot_s,
            w0: cfg.dcf.w0 as u64,
            h: cfg.dcf.h,
            log_keep: (-cfg.dcf.bit_error_rate).ln_1p(),
            mpdu_overhead: cfg.aggregation.mpdu_overhead_bits() as f64,
            theta_s: slots.success - agg.success_bits() / r,
            success_overhead: agg.success_bits() - agg.mean_payload(),
            t_collision_rts: slots.collision,
            theta_c: slots.collision - agg.collision_bits() / r,
            collision_overhead: agg.collision_bits() - agg.longest_payload(),
            radio_zone: t.radios().iter().map(|r| r.zone.0).collect(),
            zones: t.zones().len(),
            onu_group,
            onus_polled: (0..polled.len()).filter(|&o| polled[o]).collect(),
            groups,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Mean {
    pub sum: f64,
    pub count: u64,
}

impl Mean {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }
}

/// Statistics of one replication, collected after the warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct RepStats {
    pub generated: u64,
    pub delivered: u64,
    pub delivered_bits: f64,
    pub end_to_end: Mean,
    pub up: Mean,
    pub down: Mean,
    pub wireless: Mean,
    pub attempts: Vec<u64>,
    pub collisions: Vec<u64>,
    /// Aggregates still in the network when the run ends.
    pub backlog: usize,
}

impl RepStats {
    pub fn mean_delay(&self) -> f64 {
        self.end_to_end.mean()
    }

    pub fn composite_delay(&self) -> f64 {
        let part = |m: &Mean| if m.count == 0 { 0.0 } else { m.mean() };
        part(&self.up) + part(&self.down) + part(&self.wireless)
    }
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    Arrival(usize),
    Attempt(usize, u64),
    BusyEnd(usize),
    Report(usize),
    Gate(usize, usize),
    UpDeliver(usize),
    DownDone(usize, usize),
    DownDeliver(usize),
}

struct Entry {
    time: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Default)]
struct Packet {
    flow: usize,
    step: usize,
    created: f64,
    enqueued: f64,
    bits: f64,
    frames: Vec<f64>,
    up: f64,
    down: f64,
    wireless: f64,
    fiber_up: bool,
    fiber_down: bool,
    over_air: bool,
}

#[derive(Debug, Clone, Default)]
struct RadioState {
    queue: VecDeque<usize>,
    counter: u64,
    stage: u32,
    /// Counting down, either for the head packet or as post-backoff.
    contending: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TxResult {
    Success,
    Collision,
    Error,
}

#[derive(Debug, Clone, Default)]
struct ZoneState {
    contenders: Vec<usize>,
    busy: bool,
    t0: f64,
    generation: u64,
    tx: Vec<(usize, TxResult)>,
}

#[derive(Debug, Clone, Default)]
struct DownState {
    queue: VecDeque<usize>,
    current: Vec<Option<usize>>,
}

struct Replication<'a> {
    m: &'a Model,
    cfg: &'a SimConfig,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Entry>,
    seq: u64,
    packets: Vec<Packet>,
    free: Vec<usize>,
    radios: Vec<RadioState>,
    zones: Vec<ZoneState>,
    onu_queue: Vec<VecDeque<usize>>,
    up_free: Vec<Vec<f64>>,
    down: Vec<DownState>,
    stats: RepStats,
}

pub(super) fn replicate(model: &Model, cfg: &SimConfig, rep: u64) -> RepStats {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep);
    let radios = model.radio_zone.len();
    let mut sim = Replication {
        m: model,
        cfg,
        rng,
        heap: BinaryHeap::new(),
        seq: 0,
        packets: Vec::new(),
        free: Vec::new(),
        radios: vec![RadioState::default(); radios],
        zones: vec![ZoneState::default(); model.zones],
        onu_queue: vec![VecDeque::new(); model.onu_group.len()],
        up_free: model.groups.iter().map(|g| vec![0.0; g.channels]).collect(),
        down: model.groups.iter().map(|g| DownState { queue: VecDeque::new(), current: vec![None; g.channels] }).collect(),
        stats: RepStats {
            generated: 0,
            delivered: 0,
            delivered_bits: 0.0,
            end_to_end: Mean::default(),
            up: Mean::default(),
            down: Mean::default(),
            wireless: Mean::default(),
            attempts: vec![0; radios],
            collisions: vec![0; radios],
            backlog: 0,
        },
    };
    sim.run();
    sim.stats.backlog = sim.packets.len() - sim.free.len();
    sim.stats
}

impl Replication<'_> {
    fn push(&mut self, time: f64, ev: Ev) {
        self.seq += 1;
        self.heap.push(Entry { time, seq: self.seq, ev });
    }

    fn run(&mut self) {
        for f in 0..self.m.flows.len() {
            let dt = self.exp(self.m.flows[f].rate);
            self.push(dt, Ev::Arrival(f));
        }
        for k in 0..self.m.onus_polled.len() {
            let onu = self.m.onus_polled[k];
            self.push(0.0, Ev::Report(onu));
        }
        while let Some(Entry { time, ev, .. }) = self.heap.pop() {
            if time > self.cfg.duration_s {
                break;
            }
            match ev {
                Ev::Arrival(f) => self.arrival(f, time),
                Ev::Attempt(z, g) => self.attempt(z, g, time),
                Ev::BusyEnd(z) => self.busy_end(z, time),
                Ev::Report(onu) => self.report(onu, time),
                Ev::Gate(onu, k) => self.gate(onu, k, time),
                Ev::UpDeliver(p) => {
                    let pk = &mut self.packets[p];
                    pk.up += time - pk.enqueued;
                    pk.fiber_up = true;
                    self.forward(p, time);
                }
                Ev::DownDone(g, ch) => self.down_done(g, ch, time),
                Ev::DownDeliver(p) => {
                    let pk = &mut self.packets[p];
                    pk.down += time - pk.enqueued;
                    pk.fiber_down = true;
                    self.forward(p, time);
                }
            }
        }
    }

    fn exp(&mut self, rate: f64) -> f64 {
        Exp::new(rate).expect("positive rate").sample(&mut self.rng)
    }

    fn measuring(&self, now: f64) -> bool {
        now >= self.cfg.warmup_s
    }

    fn draw_frame(&mut self) -> f64 {
        if self.m.frame_bits.len() == 1 {
            return self.m.frame_bits[0];
        }
        let u: f64 = self.rng.random();
        let k = self.m.frame_cdf.partition_point(|&c| c <= u).min(self.m.frame_bits.len() - 1);
        self.m.frame_bits[k]
    }

    fn arrival(&mut self, f: usize, now: f64) {
        let dt = self.exp(self.m.flows[f].rate);
        self.push(now + dt, Ev::Arrival(f));
        let mut frames = Vec::with_capacity(self.m.n_frames);
        for _ in 0..self.m.n_frames {
            let l = self.draw_frame();
            frames.push(l);
        }
        let bits = frames.iter().sum();
        if self.measuring(now) {
            self.stats.generated += 1;
        }
        let pkt = Packet { flow: f, created: now, bits, frames, ..Default::default() };
        let id = match self.free.pop() {
            Some(id) => {
                self.packets[id] = pkt;
                id
            }
            None => {
                self.packets.push(pkt);
                self.packets.len() - 1
            }
        };
        self.dispatch(id, now);
    }

    fn forward(&mut self, p: usize, now: f64) {
        self.packets[p].step += 1;
        self.dispatch(p, now);
    }

    fn dispatch(&mut self, p: usize, now: f64) {
        self.packets[p].enqueued = now;
        let m = self.m;
        let steps = &m.flows[self.packets[p].flow].steps;
        let Some(&step) = steps.get(self.packets[p].step) else {
            self.deliver(p, now);
            return;
        };
        match step {
            Step::Radio(r) => self.enqueue_radio(r, p, now),
            Step::Up { onu } => self.onu_queue[onu].push_back(p),
            Step::Down { group } => self.enqueue_down(group, p, now),
        }
    }

    fn deliver(&mut self, p: usize, now: f64) {
        let pk = &self.packets[p];
        if pk.created >= self.cfg.warmup_s {
            let s = &mut self.stats;
            s.delivered += 1;
            s.delivered_bits += pk.bits;
            s.end_to_end.add(now - pk.created);
            if pk.fiber_up {
                s.up.add(pk.up);
            }
            if pk.fiber_down {
                s.down.add(pk.down);
            }
            if pk.over_air {
                s.wireless.add(pk.wireless);
            }
        }
        self.free.push(p);
    }

    fn draw_backoff(&mut self, stage: u32) -> u64 {
        let window = (1u64 << stage.min(self.m.h)) * self.m.w0;
        self.rng.random_range(0..window)
    }

    fn enqueue_radio(&mut self, r: usize, p: usize, now: f64) {
        self.radios[r].queue.push_back(p);
        if self.radios[r].queue.len() == 1 && !self.radios[r].contending {
            let z = self.m.radio_zone[r];
            self.radios[r].stage = 0;
            self.radios[r].counter = if self.zones[z].busy { self.draw_backoff(0) } else { 0 };
            self.join(r, now);
        }
    }

    /// Counts idle slots up to `now` without passing the next attempt.
    fn advance(&mut self, z: usize, now: f64) {
        let zone = &mut self.zones[z];
        if zone.busy {
            return;
        }
        if zone.contenders.is_empty() {
            zone.t0 = now;
            return;
        }
        let elapsed = ((now - zone.t0) / self.m.slot + 1e-9).floor().max(0.0) as u64;
        let min = zone.contenders.iter().map(|&r| self.radios[r].counter).min().unwrap_or(0);
        let k = elapsed.min(min);
        for &r in &zone.contenders {
            self.radios[r].counter -= k;
        }
        zone.t0 += k as f64 * self.m.slot;
    }

    fn join(&mut self, r: usize, now: f64) {
        let z = self.m.radio_zone[r];
        if !self.zones[z].busy {
            self.advance(z, now);
            if now > self.zones[z].t0 + 1e-12 {
                self.radios[r].counter += 1;
            }
        }
        self.zones[z].contenders.push(r);
        self.radios[r].contending = true;
        if !self.zones[z].busy {
            self.schedule_attempt(z);
        }
    }

    fn schedule_attempt(&mut self, z: usize) {
        let zone = &mut self.zones[z];
        zone.generation += 1;
        let Some(min) = zone.contenders.iter().map(|&r| self.radios[r].counter).min() else { return };
        let (t, g) = (zone.t0 + min as f64 * self.m.slot, zone.generation);
        self.push(t, Ev::Attempt(z, g));
    }

    fn attempt(&mut self, z: usize, generation: u64, now: f64) {
        if self.zones[z].busy || self.zones[z].generation != generation {
            return;
        }
        let min = self.zones[z].contenders.iter().map(|&r| self.radios[r].counter).min().unwrap_or(0);
        let mut tx = Vec::new();
        let mut idle = Vec::new();
        for &r in &self.zones[z].contenders {
            self.radios[r].counter -= min;
            if self.radios[r].counter == 0 {
                if self.radios[r].queue.is_empty() {
                    idle.push(r);
                } else {
                    tx.push(r);
                }
            }
        }
        if !idle.is_empty() {
            self.zones[z].contenders.retain(|r| !idle.contains(r));
            for r in idle {
                self.radios[r].contending = false;
            }
        }
        if tx.is_empty() {
            self.zones[z].t0 = now;
            self.schedule_attempt(z);
            return;
        }
        let measuring = self.measuring(now);
        let duration = if tx.len() == 1 {
            let r = tx[0];
            let p = self.radios[r].queue[0];
            let error = self.corrupted(p);
            self.zones[z].tx = vec![(r, if error { TxResult::Error } else { TxResult::Success })];
            self.m.theta_s + (self.packets[p].bits + self.m.success_overhead) / self.m.rate_bps
        } else {
            self.zones[z].tx = tx.iter().map(|&r| (r, TxResult::Collision)).collect();
            if measuring {
                for &r in &tx {
                    self.stats.collisions[r] += 1;
                }
            }
            match self.m.access {
                Access::RtsCts => self.m.t_collision_rts,
                Access::Basic => {
                    let longest = tx.iter().map(|&r| self.packets[self.radios[r].queue[0]].bits).fold(0.0, f64::max);
                    self.m.theta_c + (longest + self.m.collision_overhead) / self.m.rate_bps
                }
            }
        };
        if measuring {
            for &r in &tx {
                self.stats.attempts[r] += 1;
            }
        }
        let zone = &mut self.zones[z];
        zone.busy = true;
        zone.t0 = now;
        self.push(now + duration, Ev::BusyEnd(z));
    }

    fn corrupted(&mut self, p: usize) -> bool {
        if self.m.log_keep == 0.0 {
            return false;
        }
        let pk = &self.packets[p];
        let prob = match self.m.scheme {
            Scheme::AMsdu => -((pk.bits + self.m.mpdu_overhead) * self.m.log_keep).exp_m1(),
            Scheme::AMpdu => pk.frames.iter().map(|l| -((l + self.m.mpdu_overhead) * self.m.log_keep).exp_m1()).product(),
        };
        self.rng.random::<f64>() < prob
    }

    fn busy_end(&mut self, z: usize, now: f64) {
        let tx = std::mem::take(&mut self.zones[z].tx);
        self.zones[z].busy = false;
        self.zones[z].t0 = now;
        for (r, result) in tx {
            match result {
                TxResult::Success => {
                    let p = self.radios[r].queue.pop_front().expect("transmitting radio has a packet");
                    self.radios[r].stage = 0;
                    self.radios[r].counter = self.draw_backoff(0);
                    let pk = &mut self.packets[p];
                    pk.wireless += now - pk.enqueued;
                    pk.over_air = true;
                    self.forward(p, now);
                }
                TxResult::Collision => {
                    self.radios[r].stage += 1;
                    let stage = self.radios[r].stage;
                    self.radios[r].counter = self.draw_backoff(stage);
                }
                TxResult::Error => {
                    let stage = match self.m.access {
                        Access::RtsCts => 0,
                        Access::Basic => self.radios[r].stage + 1,
                    };
                    self.radios[r].stage = stage;
                    self.radios[r].counter = self.draw_backoff(stage);
                }
            }
        }
        self.schedule_attempt(z);
    }

    /// The ONU sends its queue length; the OLT grants it on the channel that
    /// frees up first.
    fn report(&mut self, onu: usize, now: f64) {
        let m = self.m;
        let g = m.onu_group[onu];
        let group = &m.groups[g];
        let k = self.onu_queue[onu].len();
        let bits: f64 = self.onu_queue[onu].iter().map(|&p| self.packets[p].bits).sum();
        let free = &mut self.up_free[g];
        let ch = (0..free.len()).min_by(|&a, &b| free[a].total_cmp(&free[b])).expect("at least one channel");
        let start = (now + 3.0 * group.psi).max(free[ch]);
        free[ch] = start + bits / group.rate;
        self.push(start - group.psi, Ev::Gate(onu, k));
    }

    fn gate(&mut self, onu: usize, k: usize, now: f64) {
        let group = &self.m.groups[self.m.onu_group[onu]];
        let (rate, psi) = (group.rate, group.psi);
        let mut sent = 0.0;
        for _ in 0..k {
            let p = self.onu_queue[onu].pop_front().expect("granted packets are queued");
            sent += self.packets[p].bits;
            self.push(now + sent / rate + psi, Ev::UpDeliver(p));
        }
        self.push(now + sent / rate, Ev::Report(onu));
    }

    fn enqueue_down(&mut self, g: usize, p: usize, now: f64) {
        match self.down[g].current.iter().position(Option::is_none) {
            Some(ch) => self.start_down(g, ch, p, now),
            None => self.down[g].queue.push_back(p),
        }
    }

    fn start_down(&mut self, g: usize, ch: usize, p: usize, now: f64) {
        self.down[g].current[ch] = Some(p);
        let t = now + self.packets[p].bits / self.m.groups[g].rate;
        self.push(t, Ev::DownDone(g, ch));
    }

    fn down_done(&mut self, g: usize, ch: usize, now: f64) {
        let p = self.down[g].current[ch].take().expect("channel was busy");
        self.push(now + self.m.groups[g].psi, Ev::DownDeliver(p));
        if let Some(next) = self.down[g].queue.pop_front() {
            self.start_down(g, ch, next, now);
        }
    }
}
