use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adjudication::{
    policy_by_name, recheck, validate_at_cc, AdjudicationPolicy, DetectionBudget,
    DetectionCounters, ForwardingEntry, FrameClock, QuarantineEntry, QuarantineList,
    RecheckAllowance, RejectReason, Ruling, ValidEntry, Validation,
};
use crate::attack::{behavior_by_name, AttackBehavior, AttackContext, AttackPlan, Victim};
use crate::detection::{
    evaluate_insomnia, AcquisitionVector, CaseRegistry, DetectionThresholds, InsomniaVerdict,
    LedgerView, ReputationRecord,
};
use crate::energy::{
    calculated_remaining_lifetime, epoch_mode_times, Accrual, ConsumptionWindow, EnergyLedger,
    EpochActivity, Mode, ModeDurations,
};
use crate::error::{ConfigError, SimError};
use crate::hierarchy::{
    Candidate, ElectionInput, Hierarchy, HierarchyNote, Layout, ReconfigTrigger, Role, RoleKind,
    Scope, Sector, SectorId,
};
use crate::scenario::ScenarioConfig;
use crate::topology::{deploy_nodes, neighbor_discovery, NeighborMap, Node, NodeId, NodeKind};

use super::metrics::MetricsFrame;
use super::packet::{Packet, PacketKind};
use super::phase::{Phase, PhaseState};
use super::queue::EventQueue;
use super::schedule::SlotSchedule;

const TRAFFIC_SALT: u64 = 0x7A3F_19C4_0B55_E2D1;
const ATTACKER_SALT: u64 = 0x2C81_F0A7_6D3E_9B44;

/// One line of the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: &'static str,
    pub subject: String,
    pub detail: String,
}

impl EventRecord {
    /// `time,type,subject,detail`; commas in the detail become semicolons.
    pub fn line(&self) -> String {
        format!(
            "{:.6},{},{},{}",
            self.time,
            self.kind,
            self.subject,
            self.detail.replace(',', ";")
        )
    }
}

/// A packet that reached the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub packet_id: u64,
    pub origin: NodeId,
    pub created_at: f64,
    pub delivered_at: f64,
    pub hops: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackerOutcome {
    pub node: NodeId,
    pub archetype: String,
    /// Time of the malicious ruling, if any.
    pub quarantined_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSummary {
    pub id: NodeId,
    pub kind: NodeKind,
    pub initial_energy: f64,
    pub residual: f64,
    /// Consumption rebuilt from per-mode durations.
    pub accounted: f64,
    pub role: Option<Role>,
    pub quarantined: bool,
}

/// Counts behind the false-positive rate of the first layer.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlagStats {
    pub flags: u64,
    pub benign_flags: u64,
    pub benign_node_epochs: u64,
}

impl FlagStats {
    pub fn benign_flags_per_1000(&self) -> f64 {
        if self.benign_node_epochs == 0 {
            0.0
        } else {
            1000.0 * self.benign_flags as f64 / self.benign_node_epochs as f64
        }
    }
}

/// Per-node energy state captured alongside a metrics frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    /// Residual energy of every node, in id order.
    pub residual: Vec<f64>,
    /// Consumption rebuilt from per-mode durations, summed over nodes.
    pub accounted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// The scenario with the sector radius and attacker placements filled in.
    pub resolved: ScenarioConfig,
    pub frames: Vec<MetricsFrame>,
    /// One entry per frame.
    pub audit: Vec<EnergyAudit>,
    pub events: Vec<EventRecord>,
    pub quarantine: Vec<QuarantineEntry>,
    pub counters: DetectionCounters,
    pub attackers: Vec<AttackerOutcome>,
    pub deliveries: Vec<Delivery>,
    pub nodes: Vec<NodeSummary>,
    pub flag_stats: FlagStats,
    /// Sensed packets created by ordinary traffic.
    pub generated_packets: u64,
}

impl RunOutput {
    /// Share of attackers that ended up quarantined; 1 with no attackers.
    pub fn recall(&self) -> f64 {
        if self.attackers.is_empty() {
            return 1.0;
        }
        let caught = self
            .attackers
            .iter()
            .filter(|a| a.quarantined_at.is_some())
            .count();
        caught as f64 / self.attackers.len() as f64
    }

    pub fn last_frame(&self) -> &MetricsFrame {
        self.frames.last().expect("at least the initial frame")
    }
}

/// Runs a scenario to its horizon.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.hierarchy.sector_radius = Some(cfg.sector_radius());
    let mut sim = Simulation::setup(&cfg)?;
    sim.run_events();
    Ok(sim.finish())
}

/// Activity booked during the current epoch, split into the node's own
/// traffic and the protocol duties it performs for others.
#[derive(Debug, Clone, Copy, Default)]
struct Scratch {
    own: EpochActivity,
    duty: EpochActivity,
    forced_wake: f64,
}

impl Scratch {
    fn activity(&self) -> EpochActivity {
        EpochActivity {
            transmit: self.own.transmit + self.duty.transmit,
            sensing: self.own.sensing + self.duty.sensing,
            compute: self.own.compute + self.duty.compute,
            extra_awake: self.own.extra_awake + self.duty.extra_awake + self.forced_wake,
        }
    }
}

struct NodeState {
    node: Node,
    ledger: EnergyLedger,
    budget: DetectionBudget,
    window: ConsumptionWindow,
    scratch: Scratch,
    dead: bool,
}

#[derive(Debug, Clone)]
struct Observation {
    times: ModeDurations,
    scratch: Scratch,
    consumed: f64,
    reported: f64,
}

struct AttackerState {
    node: NodeId,
    behavior: Box<dyn AttackBehavior>,
    intensity: f64,
    start: u64,
    end: Option<u64>,
    targets: Vec<NodeId>,
    plan: Option<AttackPlan>,
    quarantined_at: Option<f64>,
}

struct SectorRuntime {
    schedule: Rc<SlotSchedule>,
    inbox: BTreeMap<NodeId, Vec<Packet>>,
    outbox: Vec<Packet>,
}

#[derive(Default)]
struct CoordinatorRuntime {
    valid: crate::adjudication::ValidList,
    outbox: Vec<Packet>,
}

enum Payload {
    Packet(Packet),
    /// Resolved into a bundle when the event fires.
    BundleFrom(SectorId),
    Bundle {
        sector: SectorId,
        packets: Vec<Packet>,
    },
    Relay {
        sector: SectorId,
        packets: Vec<Packet>,
    },
    AggregateFrom(NodeId),
}

struct Transmission {
    sender: NodeId,
    receiver: NodeId,
    bytes: u32,
    payload: Payload,
}

enum Event {
    EpochStart(u64),
    Send(Transmission),
    EpochEnd(u64),
    Finish,
}

/// A suspect handed from the sector coordinator to its monitor.
struct Referral {
    node: NodeId,
    av: AcquisitionVector,
    view: LedgerView,
    thresholds: DetectionThresholds,
}

type Scopes = BTreeMap<Scope, ReconfigTrigger>;

struct Simulation {
    cfg: ScenarioConfig,
    nodes: BTreeMap<NodeId, NodeState>,
    neighbors: NeighborMap,
    hierarchy: Hierarchy,
    phase: PhaseState,
    queue: EventQueue<Event>,
    events: Vec<EventRecord>,
    frames: Vec<MetricsFrame>,
    audit: Vec<EnergyAudit>,
    rng: ChaCha8Rng,
    registry: CaseRegistry,
    policy: Box<dyn AdjudicationPolicy>,
    sectors: BTreeMap<SectorId, SectorRuntime>,
    coordinators: BTreeMap<NodeId, CoordinatorRuntime>,
    forwarding: BTreeMap<u64, ForwardingEntry>,
    /// Schedule in force for each source, per epoch.
    epoch_schedules: BTreeMap<u64, BTreeMap<NodeId, Rc<SlotSchedule>>>,
    reputation: BTreeMap<NodeId, ReputationRecord>,
    /// Residual energy the coordinators hold on record for each source.
    recorded: BTreeMap<NodeId, f64>,
    quarantine: QuarantineList,
    pending_isolation: Vec<(u64, NodeId)>,
    deferred: Scopes,
    attackers: Vec<AttackerState>,
    attacker_index: BTreeMap<NodeId, usize>,
    counters: DetectionCounters,
    flag_stats: FlagStats,
    deliveries: Vec<Delivery>,
    data_packets: u64,
    control_packets: u64,
    generated: u64,
    next_packet: u64,
    clock: FrameClock,
    unavailable_logged: BTreeSet<NodeId>,
}

impl Simulation {
    fn setup(cfg: &ScenarioConfig) -> Result<Simulation, SimError> {
        let deployed = deploy_nodes(&cfg.field, cfg.seed)?;
        let neighbors = neighbor_discovery(&deployed, &cfg.radio);
        let nodes: BTreeMap<NodeId, NodeState> = deployed
            .into_iter()
            .map(|n| {
                let state = NodeState {
                    ledger: EnergyLedger::new(n.initial_energy, cfg.hierarchy.standard_lifetime),
                    budget: DetectionBudget::new(n.detection_power, cfg.adjudication.dp_min),
                    window: ConsumptionWindow::new(cfg.detection.crlt_window),
                    scratch: Scratch::default(),
                    dead: false,
                    node: n,
                };
                (state.node.id, state)
            })
            .collect();
        let registry = CaseRegistry::select(&cfg.detection.cases)?;
        let policy = policy_by_name(&cfg.adjudication.policy)?;
        let reputation = nodes
            .keys()
            .map(|&id| (id, ReputationRecord::new(id)))
            .collect();
        let recorded = nodes
            .iter()
            .map(|(&id, s)| (id, s.node.initial_energy))
            .collect();
        let mut sim = Simulation {
            cfg: cfg.clone(),
            nodes,
            neighbors,
            hierarchy: Hierarchy::empty(cfg.mode, NodeId(0)),
            phase: PhaseState::default(),
            queue: EventQueue::new(),
            events: Vec::new(),
            frames: Vec::new(),
            audit: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ TRAFFIC_SALT),
            registry,
            policy,
            sectors: BTreeMap::new(),
            coordinators: BTreeMap::new(),
            forwarding: BTreeMap::new(),
            epoch_schedules: BTreeMap::new(),
            reputation,
            recorded,
            quarantine: QuarantineList::default(),
            pending_isolation: Vec::new(),
            deferred: Scopes::new(),
            attackers: Vec::new(),
            attacker_index: BTreeMap::new(),
            counters: DetectionCounters::default(),
            flag_stats: FlagStats::default(),
            deliveries: Vec::new(),
            data_packets: 0,
            control_packets: 0,
            generated: 0,
            next_packet: 0,
            clock: FrameClock {
                epoch_length: cfg.duty.epoch_length,
                slot_duration: cfg.frame.slot_duration,
            },
            unavailable_logged: BTreeSet::new(),
        };
        sim.form_network()?;
        Ok(sim)
    }

    fn log(&mut self, kind: &'static str, subject: impl ToString, detail: impl Into<String>) {
        self.events.push(EventRecord {
            time: self.queue.now(),
            kind,
            subject: subject.to_string(),
            detail: detail.into(),
        });
    }

    fn enter(&mut self, phase: Phase) {
        self.phase
            .transition(phase)
            .expect("phase order is fixed by the engine");
        self.log("phase", phase, "");
    }

    fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.nodes[&a]
            .node
            .position
            .distance(&self.nodes[&b].node.position)
    }

    fn airtime(&self, bytes: u32) -> f64 {
        f64::from(bytes) * 8.0 / self.cfg.traffic.bitrate
    }

    /// Seconds in transmit mode for `bytes` over `distance` metres. The
    /// amplifier term saturates at full radio range.
    fn transmit_time(&self, bytes: u32, distance: f64) -> f64 {
        let reach = (distance / self.cfg.radio.comm_range).min(1.0);
        self.airtime(bytes)
            * (1.0 + self.cfg.traffic.amp_gain * reach.powf(self.cfg.radio.signal_exponent))
    }

    fn bundle_size(&self, packets: usize) -> u32 {
        self.cfg.traffic.data_size + packets as u32 * self.cfg.traffic.header_size
    }

    fn relay_step(&self) -> f64 {
        self.cfg.frame.slot_duration / 4.0
    }

    fn is_attacker(&self, id: NodeId) -> bool {
        self.attacker_index.contains_key(&id)
    }

    fn alive(&self, id: NodeId) -> bool {
        !self.nodes[&id].dead
    }

    fn candidates(&self) -> BTreeMap<NodeId, Candidate> {
        self.nodes
            .iter()
            .map(|(&id, s)| {
                let energy = if self.is_attacker(id) {
                    0.0
                } else {
                    s.ledger.residual()
                };
                (
                    id,
                    Candidate {
                        id,
                        kind: s.node.kind,
                        position: s.node.position,
                        energy,
                        detection_power: s.budget.dp(),
                        present: !s.dead && !self.quarantine.contains(id),
                    },
                )
            })
            .collect()
    }

    // ------------------------------------------------------------ accounting

    fn mark_dead(&mut self, id: NodeId) {
        let st = self.nodes.get_mut(&id).expect("node");
        if !st.dead {
            st.dead = true;
            self.log("death", id, "battery exhausted");
        }
    }

    /// Books `seconds` of `mode` on a node. False once the node is dead.
    fn accrue(&mut self, id: NodeId, mode: Mode, seconds: f64) -> bool {
        if id == self.hierarchy.sink() {
            return true;
        }
        if seconds <= 0.0 {
            return self.alive(id);
        }
        let profile = &self.cfg.energy;
        let st = self.nodes.get_mut(&id).expect("node");
        match st.ledger.accrue(mode, seconds, profile) {
            Accrual::Applied => true,
            Accrual::Died | Accrual::DeadNode => {
                self.mark_dead(id);
                false
            }
        }
    }

    fn scratch(&mut self, id: NodeId) -> &mut Scratch {
        &mut self.nodes.get_mut(&id).expect("node").scratch
    }

    /// A protocol message sent now. `to: None` is a broadcast.
    fn control(&mut self, from: NodeId, to: Option<NodeId>) {
        if !self.alive(from) {
            return;
        }
        let bytes = self.cfg.traffic.control_size;
        let d = match to {
            Some(r) => self.distance(from, r),
            None => self.cfg.radio.comm_range,
        };
        let secs = self.transmit_time(bytes, d);
        self.control_packets += 1;
        if from != self.hierarchy.sink() {
            self.scratch(from).duty.transmit += secs;
        }
        if !self.accrue(from, Mode::Transmit, secs) {
            return;
        }
        if let Some(r) = to {
            if r != self.hierarchy.sink() && self.alive(r) {
                let air = self.airtime(bytes);
                self.scratch(r).duty.extra_awake += air;
            }
        }
    }

    fn send_at(&mut self, at: f64, sender: NodeId, receiver: NodeId, bytes: u32, payload: Payload) {
        self.queue.push(
            at,
            Event::Send(Transmission {
                sender,
                receiver,
                bytes,
                payload,
            }),
        );
    }

    // ------------------------------------------------------------- formation

    fn form_network(&mut self) -> Result<(), SimError> {
        self.log("phase", Phase::Initialization, "");
        let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        let sink = self.hierarchy.sink();
        for &id in &ids {
            if id != sink {
                self.control(id, None);
            }
        }
        let reachable = self.neighbors.hop_distances(sink);
        for &id in &ids {
            if !reachable.contains_key(&id) {
                self.log("unreachable", id, "no path to the sink");
            }
        }

        self.enter(Phase::ClusterFormation);
        let cands = self.candidates();
        let input = ElectionInput {
            candidates: &cands,
            radio: &self.cfg.radio,
            sector_radius: self.cfg.sector_radius(),
            dp_min: self.cfg.adjudication.dp_min,
            seed: self.cfg.seed,
        };
        let (hierarchy, notes) =
            Hierarchy::form_clusters(self.cfg.mode, sink, &input, &self.neighbors)?;
        self.hierarchy = hierarchy;
        self.log_notes(&notes);
        let clusters: Vec<(NodeId, Vec<NodeId>)> = self
            .hierarchy
            .clusters()
            .values()
            .map(|c| (c.coordinator, c.members.iter().copied().collect()))
            .collect();
        for (cc, members) in clusters {
            self.control(cc, None);
            for m in members {
                self.control(m, Some(cc));
            }
        }

        self.place_attackers()?;

        self.enter(Phase::SectorFormation);
        let cands = self.candidates();
        let input = ElectionInput {
            candidates: &cands,
            radio: &self.cfg.radio,
            sector_radius: self.cfg.sector_radius(),
            dp_min: self.cfg.adjudication.dp_min,
            seed: self.cfg.seed,
        };
        let notes = self.hierarchy.form_sectors(&input, &self.neighbors);
        self.log_notes(&notes);
        let sectors: Vec<SectorId> = self.hierarchy.sectors().keys().copied().collect();
        for sid in sectors {
            self.announce_sector(sid);
        }
        self.rebuild_runtime(true)?;
        self.hierarchy.snapshot_backups(0);

        self.enter(Phase::IdsActivation);
        let state = if self.cfg.detection.enabled {
            self.policy.name()
        } else {
            "disabled"
        };
        self.log("ids", "network", state);
        self.enter(Phase::DataTransfer);
        self.push_frame(0.0);
        self.queue.push(0.0, Event::EpochStart(0));
        Ok(())
    }

    fn announce_sector(&mut self, sid: SectorId) {
        if self.hierarchy.layout() == Layout::NonSectorized {
            return;
        }
        let Some(s) = self.hierarchy.sector(sid).cloned() else {
            return;
        };
        self.control(s.coordinator, None);
        if !s.monitor_fallback {
            self.control(s.monitor, Some(s.coordinator));
        }
        for m in s.sources().collect::<Vec<_>>() {
            self.control(m, Some(s.coordinator));
        }
    }

    fn place_attackers(&mut self) -> Result<(), SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ ATTACKER_SALT);
        let pinned: BTreeSet<NodeId> = self.cfg.attackers.iter().filter_map(|a| a.node).collect();
        let mut pool: Vec<NodeId> = self
            .nodes
            .values()
            .filter(|s| s.node.kind == NodeKind::Follower)
            .map(|s| s.node.id)
            .filter(|id| self.hierarchy.cluster_of(*id).is_some() && !pinned.contains(id))
            .collect();
        let specs = self.cfg.attackers.clone();
        for (i, spec) in specs.iter().enumerate() {
            let behavior = behavior_by_name(&spec.archetype)?;
            let node = match spec.node {
                Some(n) => n,
                None => {
                    if pool.is_empty() {
                        return Err(ConfigError::invalid(
                            format!("attackers[{i}].node"),
                            "no clustered follower left to compromise",
                        )
                        .into());
                    }
                    let pick = rng.random_range(0..pool.len());
                    pool.remove(pick)
                }
            };
            let intensity = spec.intensity.unwrap_or(behavior.default_intensity());
            self.cfg.attackers[i].node = Some(node);
            self.cfg.attackers[i].intensity = Some(intensity);
            self.log(
                "attacker",
                node,
                format!("{} intensity={intensity}", behavior.name()),
            );
            self.attacker_index.insert(node, self.attackers.len());
            self.attackers.push(AttackerState {
                node,
                behavior,
                intensity,
                start: spec.start_epoch,
                end: spec.end_epoch,
                targets: spec.targets.clone(),
                plan: None,
                quarantined_at: None,
            });
        }
        Ok(())
    }

    fn log_notes(&mut self, notes: &[HierarchyNote]) {
        for n in notes {
            match *n {
                HierarchyNote::ClusterFormed {
                    cluster,
                    coordinator,
                    members,
                } => self.log(
                    "cluster",
                    format!("cluster-{cluster}"),
                    format!("coordinator={coordinator} members={members}"),
                ),
                HierarchyNote::SectorFormed {
                    sector,
                    coordinator,
                    monitor,
                    forwarder,
                } => self.log(
                    "sector",
                    format!("sector-{sector}"),
                    format!("coordinator={coordinator} monitor={monitor} forwarder={forwarder}"),
                ),
                HierarchyNote::MonitorFallback {
                    sector,
                    coordinator,
                } => self.log(
                    "monitor-fallback",
                    format!("sector-{sector}"),
                    format!("monitor={coordinator}"),
                ),
                HierarchyNote::ZeroSectors { cluster } => self.log(
                    "zero-sectors",
                    format!("cluster-{cluster}"),
                    "no eligible follower",
                ),
                HierarchyNote::Unassigned { node } => {
                    self.log("unassigned", node, "outside every cluster")
                }
                HierarchyNote::Degraded { scope } => {
                    self.log("degraded", scope, "no eligible replacement")
                }
            }
        }
    }

    /// Rebuilds slot schedules and re-routes packets held by sectors that no
    /// longer exist.
    fn rebuild_runtime(&mut self, strict: bool) -> Result<(), ConfigError> {
        let mut old = std::mem::take(&mut self.sectors);
        let live: Vec<SectorId> = self.hierarchy.sectors().keys().copied().collect();
        let mut orphans: Vec<Packet> = Vec::new();
        for (sid, rt) in old.iter_mut() {
            if !live.contains(sid) {
                orphans.append(&mut rt.outbox);
            }
        }
        for sid in live {
            let sector = self.hierarchy.sector(sid).expect("live sector");
            let cc = self
                .hierarchy
                .cluster(sector.cluster)
                .map(|c| c.coordinator);
            // Every member but the cluster coordinator reports sensed data;
            // only the sector's sources are evaluated.
            let mut sources: Vec<NodeId> = sector
                .members
                .iter()
                .copied()
                .filter(|&n| Some(n) != cc)
                .collect();
            let frame = self.cfg.frame.frame_length;
            if sources.len() > frame as usize {
                if strict {
                    return Err(ConfigError::Unschedulable {
                        sector: sid,
                        leaves: sources.len(),
                        slots: frame as usize,
                    });
                }
                let n = sources.len();
                self.log(
                    "unschedulable",
                    format!("sector-{sid}"),
                    format!("{n} sources; excess left silent"),
                );
                sources.truncate(frame as usize);
            }
            let schedule = Rc::new(SlotSchedule::round_robin(
                sid,
                sources,
                frame,
                self.cfg.frame.slot_capacity,
            )?);
            let rt = match old.remove(&sid) {
                Some(mut rt) => {
                    rt.schedule = schedule;
                    rt
                }
                None => SectorRuntime {
                    schedule,
                    inbox: BTreeMap::new(),
                    outbox: Vec::new(),
                },
            };
            self.sectors.insert(sid, rt);
        }
        for mut p in orphans {
            match self
                .hierarchy
                .sector_of(p.origin)
                .filter(|s| self.sectors.contains_key(s))
            {
                Some(sid) => {
                    let sc = self.hierarchy.sector(sid).expect("live sector").coordinator;
                    p.push_hop(sc);
                    self.sectors.get_mut(&sid).expect("runtime").outbox.push(p);
                }
                None => self.log(
                    "lost",
                    p.origin,
                    format!("packet={} sector dissolved", p.id),
                ),
            }
        }
        let ccs: Vec<NodeId> = self
            .hierarchy
            .clusters()
            .values()
            .map(|c| c.coordinator)
            .collect();
        for cc in ccs {
            self.coordinators.entry(cc).or_default();
        }
        Ok(())
    }

    fn schedule_of(&self, node: NodeId) -> Option<Rc<SlotSchedule>> {
        let sid = self.hierarchy.sector_of(node)?;
        let rt = self.sectors.get(&sid)?;
        rt.schedule
            .sources()
            .any(|s| s == node)
            .then(|| rt.schedule.clone())
    }

    fn coordinator_of_sector(&self, sid: SectorId) -> Option<NodeId> {
        let s = self.hierarchy.sector(sid)?;
        self.hierarchy.cluster(s.cluster).map(|c| c.coordinator)
    }

    // ---------------------------------------------------------------- events

    fn run_events(&mut self) {
        while let Some((time, event)) = self.queue.pop() {
            match event {
                Event::EpochStart(e) => self.epoch_start(e),
                Event::Send(t) => self.deliver(t),
                Event::EpochEnd(e) => self.epoch_end(e, time),
                Event::Finish => {
                    let t = self.cfg.horizon as f64 * self.cfg.duty.epoch_length;
                    self.push_frame(t);
                }
            }
        }
    }

    fn new_packet(
        &mut self,
        origin: NodeId,
        kind: PacketKind,
        bytes: u32,
        created_at: f64,
        slot: u32,
    ) -> Packet {
        let id = self.next_packet;
        self.next_packet += 1;
        Packet {
            id,
            origin,
            kind,
            payload_size: bytes,
            created_at,
            slot,
            hops: vec![origin],
        }
    }

    fn plan_attacks(&mut self, e: u64) {
        for i in 0..self.attackers.len() {
            let node = self.attackers[i].node;
            let a = &self.attackers[i];
            let active = e >= a.start && a.end.is_none_or(|end| e < end);
            let plan = match self.schedule_of(node) {
                Some(schedule)
                    if active && self.alive(node) && !self.hierarchy.isolated().contains(&node) =>
                {
                    let victims = self.victims_of(i);
                    let a = &self.attackers[i];
                    let ctx = AttackContext {
                        node,
                        epoch: e,
                        intensity: a.intensity,
                        own_slots: schedule.slots(node),
                        frame_length: schedule.frame_length(),
                        victims: &victims,
                        initial_energy: self.nodes[&node].node.initial_energy,
                    };
                    Some(a.behavior.act(&ctx))
                }
                _ => None,
            };
            self.attackers[i].plan = plan;
        }
    }

    /// Explicit targets, or the attacker's sector peers, within radio range.
    fn victims_of(&self, i: usize) -> Vec<Victim> {
        let a = &self.attackers[i];
        let candidates: Vec<NodeId> = if a.targets.is_empty() {
            let Some(sid) = self.hierarchy.sector_of(a.node) else {
                return Vec::new();
            };
            self.hierarchy
                .sector(sid)
                .map(|s| s.sources().filter(|&n| n != a.node).collect())
                .unwrap_or_default()
        } else {
            a.targets.clone()
        };
        candidates
            .into_iter()
            .filter(|&v| self.alive(v) && self.distance(a.node, v) <= self.cfg.radio.comm_range)
            .filter_map(|v| {
                let schedule = self.schedule_of(v)?;
                Some(Victim {
                    node: v,
                    slots: schedule.slots(v).to_vec(),
                })
            })
            .collect()
    }

    fn epoch_start(&mut self, e: u64) {
        let mut scopes = Scopes::new();
        let due: Vec<NodeId> = self
            .pending_isolation
            .iter()
            .filter(|(at, _)| *at <= e)
            .map(|(_, n)| *n)
            .collect();
        self.pending_isolation.retain(|(at, _)| *at > e);
        for n in due {
            self.isolate(n, &mut scopes);
        }
        self.apply_reconfigurations(scopes);

        self.plan_attacks(e);
        let traffic = self.cfg.traffic.clone();
        let mut in_force = BTreeMap::new();
        let sectors: Vec<SectorId> = self.sectors.keys().copied().collect();
        for sid in sectors {
            let Some(sector) = self.hierarchy.sector(sid) else {
                continue;
            };
            let sc = sector.coordinator;
            let schedule = self.sectors[&sid].schedule.clone();
            for s in schedule.sources().collect::<Vec<_>>() {
                in_force.insert(s, schedule.clone());
                if !self.alive(s) {
                    continue;
                }
                let slots = schedule.slots(s).to_vec();
                let plan = self
                    .attacker_index
                    .get(&s)
                    .and_then(|&i| self.attackers[i].plan.clone());
                let mut normal = traffic.rate(s);
                if self.rng.random_bool(traffic.burst_probability) {
                    normal += traffic.burst_packets;
                }
                if plan.as_ref().is_some_and(|p| p.replaces_normal_traffic) {
                    normal = 0;
                }
                let scratch = self.scratch(s);
                scratch.own.sensing += f64::from(normal) * traffic.sensing_time;
                scratch.own.compute += f64::from(normal) * traffic.compute_time;
                self.generated += u64::from(normal);
                for k in 0..normal as usize {
                    let slot = slots[k % slots.len()];
                    let at = self.clock.slot_start(e, slot);
                    let p = self.new_packet(s, PacketKind::Data, traffic.data_size, at, slot);
                    self.send_at(at, s, sc, traffic.data_size, Payload::Packet(p));
                }
                if let Some(plan) = plan {
                    self.scratch(s).own.extra_awake += plan.self_awake;
                    self.emit_attack(e, s, sc, &plan);
                }
            }
        }
        self.epoch_schedules.insert(e, in_force);
        let keep_from = e.saturating_sub(3);
        self.epoch_schedules.retain(|&k, _| k >= keep_from);

        let frame_end = self.clock.slot_start(e, self.cfg.frame.frame_length);
        self.schedule_relay(frame_end);
        self.queue.push(
            (e + 1) as f64 * self.cfg.duty.epoch_length,
            Event::EpochEnd(e),
        );
    }

    fn emit_attack(&mut self, e: u64, s: NodeId, sc: NodeId, plan: &AttackPlan) {
        let data_size = self.cfg.traffic.data_size;
        let control_size = self.cfg.traffic.control_size;
        let mut targeted = BTreeSet::new();
        for em in &plan.emissions {
            let at = self.clock.slot_start(e, em.slot);
            match (em.kind, em.target) {
                (PacketKind::WakeFrame, Some(victim)) => {
                    targeted.insert(victim);
                    let p = self.new_packet(s, PacketKind::WakeFrame, control_size, at, em.slot);
                    self.send_at(at, s, victim, control_size, Payload::Packet(p));
                }
                _ => {
                    let p = self.new_packet(s, PacketKind::Data, data_size, at, em.slot);
                    self.send_at(at, s, sc, data_size, Payload::Packet(p));
                }
            }
        }
        for &(victim, seconds) in &plan.forced_wake {
            if targeted.contains(&victim) && self.alive(victim) {
                self.scratch(victim).forced_wake += seconds;
            }
        }
    }

    /// Ships last epoch's accepted packets: sector bundles at `at`, cluster
    /// aggregates three relay steps later.
    fn schedule_relay(&mut self, at: f64) {
        let bundles: Vec<(SectorId, NodeId, NodeId)> = self
            .sectors
            .iter()
            .filter(|(_, rt)| !rt.outbox.is_empty())
            .filter_map(|(sid, _)| {
                self.hierarchy
                    .sector(*sid)
                    .map(|s| (*sid, s.coordinator, s.forwarding_head))
            })
            .collect();
        for (sid, sc, fsh) in bundles {
            self.send_at(at, sc, fsh, 0, Payload::BundleFrom(sid));
        }
        let sink = self.hierarchy.sink();
        let step = self.relay_step();
        let ccs: Vec<NodeId> = self.coordinators.keys().copied().collect();
        for cc in ccs {
            self.send_at(at + 3.0 * step, cc, sink, 0, Payload::AggregateFrom(cc));
        }
    }

    fn deliver(&mut self, mut t: Transmission) {
        let now = self.queue.now();
        let payload = std::mem::replace(&mut t.payload, Payload::AggregateFrom(NodeId(0)));
        match payload {
            Payload::BundleFrom(sid) => {
                let packets = self
                    .sectors
                    .get_mut(&sid)
                    .map(|rt| std::mem::take(&mut rt.outbox))
                    .unwrap_or_default();
                if packets.is_empty() {
                    return;
                }
                t.bytes = self.bundle_size(packets.len());
                t.payload = Payload::Bundle {
                    sector: sid,
                    packets,
                };
                self.deliver(t);
            }
            Payload::AggregateFrom(cc) => {
                let packets = self
                    .coordinators
                    .get_mut(&cc)
                    .map(|rt| std::mem::take(&mut rt.outbox))
                    .unwrap_or_default();
                if packets.is_empty() {
                    return;
                }
                t.bytes = self.bundle_size(packets.len());
                if !self.transmit(&t, true, false) {
                    self.log(
                        "lost",
                        cc,
                        format!("{} packets; coordinator dead", packets.len()),
                    );
                    return;
                }
                let sink = self.hierarchy.sink();
                for mut p in packets {
                    p.push_hop(sink);
                    self.deliveries.push(Delivery {
                        packet_id: p.id,
                        origin: p.origin,
                        created_at: p.created_at,
                        delivered_at: now,
                        hops: p.hops,
                    });
                }
            }
            Payload::Packet(p) => {
                let wake = p.kind == PacketKind::WakeFrame;
                if !self.transmit(&t, false, wake) {
                    return;
                }
                self.receive_packet(t.receiver, p);
            }
            Payload::Bundle {
                sector,
                mut packets,
            } => {
                if !self.transmit(&t, true, false) {
                    self.log(
                        "lost",
                        t.sender,
                        format!("{} packets from sector-{sector}", packets.len()),
                    );
                    return;
                }
                let fsh = t.receiver;
                let Some(cc) = self.coordinator_of_sector(sector) else {
                    self.log(
                        "lost",
                        fsh,
                        format!("{} packets; sector dissolved", packets.len()),
                    );
                    return;
                };
                for p in packets.iter_mut() {
                    p.push_hop(fsh);
                    self.forwarding.insert(
                        p.id,
                        ForwardingEntry {
                            node_id: p.origin,
                            member_id: sector,
                            na: format!("{}@sector-{sector}", p.origin),
                            packet_id: p.id,
                            node_info: format!("{:?}", p.kind),
                            next_hop: cc,
                            timestamp: p.created_at,
                        },
                    );
                }
                if fsh == cc {
                    self.validate_batch(cc, sector, packets);
                } else {
                    let bytes = self.bundle_size(packets.len());
                    let at = now + self.relay_step();
                    self.send_at(at, fsh, cc, bytes, Payload::Relay { sector, packets });
                }
            }
            Payload::Relay { sector, packets } => {
                if !self.transmit(&t, true, false) {
                    self.log(
                        "lost",
                        t.sender,
                        format!("{} packets from sector-{sector}", packets.len()),
                    );
                    return;
                }
                self.validate_batch(t.receiver, sector, packets);
            }
        }
    }

    /// Books a transmission on sender and receiver. False when the sender
    /// could not complete it or the receiver is gone.
    fn transmit(&mut self, t: &Transmission, relay: bool, wake_frame: bool) -> bool {
        if t.sender == t.receiver {
            return self.alive(t.sender);
        }
        if !self.alive(t.sender) {
            return false;
        }
        let secs = self.transmit_time(t.bytes, self.distance(t.sender, t.receiver));
        self.data_packets += 1;
        {
            let sc = self.scratch(t.sender);
            if relay {
                sc.duty.transmit += secs;
            } else {
                sc.own.transmit += secs;
            }
        }
        if !self.accrue(t.sender, Mode::Transmit, secs) {
            return false;
        }
        if t.receiver == self.hierarchy.sink() {
            return true;
        }
        if !self.alive(t.receiver) {
            return false;
        }
        if !wake_frame {
            let air = self.airtime(t.bytes);
            self.scratch(t.receiver).duty.extra_awake += air;
        }
        true
    }

    fn receive_packet(&mut self, receiver: NodeId, p: Packet) {
        let Some(sid) = self
            .hierarchy
            .sector_of(p.origin)
            .filter(|s| self.sectors.contains_key(s))
        else {
            if p.kind == PacketKind::Data {
                self.log(
                    "lost",
                    p.origin,
                    format!("packet={} origin outside every sector", p.id),
                );
            }
            return;
        };
        let sc = self.hierarchy.sector(sid).expect("live sector").coordinator;
        if p.kind == PacketKind::WakeFrame {
            // The coordinator overhears frames sent inside its sector.
            if self.alive(sc) {
                self.sectors
                    .get_mut(&sid)
                    .expect("runtime")
                    .inbox
                    .entry(p.origin)
                    .or_default()
                    .push(p);
            }
            return;
        }
        if sc != receiver {
            self.log(
                "lost",
                p.origin,
                format!("packet={} receiver no longer coordinates", p.id),
            );
            return;
        }
        let compute = self.cfg.traffic.compute_time;
        self.scratch(sc).duty.compute += compute;
        self.sectors
            .get_mut(&sid)
            .expect("runtime")
            .inbox
            .entry(p.origin)
            .or_default()
            .push(p);
    }

    fn validate_batch(&mut self, cc: NodeId, sector: SectorId, packets: Vec<Packet>) {
        let checks = self.cfg.detection.enabled && self.policy.validates_at_cc();
        let compute = self.cfg.traffic.compute_time;
        for mut p in packets {
            let fwd = self.forwarding.remove(&p.id);
            if checks {
                self.scratch(cc).duty.compute += compute;
                let epoch = (p.created_at / self.cfg.duty.epoch_length).floor().max(0.0) as u64;
                let schedule = self
                    .epoch_schedules
                    .get(&epoch)
                    .and_then(|m| m.get(&p.origin))
                    .cloned();
                let rt = self.coordinators.entry(cc).or_default();
                let verdict = validate_at_cc(
                    &p,
                    fwd.as_ref(),
                    schedule.as_deref(),
                    &self.quarantine,
                    &self.clock,
                    &mut rt.valid,
                );
                if let Validation::Reject(reason) = verdict {
                    self.reject(cc, sector, &p, reason);
                    continue;
                }
                let reputation = self.reputation[&p.origin].reputation;
                self.coordinators
                    .get_mut(&cc)
                    .expect("runtime")
                    .valid
                    .record(ValidEntry {
                        node_id: p.origin,
                        member_id: sector,
                        na: format!("{}@sector-{sector}", p.origin),
                        reputation,
                    });
            }
            p.push_hop(cc);
            self.coordinators.entry(cc).or_default().outbox.push(p);
        }
    }

    /// A packet the cluster coordinator refused. Slot violations and replays
    /// are new findings against the origin; other reasons only get logged.
    fn reject(&mut self, cc: NodeId, sector: SectorId, p: &Packet, reason: RejectReason) {
        self.log(
            "reject",
            p.origin,
            format!("packet={} reason={reason} at={cc}", p.id),
        );
        if !matches!(reason, RejectReason::SlotMismatch | RejectReason::Duplicate) {
            return;
        }
        let attacker = self.is_attacker(p.origin);
        self.counters.score(attacker);
        let th = self.cfg.adjudication.thresholds();
        let penalty = self.cfg.detection.penalty;
        let rec = self.reputation.get_mut(&p.origin).expect("record");
        rec.observe();
        rec.penalize(penalty);
        let malicious = rec.suspected_count >= th.t_scount || rec.reputation < th.t_reput;
        if malicious && !self.quarantine.contains(p.origin) {
            let epoch = (self.queue.now() / self.cfg.duty.epoch_length).floor() as u64;
            let mut scopes = std::mem::take(&mut self.deferred);
            self.quarantine_node(p.origin, Some(sector), cc, true, epoch, &mut scopes, false);
            self.deferred = scopes;
        }
    }

    // ------------------------------------------------------------- epoch end

    /// Nominal epoch of a source: its configured rate (plus `extra` packets)
    /// sent to `sc`, on top of the duties it actually performed.
    fn expected_activity(
        &self,
        s: NodeId,
        sc: NodeId,
        duty: &EpochActivity,
        extra: f64,
    ) -> EpochActivity {
        let tr = &self.cfg.traffic;
        let n = f64::from(tr.rate(s)) + extra;
        EpochActivity {
            transmit: n * self.transmit_time(tr.data_size, self.distance(s, sc)) + duty.transmit,
            sensing: n * tr.sensing_time + duty.sensing,
            compute: n * tr.compute_time + duty.compute,
            extra_awake: duty.extra_awake,
        }
    }

    fn close_epoch_energy(&mut self) -> BTreeMap<NodeId, Observation> {
        let sink = self.hierarchy.sink();
        let ids: Vec<NodeId> = self
            .nodes
            .keys()
            .copied()
            .filter(|&id| id != sink)
            .collect();
        let mut obs = BTreeMap::new();
        for id in ids {
            if !self.alive(id) {
                self.nodes.get_mut(&id).expect("node").scratch = Scratch::default();
                continue;
            }
            let scratch = self.nodes[&id].scratch;
            let times = epoch_mode_times(&self.cfg.duty, &scratch.activity());
            for mode in [
                Mode::Sleep,
                Mode::Idle,
                Mode::Wakeup,
                Mode::Compute,
                Mode::Sensing,
            ] {
                if !self.accrue(id, mode, times[mode]) {
                    break;
                }
            }
            let reported = self.reported_residual(id);
            let st = self.nodes.get_mut(&id).expect("node");
            let consumed = st.ledger.last_recorded() - st.ledger.residual();
            st.window.push(consumed);
            st.ledger.mark_epoch();
            st.scratch = Scratch::default();
            if !st.dead {
                obs.insert(
                    id,
                    Observation {
                        times,
                        scratch,
                        consumed,
                        reported,
                    },
                );
            }
        }
        obs
    }

    fn reported_residual(&self, id: NodeId) -> f64 {
        self.attacker_index
            .get(&id)
            .and_then(|&i| self.attackers[i].plan.as_ref())
            .and_then(|p| p.reported_residual)
            .unwrap_or_else(|| self.nodes[&id].ledger.residual())
    }

    fn epoch_end(&mut self, e: u64, t: f64) {
        let obs = self.close_epoch_energy();
        let mut scopes = std::mem::take(&mut self.deferred);
        let sectors: Vec<SectorId> = self.sectors.keys().copied().collect();
        for sid in sectors {
            self.process_sector(sid, e, &obs, &mut scopes);
        }
        self.health_checks(&mut scopes);
        self.apply_reconfigurations(scopes);
        let _ = self.rebuild_runtime(false);
        self.hierarchy.snapshot_backups(e + 1);

        if e + 1 < self.cfg.horizon {
            self.push_frame(t);
            self.queue.push(t, Event::EpochStart(e + 1));
        } else {
            self.schedule_relay(t);
            let step = self.relay_step();
            self.queue.push(t + 4.0 * step, Event::Finish);
        }
    }

    fn process_sector(
        &mut self,
        sid: SectorId,
        e: u64,
        obs: &BTreeMap<NodeId, Observation>,
        scopes: &mut Scopes,
    ) {
        let Some(sector) = self.hierarchy.sector(sid).cloned() else {
            return;
        };
        let sc = sector.coordinator;
        let inbox = std::mem::take(&mut self.sectors.get_mut(&sid).expect("runtime").inbox);
        if !self.alive(sc) {
            let n: usize = inbox.values().map(Vec::len).sum();
            if n > 0 {
                self.log("lost", sc, format!("{n} packets; coordinator dead"));
            }
            return;
        }
        let schedule = self.sectors[&sid].schedule.clone();
        let mut excluded = BTreeSet::new();
        if self.cfg.detection.enabled && self.phase.ids_active() {
            let referrals = self.first_layer(&sector, &schedule, e, obs, &inbox, scopes);
            excluded = self.second_layer(&sector, &schedule, e, obs, referrals, scopes);
        }
        let mut outbox = Vec::new();
        for (origin, packets) in inbox {
            if excluded.contains(&origin) || self.hierarchy.isolated().contains(&origin) {
                continue;
            }
            for mut p in packets {
                if p.kind == PacketKind::WakeFrame {
                    continue;
                }
                p.push_hop(sc);
                outbox.push(p);
            }
        }
        self.sectors
            .get_mut(&sid)
            .expect("runtime")
            .outbox
            .extend(outbox);
    }

    /// Sector-coordinator evaluation of every source; returns the suspects.
    fn first_layer(
        &mut self,
        sector: &Sector,
        schedule: &SlotSchedule,
        e: u64,
        obs: &BTreeMap<NodeId, Observation>,
        inbox: &BTreeMap<NodeId, Vec<Packet>>,
        scopes: &mut Scopes,
    ) -> Vec<Referral> {
        let sc = sector.coordinator;
        let cost = self.cfg.detection.evaluation_cost;
        let epoch_len = self.cfg.duty.epoch_length;
        let mut referrals = Vec::new();
        let sources: Vec<NodeId> = sector
            .sources()
            .filter(|&n| schedule.sources().any(|m| m == n))
            .collect();
        for s in sources {
            let Some(ob) = obs.get(&s) else { continue };
            if self.quarantine.contains(s) {
                continue;
            }
            if self
                .nodes
                .get_mut(&sc)
                .expect("node")
                .budget
                .spend(cost)
                .is_err()
            {
                if self.unavailable_logged.insert(sc) {
                    self.log(
                        "detection-unavailable",
                        sc,
                        "coordinator out of detection power",
                    );
                }
                if self.hierarchy.layout() == Layout::Sectorized {
                    scopes
                        .entry(Scope::Sector(sector.id))
                        .or_insert(ReconfigTrigger::DetectionPowerExhausted);
                }
                break;
            }
            let compute = self.cfg.traffic.compute_time;
            self.scratch(sc).duty.compute += compute;
            let asleep = ob.times[Mode::Sleep];
            let av = AcquisitionVector {
                leaf: s,
                packets: inbox.get(&s).cloned().unwrap_or_default(),
                observed_wake: epoch_len - asleep - ob.times[Mode::Idle],
                observed_sleep: asleep,
                reported_residual: ob.reported,
            };
            let recorded = self.recorded[&s];
            let estimate = recorded - ob.consumed;
            let view = LedgerView {
                consumed: ob.consumed,
                last_recorded: recorded,
                remaining_lifetime: calculated_remaining_lifetime(
                    estimate,
                    self.nodes[&s].window.mean(),
                ),
            };
            let expected = self.expected_activity(s, sc, &ob.scratch.duty, 0.0);
            let thresholds = DetectionThresholds::around(
                &epoch_mode_times(&self.cfg.duty, &expected),
                &self.cfg.energy,
                &self.cfg.detection,
            );
            let verdict =
                evaluate_insomnia(&self.registry, &av, Some(&view), schedule, &thresholds, e)
                    .expect("view supplied");
            self.recorded.insert(s, av.reported_residual.min(estimate));
            let attacker = self.is_attacker(s);
            if !attacker {
                self.flag_stats.benign_node_epochs += 1;
            }
            let rec = self.reputation.get_mut(&s).expect("record");
            rec.observe();
            if verdict.insomnia {
                rec.penalize(self.cfg.detection.penalty);
                self.flag_stats.flags += 1;
                if !attacker {
                    self.flag_stats.benign_flags += 1;
                }
                self.log("sids-flag", s, verdict.summary());
                if sector.monitor != sc {
                    self.control(sc, Some(sector.monitor));
                }
                referrals.push(Referral {
                    node: s,
                    av,
                    view,
                    thresholds,
                });
            } else {
                rec.reward(self.cfg.detection.reward);
            }
        }
        referrals
    }

    fn recheck_allowance(
        &self,
        sector: &Sector,
        schedule: &SlotSchedule,
        s: NodeId,
        ob: &Observation,
    ) -> RecheckAllowance {
        let activity = ob.scratch.activity();
        let without = EpochActivity {
            extra_awake: activity.extra_awake - ob.scratch.forced_wake,
            ..activity
        };
        let energy = |a: &EpochActivity| {
            self.cfg
                .energy
                .energy_for(&epoch_mode_times(&self.cfg.duty, a))
        };
        let allowance = self.cfg.adjudication.burst_allowance;
        let padded = self.expected_activity(s, sector.coordinator, &ob.scratch.duty, allowance);
        let budget = schedule.budget(s).max(1);
        RecheckAllowance {
            induced_wake: ob.scratch.forced_wake,
            induced_energy: (energy(&activity) - energy(&without)).max(0.0),
            tnec_floor: energy(&padded) * (1.0 + self.cfg.detection.tolerance),
            buffer_floor: 100.0 * (f64::from(self.cfg.traffic.rate(s)) + allowance)
                / f64::from(budget),
        }
    }

    /// Monitor rulings on the suspects; returns the nodes whose packets must
    /// not be forwarded.
    fn second_layer(
        &mut self,
        sector: &Sector,
        schedule: &SlotSchedule,
        e: u64,
        obs: &BTreeMap<NodeId, Observation>,
        referrals: Vec<Referral>,
        scopes: &mut Scopes,
    ) -> BTreeSet<NodeId> {
        let mut excluded = BTreeSet::new();
        let monitor = sector.monitor;
        let fallback = sector.monitor_fallback || self.hierarchy.layout() == Layout::NonSectorized;
        let monitor_scope = if fallback {
            Scope::Cluster(sector.cluster)
        } else {
            Scope::Sector(sector.id)
        };
        let thresholds = self.cfg.adjudication.thresholds();
        let cost = self.cfg.adjudication.cost_per_evaluation;
        for r in referrals {
            if !self.alive(monitor) || self.hierarchy.isolated().contains(&monitor) {
                scopes
                    .entry(monitor_scope)
                    .or_insert(ReconfigTrigger::CoordinatorDead);
                break;
            }
            let rechecked: Option<InsomniaVerdict> = self.policy.wants_recheck().then(|| {
                let allowance = self.recheck_allowance(sector, schedule, r.node, &obs[&r.node]);
                recheck(
                    &self.registry,
                    &r.av,
                    &r.view,
                    schedule,
                    &r.thresholds,
                    &allowance,
                    e,
                )
            });
            let record = self.reputation[&r.node].clone();
            let compute = self.cfg.traffic.compute_time;
            self.scratch(monitor).duty.compute += compute;
            let was_active = self.nodes[&monitor].budget.active();
            let ruling = {
                let budget = &mut self.nodes.get_mut(&monitor).expect("node").budget;
                self.policy
                    .decide(&record, rechecked.as_ref(), &thresholds, budget, cost)
            };
            if was_active && !self.nodes[&monitor].budget.active() {
                let dp = self.nodes[&monitor].budget.dp();
                self.log("detection-power-exhausted", monitor, format!("dp={dp:.3}"));
            }
            let ruling = match ruling {
                Ok(r) => r,
                Err(err) => {
                    self.log(
                        "adjudication-unavailable",
                        r.node,
                        format!("monitor={monitor} {err}"),
                    );
                    if !fallback {
                        scopes
                            .entry(monitor_scope)
                            .or_insert(ReconfigTrigger::DetectionPowerExhausted);
                    }
                    break;
                }
            };
            self.log("ruling", r.node, format!("{ruling} monitor={monitor}"));
            match ruling {
                Ruling::Malicious => {
                    excluded.insert(r.node);
                    self.quarantine_node(r.node, Some(sector.id), monitor, false, e, scopes, true);
                }
                Ruling::Cleared => {
                    let q = self.cfg.detection.reward;
                    self.reputation.get_mut(&r.node).expect("record").reward(q);
                }
                Ruling::StillSuspected => {
                    if self.hierarchy.role(r.node) == Some(RoleKind::ForwardingSectorHead) {
                        scopes
                            .entry(Scope::Sector(sector.id))
                            .or_insert(ReconfigTrigger::NodeSuspectedHighConsumption);
                    }
                }
            }
        }
        excluded
    }

    #[allow(clippy::too_many_arguments)]
    fn quarantine_node(
        &mut self,
        node: NodeId,
        sector: Option<SectorId>,
        by: NodeId,
        scout: bool,
        epoch: u64,
        scopes: &mut Scopes,
        score: bool,
    ) {
        let role = self.hierarchy.role(node);
        let entry = QuarantineEntry {
            node_id: node,
            member_id: sector,
            na: match sector {
                Some(s) => format!("{node}@sector-{s}"),
                None => node.to_string(),
            },
            monitor: role == Some(RoleKind::SectorMonitor),
            compromised: role.is_some_and(|r| r != RoleKind::LeafNode),
            trust: self.reputation[&node].reputation,
            scout,
            malicious: true,
            since: epoch,
        };
        if !self.quarantine.insert(entry) {
            return;
        }
        if score {
            let attacker = self.is_attacker(node);
            self.counters.score(attacker);
        }
        let now = self.queue.now();
        if let Some(&i) = self.attacker_index.get(&node) {
            self.attackers[i].quarantined_at.get_or_insert(now);
        }
        self.log("quarantine", node, format!("by={by} scout={scout}"));
        let cc = self
            .hierarchy
            .cluster_of(node)
            .and_then(|c| self.hierarchy.cluster(c))
            .map(|c| c.coordinator);
        if let Some(cc) = cc {
            if cc != by {
                self.control(by, Some(cc));
            }
            self.control(cc, Some(self.hierarchy.sink()));
            self.control(cc, None);
        }
        let delay = self.cfg.adjudication.quarantine_delay;
        if delay == 0 {
            self.isolate(node, scopes);
        } else {
            self.pending_isolation.push((epoch + 1 + delay, node));
        }
    }

    fn isolate(&mut self, node: NodeId, scopes: &mut Scopes) {
        if let Some(scope) = self.hierarchy.isolate(node) {
            scopes.insert(scope, ReconfigTrigger::CoordinatorDeviates);
        }
        self.log("isolate", node, "removed from hierarchy");
    }

    fn health_checks(&mut self, scopes: &mut Scopes) {
        let sectorized = self.hierarchy.layout() == Layout::Sectorized;
        for (node, kind, scope) in self.hierarchy.role_holders() {
            if !self.alive(node) {
                scopes
                    .entry(scope)
                    .or_insert(ReconfigTrigger::CoordinatorDead);
            } else if sectorized
                && matches!(kind, RoleKind::SectorCoordinator | RoleKind::SectorMonitor)
                && !self.nodes[&node].budget.active()
            {
                scopes
                    .entry(scope)
                    .or_insert(ReconfigTrigger::DetectionPowerExhausted);
            }
        }
    }

    fn apply_reconfigurations(&mut self, scopes: Scopes) {
        if scopes.is_empty() {
            return;
        }
        let clusters: BTreeSet<_> = scopes
            .keys()
            .filter_map(|s| match s {
                Scope::Cluster(c) => Some(*c),
                Scope::Sector(_) => None,
            })
            .collect();
        self.enter(Phase::Reconfiguration);
        for (scope, trigger) in scopes {
            if let Scope::Sector(sid) = scope {
                match self.hierarchy.sector(sid) {
                    Some(s) if !clusters.contains(&s.cluster) => {}
                    _ => continue,
                }
            }
            self.log("reconfig", scope, trigger.to_string());
            let cands = self.candidates();
            let input = ElectionInput {
                candidates: &cands,
                radio: &self.cfg.radio,
                sector_radius: self.cfg.sector_radius(),
                dp_min: self.cfg.adjudication.dp_min,
                seed: self.cfg.seed,
            };
            let notes = self
                .hierarchy
                .reconfigure(scope, trigger, &input, &self.neighbors);
            self.log_notes(&notes);
            if let Scope::Cluster(cid) = scope {
                if let Some(cl) = self.hierarchy.cluster(cid).cloned() {
                    self.control(cl.coordinator, None);
                    for m in cl.members {
                        self.control(m, Some(cl.coordinator));
                    }
                }
            }
            for n in &notes {
                if let HierarchyNote::SectorFormed { sector, .. } = n {
                    self.announce_sector(*sector);
                }
            }
        }
        let _ = self.rebuild_runtime(false);
        self.enter(Phase::DataTransfer);
    }

    // --------------------------------------------------------------- metrics

    fn push_frame(&mut self, time: f64) {
        let sink = self.hierarchy.sink();
        let alive_count = self
            .nodes
            .values()
            .filter(|s| s.node.id != sink && !s.dead)
            .count();
        let energy_consumed = self.nodes.values().map(|s| s.ledger.consumed()).sum();
        self.frames.push(MetricsFrame {
            time,
            alive_count,
            energy_consumed,
            truedetect: self.counters.truedetect,
            phantomdetect: self.counters.phantomdetect,
            accuracy: self.counters.accuracy(),
            data_packets: self.data_packets,
            control_packets: self.control_packets,
            overhead_ratio: MetricsFrame::overhead(self.data_packets, self.control_packets),
            quarantined_count: self.quarantine.len(),
        });
        let profile = &self.cfg.energy;
        self.audit.push(EnergyAudit {
            residual: self.nodes.values().map(|s| s.ledger.residual()).collect(),
            accounted: self
                .nodes
                .values()
                .map(|s| s.ledger.accounted_consumption(profile))
                .sum(),
        });
    }

    fn finish(self) -> RunOutput {
        let nodes = self
            .nodes
            .values()
            .map(|s| NodeSummary {
                id: s.node.id,
                kind: s.node.kind,
                initial_energy: s.node.initial_energy,
                residual: s.ledger.residual(),
                accounted: s.ledger.accounted_consumption(&self.cfg.energy),
                role: self
                    .hierarchy
                    .role(s.node.id)
                    .map(|k| Role::new(k, s.budget.dp())),
                quarantined: self.quarantine.contains(s.node.id),
            })
            .collect();
        let attackers = self
            .attackers
            .iter()
            .map(|a| AttackerOutcome {
                node: a.node,
                archetype: a.behavior.name().to_owned(),
                quarantined_at: a.quarantined_at,
            })
            .collect();
        RunOutput {
            resolved: self.cfg,
            frames: self.frames,
            audit: self.audit,
            events: self.events,
            quarantine: self.quarantine.iter().cloned().collect(),
            counters: self.counters,
            attackers,
            deliveries: self.deliveries,
            nodes,
            flag_stats: self.flag_stats,
            generated_packets: self.generated,
        }
    }
}
