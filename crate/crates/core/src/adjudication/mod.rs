//! Second-layer decisions: rulings on suspects, quarantine, validation of
//! forwarded packets at cluster coordinators, detection-power budgets and
//! scoring against ground truth.

mod policy;

pub use policy::{policy_by_name, AdjudicationPolicy, Exids, SidsFinal, POLICY_NAMES};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detection::{
    evaluate_insomnia, AcquisitionVector, CaseRegistry, DetectionThresholds, InsomniaVerdict,
    LedgerView, ReputationRecord,
};
use crate::error::ConfigError;
use crate::sim::{Packet, SlotSchedule};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjudicationConfig {
    /// Registered policy name.
    pub policy: String,
    pub t_scount: u32,
    /// Percent of observations that were suspicious.
    pub t_per: f64,
    pub t_reput: f64,
    /// Detection power spent per ruling.
    pub cost_per_evaluation: f64,
    pub dp_min: f64,
    /// Extra packets per epoch a re-check tolerates before blaming the leaf.
    pub burst_allowance: f64,
    /// Epochs before a sector coordinator learns of a quarantine.
    pub quarantine_delay: u64,
}

impl Default for AdjudicationConfig {
    fn default() -> Self {
        AdjudicationConfig {
            policy: "exids".into(),
            t_scount: 3,
            t_per: 50.0,
            t_reput: 0.3,
            cost_per_evaluation: 1.0,
            dp_min: 1.0,
            burst_allowance: 10.0,
            quarantine_delay: 0,
        }
    }
}

impl AdjudicationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        policy_by_name(&self.policy)?;
        if !(0.0..=1.0).contains(&self.t_reput) {
            return Err(ConfigError::invalid(
                "adjudication.t_reput",
                "must lie in [0, 1]",
            ));
        }
        let nonneg = [
            ("adjudication.t_per", self.t_per),
            ("adjudication.cost_per_evaluation", self.cost_per_evaluation),
            ("adjudication.dp_min", self.dp_min),
            ("adjudication.burst_allowance", self.burst_allowance),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(field, "must be a finite value >= 0"));
            }
        }
        Ok(())
    }

    pub fn thresholds(&self) -> AdjudicationThresholds {
        AdjudicationThresholds {
            t_scount: self.t_scount,
            t_per: self.t_per,
            t_reput: self.t_reput,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjudicationThresholds {
    pub t_scount: u32,
    pub t_per: f64,
    pub t_reput: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ruling {
    Malicious,
    Cleared,
    StillSuspected,
}

impl fmt::Display for Ruling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ruling::Malicious => "malicious",
            Ruling::Cleared => "cleared",
            Ruling::StillSuspected => "still-suspected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjudicationUnavailable;

impl fmt::Display for AdjudicationUnavailable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("detection power exhausted")
    }
}

/// Detection-power budget of a monitoring role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBudget {
    dp: f64,
    initial: f64,
    dp_min: f64,
}

impl DetectionBudget {
    pub fn new(dp: f64, dp_min: f64) -> Self {
        DetectionBudget {
            dp: dp.max(0.0),
            initial: dp.max(0.0),
            dp_min,
        }
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn dp_min(&self) -> f64 {
        self.dp_min
    }

    pub fn active(&self) -> bool {
        self.dp > self.dp_min
    }

    /// Spends `cost` if the budget is still active.
    pub fn spend(&mut self, cost: f64) -> Result<(), AdjudicationUnavailable> {
        if !self.active() {
            return Err(AdjudicationUnavailable);
        }
        self.dp = (self.dp - cost.max(0.0)).max(0.0);
        Ok(())
    }
}

/// The core ruling. A clean re-check clears the suspect; otherwise any of the
/// three thresholds makes it malicious.
pub fn adjudicate(
    record: &ReputationRecord,
    recheck: Option<&InsomniaVerdict>,
    thresholds: &AdjudicationThresholds,
    budget: &mut DetectionBudget,
    cost: f64,
) -> Result<Ruling, AdjudicationUnavailable> {
    budget.spend(cost)?;
    if recheck.is_some_and(|v| !v.insomnia) {
        return Ok(Ruling::Cleared);
    }
    let malicious = record.suspected_count >= thresholds.t_scount
        || record.suspected_percent() > thresholds.t_per
        || record.reputation < thresholds.t_reput;
    Ok(if malicious {
        Ruling::Malicious
    } else {
        Ruling::StillSuspected
    })
}

/// What the monitor can explain away when it re-evaluates a suspect.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecheckAllowance {
    /// Awake seconds caused by frames from other nodes.
    pub induced_wake: f64,
    /// Joules those forced wake-ups cost.
    pub induced_energy: f64,
    /// TNEC for the nominal load plus the burst allowance.
    pub tnec_floor: f64,
    /// Th_buf for the nominal load plus the burst allowance.
    pub buffer_floor: f64,
}

/// Re-runs the insomnia cases on evidence with attributable effects removed.
pub fn recheck(
    registry: &CaseRegistry,
    av: &AcquisitionVector,
    view: &LedgerView,
    schedule: &SlotSchedule,
    base: &DetectionThresholds,
    allowance: &RecheckAllowance,
    epoch: u64,
) -> InsomniaVerdict {
    let mut av = av.clone();
    let induced = allowance.induced_wake.min(av.observed_wake).max(0.0);
    av.observed_wake -= induced;
    av.observed_sleep += induced;
    let consumed = (view.consumed - allowance.induced_energy).max(0.0);
    let th = DetectionThresholds {
        tnec: base.tnec.max(allowance.tnec_floor),
        th_buffer: base.th_buffer.max(allowance.buffer_floor),
        ..*base
    };
    let adjusted = LedgerView {
        consumed,
        last_recorded: view.last_recorded - view.consumed,
        remaining_lifetime: if consumed <= th.tnec {
            f64::INFINITY
        } else {
            view.remaining_lifetime
        },
    };
    evaluate_insomnia(registry, &av, Some(&adjusted), schedule, &th, epoch).expect("view supplied")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarantineEntry {
    pub node_id: NodeId,
    /// Sector the node belonged to when isolated.
    pub member_id: Option<u32>,
    pub na: String,
    /// The node held the monitor role when isolated.
    pub monitor: bool,
    /// The node held any coordinating role when isolated.
    pub compromised: bool,
    pub trust: f64,
    /// Isolated through the cluster coordinator's packet checks rather than
    /// a monitor ruling.
    pub scout: bool,
    pub malicious: bool,
    pub since: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuarantineList {
    entries: BTreeMap<NodeId, QuarantineEntry>,
}

impl QuarantineList {
    /// Adds the entry unless the node is already listed. Returns whether it
    /// was added.
    pub fn insert(&mut self, entry: QuarantineEntry) -> bool {
        if self.entries.contains_key(&entry.node_id) {
            return false;
        }
        self.entries.insert(entry.node_id, entry);
        true
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.entries.contains_key(&node)
    }

    pub fn get(&self, node: NodeId) -> Option<&QuarantineEntry> {
        self.entries.get(&node)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QuarantineEntry> {
        self.entries.values()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingEntry {
    pub node_id: NodeId,
    pub member_id: u32,
    pub na: String,
    pub packet_id: u64,
    pub node_info: String,
    pub next_hop: NodeId,
    /// Origin's send time as relayed.
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidEntry {
    pub node_id: NodeId,
    pub member_id: u32,
    pub na: String,
    pub reputation: f64,
}

/// Cluster coordinator state: accepted origins and every packet id seen.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidList {
    entries: BTreeMap<NodeId, ValidEntry>,
    seen: BTreeSet<u64>,
}

impl ValidList {
    pub fn record(&mut self, entry: ValidEntry) {
        self.entries.insert(entry.node_id, entry);
    }

    pub fn get(&self, node: NodeId) -> Option<&ValidEntry> {
        self.entries.get(&node)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Marks `id` as seen, returning false for a replay.
    pub fn first_sight(&mut self, id: u64) -> bool {
        self.seen.insert(id)
    }
}

/// Maps timestamps to slot indices within an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameClock {
    pub epoch_length: f64,
    pub slot_duration: f64,
}

impl FrameClock {
    pub fn slot_of(&self, t: f64) -> u32 {
        let within = t.rem_euclid(self.epoch_length);
        (within / self.slot_duration + 1e-9).floor() as u32
    }

    pub fn slot_start(&self, epoch: u64, slot: u32) -> f64 {
        epoch as f64 * self.epoch_length + f64::from(slot) * self.slot_duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    Quarantined,
    SlotMismatch,
    Duplicate,
    Corrupted,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::Quarantined => "quarantined-origin",
            RejectReason::SlotMismatch => "slot-mismatch",
            RejectReason::Duplicate => "duplicate",
            RejectReason::Corrupted => "corrupted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    Accept,
    Reject(RejectReason),
}

/// Cluster-coordinator check of a packet delivered by a forwarder.
///
/// Rejects corrupted packets first, then quarantined origins, slot
/// mismatches, and finally replays. Only accepted packets mark their id as
/// seen.
pub fn validate_at_cc(
    pkt: &Packet,
    forwarding: Option<&ForwardingEntry>,
    schedule: Option<&SlotSchedule>,
    quarantine: &QuarantineList,
    clock: &FrameClock,
    valid: &mut ValidList,
) -> Validation {
    let Some(fwd) = forwarding.filter(|f| f.packet_id == pkt.id && f.node_id == pkt.origin) else {
        return Validation::Reject(RejectReason::Corrupted);
    };
    if pkt.is_malformed() || !fwd.timestamp.is_finite() {
        return Validation::Reject(RejectReason::Corrupted);
    }
    if quarantine.contains(pkt.origin) {
        return Validation::Reject(RejectReason::Quarantined);
    }
    let owns = schedule.is_some_and(|s| s.owns(pkt.origin, pkt.slot));
    if clock.slot_of(fwd.timestamp) != pkt.slot || !owns {
        return Validation::Reject(RejectReason::SlotMismatch);
    }
    if !valid.first_sight(pkt.id) {
        return Validation::Reject(RejectReason::Duplicate);
    }
    Validation::Accept
}

/// Oracle-side tallies of malicious findings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionCounters {
    pub truedetect: u64,
    pub phantomdetect: u64,
}

impl DetectionCounters {
    pub fn score(&mut self, against_attacker: bool) {
        if against_attacker {
            self.truedetect += 1;
        } else {
            self.phantomdetect += 1;
        }
    }

    /// `truedetect / (truedetect + phantomdetect)`, 1 when both are zero.
    pub fn accuracy(&self) -> f64 {
        let total = self.truedetect + self.phantomdetect;
        if total == 0 {
            1.0
        } else {
            self.truedetect as f64 / total as f64
        }
    }
}

/// Scores a ruling; only malicious rulings count.
pub fn score_ruling(
    ruling: Ruling,
    suspect: NodeId,
    attackers: &BTreeSet<NodeId>,
    counters: &mut DetectionCounters,
) {
    if ruling == Ruling::Malicious {
        counters.score(attackers.contains(&suspect));
    }
}
