//! First-layer detector run by sector coordinators: the five insomnia cases,
//! suspect bookkeeping and reputation.

mod cases;

pub use cases::{
    BufferOverflow, CaseInput, CaseRegistry, DutyCycleDeviation, EnergyJump, EnergyRate,
    InsomniaCase, SlotMismatch,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyProfile, Mode, ModeDurations};
use crate::error::ConfigError;
use crate::sim::{Packet, SlotSchedule};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// Master switch for both detection layers.
    pub enabled: bool,
    /// Names of the insomnia cases to evaluate.
    pub cases: Vec<String>,
    /// Band above the normal consumption before Case 1 fires.
    pub tolerance: f64,
    /// Band around the expected wake and sleep times for Case 2.
    pub wake_tolerance: f64,
    /// ThL, epochs.
    pub th_lifetime: f64,
    /// Th_buf, percent of the slot budget.
    pub th_buffer: f64,
    /// Relative jump of reported residual energy that counts as Case 4.
    pub energy_jump_delta: f64,
    pub penalty: f64,
    pub reward: f64,
    /// Epochs in the trailing consumption window behind CRLT.
    pub crlt_window: usize,
    /// Detection power spent per acquisition vector evaluated.
    pub evaluation_cost: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            enabled: true,
            cases: CaseRegistry::standard()
                .names()
                .map(str::to_owned)
                .collect(),
            tolerance: 0.2,
            wake_tolerance: 0.2,
            th_lifetime: 2.0,
            th_buffer: 50.0,
            energy_jump_delta: 0.5,
            penalty: 0.2,
            reward: 0.05,
            crlt_window: 5,
            evaluation_cost: 0.005,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let nonneg = [
            ("detection.tolerance", self.tolerance),
            ("detection.th_lifetime", self.th_lifetime),
            ("detection.energy_jump_delta", self.energy_jump_delta),
            ("detection.evaluation_cost", self.evaluation_cost),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(field, "must be a finite value >= 0"));
            }
        }
        if !(0.0..1.0).contains(&self.wake_tolerance) {
            return Err(ConfigError::invalid(
                "detection.wake_tolerance",
                "must lie in [0, 1)",
            ));
        }
        if !(self.th_buffer > 0.0 && self.th_buffer <= 100.0) {
            return Err(ConfigError::invalid(
                "detection.th_buffer",
                "must lie in (0, 100]",
            ));
        }
        if !(0.0..=1.0).contains(&self.penalty) || !(0.0..=1.0).contains(&self.reward) {
            return Err(ConfigError::invalid(
                "detection.penalty",
                "penalty and reward must lie in [0, 1]",
            ));
        }
        if self.reward >= self.penalty {
            return Err(ConfigError::invalid(
                "detection.reward",
                "must be smaller than the penalty",
            ));
        }
        if self.crlt_window == 0 {
            return Err(ConfigError::invalid(
                "detection.crlt_window",
                "must be >= 1",
            ));
        }
        CaseRegistry::select(&self.cases)?;
        Ok(())
    }
}

/// Thresholds applied to one acquisition vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionThresholds {
    /// TNEC, joules per epoch.
    pub tnec: f64,
    /// ThL, epochs.
    pub th_lifetime: f64,
    /// ThT_wk, seconds.
    pub th_wake: f64,
    /// ThT_sl, seconds.
    pub th_sleep: f64,
    /// Th_buf, percent.
    pub th_buffer: f64,
    pub energy_jump_delta: f64,
}

impl DetectionThresholds {
    /// Thresholds around an expected epoch: consumption and awake time widened
    /// by the tolerances, expected sleep narrowed.
    pub fn around(
        expected: &ModeDurations,
        profile: &EnergyProfile,
        cfg: &DetectionConfig,
    ) -> Self {
        let awake = expected.total() - expected[Mode::Sleep] - expected[Mode::Idle];
        DetectionThresholds {
            tnec: profile.energy_for(expected) * (1.0 + cfg.tolerance),
            th_lifetime: cfg.th_lifetime,
            th_wake: awake * (1.0 + cfg.wake_tolerance),
            th_sleep: expected[Mode::Sleep] * (1.0 - cfg.wake_tolerance),
            th_buffer: cfg.th_buffer,
            energy_jump_delta: cfg.energy_jump_delta,
        }
    }
}

/// What the sector coordinator gathered about one source over one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionVector {
    pub leaf: NodeId,
    pub packets: Vec<Packet>,
    /// Seconds awake this epoch.
    pub observed_wake: f64,
    /// Seconds asleep this epoch.
    pub observed_sleep: f64,
    /// Residual energy the leaf reports about itself.
    pub reported_residual: f64,
}

/// The coordinator's energy-side knowledge of a leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerView {
    /// Energy consumed this epoch (EC).
    pub consumed: f64,
    /// Last recorded energy (LRE) held by the coordinator.
    pub last_recorded: f64,
    /// CRLT over the trailing window, epochs.
    pub remaining_lifetime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub observed: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsomniaVerdict {
    pub node: NodeId,
    pub epoch: u64,
    pub flags: [bool; 5],
    pub insomnia: bool,
    /// Keyed by case number 1–5; present for each raised flag.
    pub evidence: BTreeMap<u8, Evidence>,
}

impl InsomniaVerdict {
    pub fn raised(&self) -> impl Iterator<Item = u8> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, f)| **f)
            .map(|(i, _)| i as u8 + 1)
    }

    /// Compact `case=observed/threshold` listing without commas.
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .evidence
            .iter()
            .map(|(c, e)| format!("case{c}={:.6}/{:.6}", e.observed, e.threshold))
            .collect();
        parts.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerdictUnavailable {
    pub node: NodeId,
}

impl fmt::Display for VerdictUnavailable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no ledger view for {}", self.node)
    }
}

/// Runs every case in `registry` and combines the flags.
pub fn evaluate_insomnia(
    registry: &CaseRegistry,
    av: &AcquisitionVector,
    view: Option<&LedgerView>,
    schedule: &SlotSchedule,
    thresholds: &DetectionThresholds,
    epoch: u64,
) -> Result<InsomniaVerdict, VerdictUnavailable> {
    let view = view.ok_or(VerdictUnavailable { node: av.leaf })?;
    let input = CaseInput {
        av,
        view,
        schedule,
        thresholds,
    };
    let mut flags = [false; 5];
    let mut evidence = BTreeMap::new();
    for case in registry.cases() {
        if let Some(e) = case.check(&input) {
            let n = case.number();
            flags[usize::from(n - 1)] = true;
            evidence.insert(n, e);
        }
    }
    Ok(InsomniaVerdict {
        node: av.leaf,
        epoch,
        flags,
        insomnia: flags.iter().any(|f| *f),
        evidence,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReputationRecord {
    pub node: NodeId,
    pub reputation: f64,
    pub suspected_count: u32,
    pub observations: u32,
}

impl ReputationRecord {
    pub fn new(node: NodeId) -> Self {
        ReputationRecord {
            node,
            reputation: 1.0,
            suspected_count: 0,
            observations: 0,
        }
    }

    pub fn observe(&mut self) {
        self.observations += 1;
    }

    pub fn penalize(&mut self, p: f64) {
        self.reputation = (self.reputation - p).clamp(0.0, 1.0);
        self.suspected_count += 1;
        self.observations = self.observations.max(self.suspected_count);
    }

    pub fn reward(&mut self, q: f64) {
        self.reputation = (self.reputation + q).clamp(0.0, 1.0);
    }

    /// Percentage of observations that ended in suspicion.
    pub fn suspected_percent(&self) -> f64 {
        if self.observations == 0 {
            0.0
        } else {
            100.0 * f64::from(self.suspected_count) / f64::from(self.observations)
        }
    }
}

/// Suspects referred to the monitor in the current epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuspectList {
    epoch: u64,
    nodes: BTreeSet<NodeId>,
}

impl SuspectList {
    pub fn begin_epoch(&mut self, epoch: u64) {
        if epoch != self.epoch {
            self.epoch = epoch;
            self.nodes.clear();
        }
    }

    /// True the first time `node` is added this epoch.
    pub fn add(&mut self, node: NodeId) -> bool {
        self.nodes.insert(node)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }
}
