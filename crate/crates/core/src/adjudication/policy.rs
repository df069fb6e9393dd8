use crate::detection::{InsomniaVerdict, ReputationRecord};
use crate::error::ConfigError;

use super::{adjudicate, AdjudicationThresholds, AdjudicationUnavailable, DetectionBudget, Ruling};

/// How a first-layer suspicion becomes a final ruling.
pub trait AdjudicationPolicy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the policy wants a re-check of the suspect's evidence.
    fn wants_recheck(&self) -> bool;

    fn decide(
        &self,
        record: &ReputationRecord,
        recheck: Option<&InsomniaVerdict>,
        thresholds: &AdjudicationThresholds,
        budget: &mut DetectionBudget,
        cost: f64,
    ) -> Result<Ruling, AdjudicationUnavailable>;

    /// Whether cluster coordinators check forwarded packets.
    fn validates_at_cc(&self) -> bool;
}

/// Monitor-side re-check and threshold ruling, paid from the monitor's
/// detection power.
pub struct Exids;

impl AdjudicationPolicy for Exids {
    fn name(&self) -> &'static str {
        "exids"
    }

    fn wants_recheck(&self) -> bool {
        true
    }

    fn decide(
        &self,
        record: &ReputationRecord,
        recheck: Option<&InsomniaVerdict>,
        thresholds: &AdjudicationThresholds,
        budget: &mut DetectionBudget,
        cost: f64,
    ) -> Result<Ruling, AdjudicationUnavailable> {
        adjudicate(record, recheck, thresholds, budget, cost)
    }

    fn validates_at_cc(&self) -> bool {
        true
    }
}

/// Degraded baseline: every first-layer flag is final.
pub struct SidsFinal;

impl AdjudicationPolicy for SidsFinal {
    fn name(&self) -> &'static str {
        "sids-final"
    }

    fn wants_recheck(&self) -> bool {
        false
    }

    fn decide(
        &self,
        _record: &ReputationRecord,
        _recheck: Option<&InsomniaVerdict>,
        _thresholds: &AdjudicationThresholds,
        _budget: &mut DetectionBudget,
        _cost: f64,
    ) -> Result<Ruling, AdjudicationUnavailable> {
        Ok(Ruling::Malicious)
    }

    fn validates_at_cc(&self) -> bool {
        false
    }
}

pub const POLICY_NAMES: [&str; 2] = ["exids", "sids-final"];

pub fn policy_by_name(name: &str) -> Result<Box<dyn AdjudicationPolicy>, ConfigError> {
    match name {
        "exids" => Ok(Box::new(Exids)),
        "sids-final" => Ok(Box::new(SidsFinal)),
        other => Err(ConfigError::UnknownName {
            kind: "adjudication policy",
            name: other.to_owned(),
            known: POLICY_NAMES.join(", "),
        }),
    }
}
