use crate::error::ConfigError;
use crate::sim::SlotSchedule;

use super::{AcquisitionVector, DetectionThresholds, Evidence, LedgerView};

pub struct CaseInput<'a> {
    pub av: &'a AcquisitionVector,
    pub view: &'a LedgerView,
    pub schedule: &'a SlotSchedule,
    pub thresholds: &'a DetectionThresholds,
}

/// One insomnia symptom check. Returns evidence when the flag is raised.
pub trait InsomniaCase: Send + Sync {
    fn name(&self) -> &'static str;
    /// Case number, 1–5.
    fn number(&self) -> u8;
    fn check(&self, input: &CaseInput) -> Option<Evidence>;
}

/// Consumption above TNEC, or a remaining lifetime below ThL.
pub struct EnergyRate;

impl InsomniaCase for EnergyRate {
    fn name(&self) -> &'static str {
        "energy-rate"
    }

    fn number(&self) -> u8 {
        1
    }

    fn check(&self, i: &CaseInput) -> Option<Evidence> {
        let th = i.thresholds;
        if i.view.consumed > th.tnec {
            Some(Evidence {
                observed: i.view.consumed,
                threshold: th.tnec,
            })
        } else if i.view.remaining_lifetime < th.th_lifetime {
            Some(Evidence {
                observed: i.view.remaining_lifetime,
                threshold: th.th_lifetime,
            })
        } else {
            None
        }
    }
}

/// Awake too long while sleeping too little, or not sleeping at all.
pub struct DutyCycleDeviation;

impl InsomniaCase for DutyCycleDeviation {
    fn name(&self) -> &'static str {
        "duty-cycle"
    }

    fn number(&self) -> u8 {
        2
    }

    fn check(&self, i: &CaseInput) -> Option<Evidence> {
        let (wake, sleep) = (i.av.observed_wake, i.av.observed_sleep);
        let th = i.thresholds;
        if (wake > th.th_wake && sleep < th.th_sleep) || sleep == 0.0 {
            Some(Evidence {
                observed: wake,
                threshold: th.th_wake,
            })
        } else {
            None
        }
    }
}

/// Packets sent in slots the leaf does not own.
pub struct SlotMismatch;

impl InsomniaCase for SlotMismatch {
    fn name(&self) -> &'static str {
        "slot-mismatch"
    }

    fn number(&self) -> u8 {
        3
    }

    fn check(&self, i: &CaseInput) -> Option<Evidence> {
        let foreign =
            i.av.packets
                .iter()
                .filter(|p| !i.schedule.owns(i.av.leaf, p.slot))
                .count();
        (foreign > 0).then_some(Evidence {
            observed: foreign as f64,
            threshold: 0.0,
        })
    }
}

/// Reported residual energy far from the last recorded value.
pub struct EnergyJump;

impl InsomniaCase for EnergyJump {
    fn name(&self) -> &'static str {
        "energy-jump"
    }

    fn number(&self) -> u8 {
        4
    }

    fn check(&self, i: &CaseInput) -> Option<Evidence> {
        let lre = i.view.last_recorded;
        let jump = (lre - i.av.reported_residual).abs();
        let limit = i.thresholds.energy_jump_delta * lre.max(f64::EPSILON);
        (jump > limit).then_some(Evidence {
            observed: jump,
            threshold: limit,
        })
    }
}

/// Packets received as a percentage of the leaf's slot budget.
pub struct BufferOverflow;

impl InsomniaCase for BufferOverflow {
    fn name(&self) -> &'static str {
        "buffer-overflow"
    }

    fn number(&self) -> u8 {
        5
    }

    fn check(&self, i: &CaseInput) -> Option<Evidence> {
        let total = i.av.packets.len() as f64;
        if total == 0.0 {
            return None;
        }
        let budget = f64::from(i.schedule.budget(i.av.leaf));
        let percent = if budget > 0.0 {
            100.0 * total / budget
        } else {
            f64::INFINITY
        };
        (percent > i.thresholds.th_buffer).then_some(Evidence {
            observed: percent,
            threshold: i.thresholds.th_buffer,
        })
    }
}

/// Named set of active cases, evaluated in case-number order.
pub struct CaseRegistry {
    cases: Vec<Box<dyn InsomniaCase>>,
}

impl CaseRegistry {
    pub fn standard() -> Self {
        CaseRegistry {
            cases: vec![
                Box::new(EnergyRate),
                Box::new(DutyCycleDeviation),
                Box::new(SlotMismatch),
                Box::new(EnergyJump),
                Box::new(BufferOverflow),
            ],
        }
    }

    /// Keeps only the named cases.
    pub fn select<S: AsRef<str>>(names: &[S]) -> Result<Self, ConfigError> {
        let mut all = CaseRegistry::standard().cases;
        let known = all.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ");
        for n in names {
            if !all.iter().any(|c| c.name() == n.as_ref()) {
                return Err(ConfigError::UnknownName {
                    kind: "insomnia case",
                    name: n.as_ref().to_owned(),
                    known,
                });
            }
        }
        all.retain(|c| names.iter().any(|n| n.as_ref() == c.name()));
        Ok(CaseRegistry { cases: all })
    }

    pub fn cases(&self) -> impl Iterator<Item = &dyn InsomniaCase> {
        self.cases.iter().map(|c| c.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.cases.iter().map(|c| c.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::evaluate_insomnia;
    use crate::sim::{Packet, PacketKind};
    use crate::topology::NodeId;

    fn packet(slot: u32) -> Packet {
        Packet {
            id: 0,
            origin: NodeId(1),
            kind: PacketKind::Data,
            payload_size: 36,
            created_at: 0.0,
            slot,
            hops: vec![NodeId(1)],
        }
    }

    #[test]
    fn flooding_ten_unit_window() {
        let schedule = SlotSchedule::round_robin(0, [NodeId(1)], 10, 1).unwrap();
        let av = AcquisitionVector {
            leaf: NodeId(1),
            packets: (0..100).map(|i| packet(i % 10)).collect(),
            observed_wake: 1.0,
            observed_sleep: 9.0,
            reported_residual: 10.0,
        };
        let th = DetectionThresholds {
            tnec: 1.0,
            th_lifetime: 1.0,
            th_wake: 2.0,
            th_sleep: 8.0,
            th_buffer: 50.0,
            energy_jump_delta: 0.5,
        };
        let view = LedgerView {
            consumed: 0.5,
            last_recorded: 10.0,
            remaining_lifetime: 20.0,
        };
        let v = evaluate_insomnia(
            &CaseRegistry::standard(),
            &av,
            Some(&view),
            &schedule,
            &th,
            0,
        )
        .unwrap();
        assert_eq!(v.flags, [false, false, false, false, true]);
        assert_eq!(v.evidence[&5].observed, 1000.0);
    }

    #[test]
    fn unknown_case_name_is_rejected() {
        assert!(CaseRegistry::select(&["energy-rate", "nope"]).is_err());
        let r = CaseRegistry::select(&["slot-mismatch"]).unwrap();
        assert_eq!(r.names().collect::<Vec<_>>(), ["slot-mismatch"]);
    }
}
