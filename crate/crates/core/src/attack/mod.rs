//! Ground-truth attacker programs. Each archetype is a strategy registered by
//! name and looked up from the scenario's attacker list.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::sim::PacketKind;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerSpec {
    /// Registered archetype name.
    pub archetype: String,
    /// Follower node to compromise; picked from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    /// Packets per slot, seconds of forced wake, or a residual-energy
    /// multiplier depending on the archetype. Defaults per archetype.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    #[serde(default)]
    pub start_epoch: u64,
    /// Exclusive; runs to the horizon when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_epoch: Option<u64>,
    /// Explicit victims for wake injection.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<NodeId>,
}

impl AttackerSpec {
    pub fn new(archetype: &str) -> Self {
        AttackerSpec {
            archetype: archetype.to_owned(),
            node: None,
            intensity: None,
            start_epoch: 0,
            end_epoch: None,
            targets: Vec::new(),
        }
    }

    pub fn validate(&self, index: usize) -> Result<(), ConfigError> {
        let behavior = behavior_by_name(&self.archetype)?;
        let field = |f: &str| format!("attackers[{index}].{f}");
        if let Some(i) = self.intensity {
            if !(i > 0.0 && i.is_finite()) {
                return Err(ConfigError::invalid(
                    field("intensity"),
                    "must be a finite value > 0",
                ));
            }
            if behavior.name() == "flooder" && i < 1.0 {
                return Err(ConfigError::invalid(
                    field("intensity"),
                    "a flooder must send at least one packet per owned slot",
                ));
            }
        }
        if let Some(end) = self.end_epoch {
            if end <= self.start_epoch {
                return Err(ConfigError::invalid(
                    field("end_epoch"),
                    "must be greater than start_epoch",
                ));
            }
        }
        Ok(())
    }

    pub fn active(&self, epoch: u64) -> bool {
        epoch >= self.start_epoch && self.end_epoch.is_none_or(|e| epoch < e)
    }
}

/// A victim reachable by the attacker, with the slots it owns.
#[derive(Debug, Clone, PartialEq)]
pub struct Victim {
    pub node: NodeId,
    pub slots: Vec<u32>,
}

pub struct AttackContext<'a> {
    pub node: NodeId,
    pub epoch: u64,
    pub intensity: f64,
    pub own_slots: &'a [u32],
    pub frame_length: u32,
    pub victims: &'a [Victim],
    /// Battery capacity of the compromised node.
    pub initial_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub slot: u32,
    pub kind: PacketKind,
    /// Receiver woken by this emission, if any.
    pub target: Option<NodeId>,
}

/// Everything an attacker does in one epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttackPlan {
    pub emissions: Vec<Emission>,
    /// Skip the node's ordinary sensed-data traffic.
    pub replaces_normal_traffic: bool,
    /// Seconds each victim is kept awake.
    pub forced_wake: Vec<(NodeId, f64)>,
    /// Extra seconds the attacker itself stays awake.
    pub self_awake: f64,
    /// Residual energy claimed instead of the true one.
    pub reported_residual: Option<f64>,
}

pub trait AttackBehavior: Send + Sync {
    fn name(&self) -> &'static str;
    fn default_intensity(&self) -> f64;
    fn act(&self, ctx: &AttackContext) -> AttackPlan;
}

/// Sends `intensity` packets in every slot it owns.
pub struct Flooder;

impl AttackBehavior for Flooder {
    fn name(&self) -> &'static str {
        "flooder"
    }

    fn default_intensity(&self) -> f64 {
        10.0
    }

    fn act(&self, ctx: &AttackContext) -> AttackPlan {
        let per_slot = ctx.intensity.round().max(1.0) as usize;
        let emissions = ctx
            .own_slots
            .iter()
            .flat_map(|&slot| {
                std::iter::repeat_n(
                    Emission {
                        slot,
                        kind: PacketKind::Data,
                        target: None,
                    },
                    per_slot,
                )
            })
            .collect();
        AttackPlan {
            emissions,
            replaces_normal_traffic: true,
            ..AttackPlan::default()
        }
    }
}

/// Keeps its normal traffic and adds `intensity` packets in slots owned by
/// others.
pub struct UnslottedSender;

impl AttackBehavior for UnslottedSender {
    fn name(&self) -> &'static str {
        "unslotted-sender"
    }

    fn default_intensity(&self) -> f64 {
        4.0
    }

    fn act(&self, ctx: &AttackContext) -> AttackPlan {
        let foreign: Vec<u32> = (0..ctx.frame_length)
            .filter(|s| !ctx.own_slots.contains(s))
            .collect();
        let count = ctx.intensity.round().max(1.0) as usize;
        let emissions = if foreign.is_empty() {
            Vec::new()
        } else {
            let offset = ctx.epoch as usize;
            (0..count)
                .map(|i| Emission {
                    slot: foreign[(offset + i) % foreign.len()],
                    kind: PacketKind::Data,
                    target: None,
                })
                .collect()
        };
        AttackPlan {
            emissions,
            ..AttackPlan::default()
        }
    }
}

/// Wakes every victim for `intensity` seconds with one frame per second,
/// each frame stamped with a slot the victim owns.
pub struct WakeInjector;

impl AttackBehavior for WakeInjector {
    fn name(&self) -> &'static str {
        "wake-injector"
    }

    fn default_intensity(&self) -> f64 {
        9.0
    }

    fn act(&self, ctx: &AttackContext) -> AttackPlan {
        let frames = ctx.intensity.ceil().max(1.0) as usize;
        let mut plan = AttackPlan {
            self_awake: ctx.intensity,
            ..AttackPlan::default()
        };
        for v in ctx.victims {
            let Some(&slot) = v.slots.first() else {
                continue;
            };
            plan.forced_wake.push((v.node, ctx.intensity));
            plan.emissions.extend(std::iter::repeat_n(
                Emission {
                    slot,
                    kind: PacketKind::WakeFrame,
                    target: Some(v.node),
                },
                frames,
            ));
        }
        plan
    }
}

/// Reports `intensity × capacity` as its residual energy.
pub struct EnergySpoofer;

impl AttackBehavior for EnergySpoofer {
    fn name(&self) -> &'static str {
        "energy-spoofer"
    }

    fn default_intensity(&self) -> f64 {
        2.0
    }

    fn act(&self, ctx: &AttackContext) -> AttackPlan {
        AttackPlan {
            reported_residual: Some(ctx.intensity * ctx.initial_energy),
            ..AttackPlan::default()
        }
    }
}

pub const ARCHETYPE_NAMES: [&str; 4] = [
    "flooder",
    "unslotted-sender",
    "wake-injector",
    "energy-spoofer",
];

pub fn behavior_by_name(name: &str) -> Result<Box<dyn AttackBehavior>, ConfigError> {
    match name {
        "flooder" => Ok(Box::new(Flooder)),
        "unslotted-sender" => Ok(Box::new(UnslottedSender)),
        "wake-injector" => Ok(Box::new(WakeInjector)),
        "energy-spoofer" => Ok(Box::new(EnergySpoofer)),
        other => Err(ConfigError::UnknownName {
            kind: "attack archetype",
            name: other.to_owned(),
            known: ARCHETYPE_NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(slots: &'a [u32], victims: &'a [Victim], intensity: f64) -> AttackContext<'a> {
        AttackContext {
            node: NodeId(3),
            epoch: 2,
            intensity,
            own_slots: slots,
            frame_length: 8,
            victims,
            initial_energy: 20.0,
        }
    }

    #[test]
    fn flooder_fills_own_slots() {
        let plan = Flooder.act(&ctx(&[1, 5], &[], 10.0));
        assert_eq!(plan.emissions.len(), 20);
        assert!(plan.emissions.iter().all(|e| e.slot == 1 || e.slot == 5));
        assert!(plan.replaces_normal_traffic);
    }

    #[test]
    fn unslotted_sender_avoids_own_slots() {
        let plan = UnslottedSender.act(&ctx(&[1, 5], &[], 3.0));
        assert_eq!(plan.emissions.len(), 3);
        assert!(plan.emissions.iter().all(|e| e.slot != 1 && e.slot != 5));
    }

    #[test]
    fn injector_wakes_each_victim() {
        let victims = [
            Victim {
                node: NodeId(4),
                slots: vec![2, 6],
            },
            Victim {
                node: NodeId(5),
                slots: vec![3],
            },
        ];
        let plan = WakeInjector.act(&ctx(&[1], &victims, 9.0));
        assert_eq!(plan.forced_wake, vec![(NodeId(4), 9.0), (NodeId(5), 9.0)]);
        assert_eq!(plan.emissions.len(), 18);
        assert_eq!(plan.self_awake, 9.0);
    }

    #[test]
    fn spoofer_claims_scaled_capacity() {
        let plan = EnergySpoofer.act(&ctx(&[1], &[], 1.0));
        assert_eq!(plan.reported_residual, Some(20.0));
    }

    #[test]
    fn spec_validation() {
        let mut s = AttackerSpec::new("flooder");
        s.validate(0).unwrap();
        s.intensity = Some(0.5);
        assert!(s.validate(0).is_err());
        s.intensity = None;
        s.start_epoch = 5;
        s.end_epoch = Some(5);
        assert!(s.validate(0).is_err());
        assert!(AttackerSpec::new("gremlin").validate(0).is_err());
        let window = AttackerSpec {
            start_epoch: 2,
            end_epoch: Some(4),
            ..AttackerSpec::new("flooder")
        };
        assert!(!window.active(1) && window.active(2) && window.active(3) && !window.active(4));
    }
}
