//! Scenario configuration: a TOML document with every section optional except
//! the seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adjudication::AdjudicationConfig;
use crate::attack::AttackerSpec;
use crate::detection::DetectionConfig;
use crate::energy::{DutyCycle, EnergyProfile};
use crate::error::{ConfigError, SimError};
use crate::hierarchy::Layout;
use crate::topology::{FieldConfig, NodeId, RadioModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    /// Seconds per slot.
    pub slot_duration: f64,
    /// Slots per frame; one frame per epoch.
    pub frame_length: u32,
    /// Nominal packets a slot carries; scales the Case 5 budget.
    pub slot_capacity: u32,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            slot_duration: 0.015,
            frame_length: 64,
            slot_capacity: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRate {
    pub node: NodeId,
    pub packets_per_epoch: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Sensed-data packets per leaf per epoch.
    pub packets_per_epoch: u32,
    /// Per-leaf overrides of `packets_per_epoch`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_node: Vec<NodeRate>,
    /// Bytes.
    pub data_size: u32,
    pub control_size: u32,
    /// Per-packet metadata kept when packets are fused into a bundle.
    pub header_size: u32,
    /// Bits per second.
    pub bitrate: f64,
    /// Transmit-time multiplier at full range: airtime scales with
    /// `1 + amp_gain * (d / comm_range)^signal_exponent`.
    pub amp_gain: f64,
    /// Seconds of sensing per generated packet.
    pub sensing_time: f64,
    /// Seconds of processing per packet handled.
    pub compute_time: f64,
    /// Chance per leaf and epoch of a benign event burst.
    pub burst_probability: f64,
    pub burst_packets: u32,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            packets_per_epoch: 4,
            per_node: Vec::new(),
            data_size: 36,
            control_size: 16,
            header_size: 2,
            bitrate: 19_200.0,
            amp_gain: 10.0,
            sensing_time: 0.05,
            compute_time: 0.01,
            burst_probability: 0.005,
            burst_packets: 8,
        }
    }
}

impl TrafficConfig {
    pub fn rate(&self, node: NodeId) -> u32 {
        self.per_node
            .iter()
            .find(|r| r.node == node)
            .map_or(self.packets_per_epoch, |r| r.packets_per_epoch)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.data_size == 0 || self.control_size == 0 {
            return Err(ConfigError::invalid(
                "traffic.data_size",
                "packet sizes must be > 0",
            ));
        }
        let pos = [("traffic.bitrate", self.bitrate)];
        for (field, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(field, "must be a finite value > 0"));
            }
        }
        let nonneg = [
            ("traffic.amp_gain", self.amp_gain),
            ("traffic.sensing_time", self.sensing_time),
            ("traffic.compute_time", self.compute_time),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(field, "must be a finite value >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.burst_probability) {
            return Err(ConfigError::invalid(
                "traffic.burst_probability",
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchyConfig {
    /// Coverage radius of a sector coordinator; half the radio range when
    /// absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector_radius: Option<f64>,
    /// Standard battery lifetime L, seconds. Recorded, not used by detection.
    pub standard_lifetime: f64,
    /// Authentic wake-up coin value. Recorded, not used by any procedure.
    pub awc: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            sector_radius: None,
            standard_lifetime: 86_400.0,
            awc: 1.0,
        }
    }
}

fn default_horizon() -> u64 {
    300
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Epochs to simulate.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub mode: Layout,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub radio: RadioModel,
    #[serde(default)]
    pub energy: EnergyProfile,
    #[serde(default)]
    pub duty: DutyCycle,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub hierarchy: HierarchyConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub adjudication: AdjudicationConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attackers: Vec<AttackerSpec>,
}

impl ScenarioConfig {
    /// Defaults everywhere, with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        toml::from_str(&format!("seed = {seed}")).expect("seed-only config parses")
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn sector_radius(&self) -> f64 {
        self.hierarchy
            .sector_radius
            .unwrap_or(self.radio.comm_range / 2.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seed > i64::MAX as u64 {
            return Err(ConfigError::invalid(
                "seed",
                "must fit in a signed 64-bit integer",
            ));
        }
        if self.horizon == 0 {
            return Err(ConfigError::invalid("horizon", "must be >= 1 epoch"));
        }
        self.field.validate()?;
        self.radio.validate()?;
        self.energy.validate()?;
        self.duty.validate()?;
        self.traffic.validate()?;
        self.detection.validate()?;
        self.adjudication.validate()?;
        if self.frame.slot_duration.is_nan()
            || self.frame.slot_duration <= 0.0
            || self.frame.frame_length == 0
            || self.frame.slot_capacity == 0
        {
            return Err(ConfigError::invalid(
                "frame",
                "slot_duration, frame_length and slot_capacity must be > 0",
            ));
        }
        if f64::from(self.frame.frame_length) * self.frame.slot_duration > self.duty.epoch_length {
            return Err(ConfigError::invalid(
                "frame.frame_length",
                "the slot frame must fit in one epoch",
            ));
        }
        if let Some(r) = self.hierarchy.sector_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(ConfigError::invalid(
                    "hierarchy.sector_radius",
                    "must be a finite value > 0",
                ));
            }
        }
        let node_count = self.field.node_count() as u32;
        for (i, a) in self.attackers.iter().enumerate() {
            a.validate(i)?;
            if let Some(n) = a.node {
                if n.0 == 0 || n.0 >= node_count {
                    return Err(ConfigError::invalid(
                        format!("attackers[{i}].node"),
                        "no such node",
                    ));
                }
                if n.0 <= self.field.leaders {
                    return Err(ConfigError::invalid(
                        format!("attackers[{i}].node"),
                        "attackers occupy follower nodes",
                    ));
                }
            }
        }
        let mut pinned: Vec<NodeId> = self.attackers.iter().filter_map(|a| a.node).collect();
        pinned.sort();
        if pinned.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invalid(
                "attackers",
                "two attackers share a node",
            ));
        }
        if self.attackers.len() > self.field.followers as usize {
            return Err(ConfigError::invalid(
                "attackers",
                "more attackers than follower nodes",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_only_file_gets_defaults() {
        let cfg = ScenarioConfig::from_toml("seed = 7").unwrap();
        assert_eq!(cfg.horizon, 300);
        assert_eq!(cfg.detection, DetectionConfig::default());
        assert_eq!(cfg.mode, Layout::Sectorized);
    }

    #[test]
    fn missing_seed_is_an_error() {
        assert!(matches!(
            ScenarioConfig::from_toml("horizon = 3"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err =
            ScenarioConfig::from_toml("seed = 1\n[detection]\ntolerence = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("tolerence"), "{err}");
    }

    #[test]
    fn negative_energy_names_the_field() {
        let err =
            ScenarioConfig::from_toml("seed = 1\n[field]\nfollower_energy = -1.0\n").unwrap_err();
        assert!(err.to_string().contains("field.follower_energy"), "{err}");
    }

    #[test]
    fn round_trip() {
        let mut cfg = ScenarioConfig::with_seed(11);
        cfg.attackers.push(AttackerSpec {
            node: Some(NodeId(40)),
            intensity: Some(3.5),
            ..AttackerSpec::new("flooder")
        });
        cfg.traffic.per_node.push(NodeRate {
            node: NodeId(12),
            packets_per_epoch: 2,
        });
        cfg.hierarchy.sector_radius = Some(12.5);
        let text = cfg.to_toml();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
    }
}
