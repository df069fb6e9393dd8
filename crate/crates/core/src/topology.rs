//! Sensor field generation, neighborhoods and the distance-based signal model.
//!
//! Deployment is a pure function of `(FieldConfig, seed)`. Node ids are dense:
//! the sink is always `NodeId(0)`, leaders follow, then followers.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Identity as handed out at deployment: the numeric id plus the position it
/// was minted from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTag {
    pub id: NodeId,
    pub position: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Leader,
    Follower,
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Position,
    pub initial_energy: f64,
    pub detection_power: f64,
}

impl Node {
    pub fn tag(&self) -> NodeTag {
        NodeTag {
            id: self.id,
            position: self.position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub width: f64,
    pub height: f64,
    pub leaders: u32,
    pub followers: u32,
    /// `[x, y]` of the single sink.
    pub sink: [f64; 2],
    /// Initial battery of a leader, joules.
    pub leader_energy: f64,
    /// Initial battery of a follower, joules.
    pub follower_energy: f64,
    pub sink_energy: f64,
    pub leader_detection_power: f64,
    pub follower_detection_power: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            width: 100.0,
            height: 100.0,
            leaders: 10,
            followers: 90,
            sink: [50.0, 50.0],
            leader_energy: 60.0,
            follower_energy: 20.0,
            sink_energy: 1.0e6,
            leader_detection_power: 100.0,
            follower_detection_power: 20.0,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width.is_nan() || self.width <= 0.0 {
            return Err(ConfigError::invalid("field.width", "must be > 0"));
        }
        if self.height.is_nan() || self.height <= 0.0 {
            return Err(ConfigError::invalid("field.height", "must be > 0"));
        }
        if self.followers == 0 {
            return Err(ConfigError::invalid(
                "field.followers",
                "must be at least 1",
            ));
        }
        let [sx, sy] = self.sink;
        if !(0.0..=self.width).contains(&sx) || !(0.0..=self.height).contains(&sy) {
            return Err(ConfigError::invalid(
                "field.sink",
                "must lie inside the field",
            ));
        }
        for (field, v) in [
            ("field.leader_energy", self.leader_energy),
            ("field.follower_energy", self.follower_energy),
            ("field.sink_energy", self.sink_energy),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(ConfigError::invalid(field, "must be > 0"));
            }
        }
        if self.leader_energy <= self.follower_energy {
            return Err(ConfigError::invalid(
                "field.leader_energy",
                "leaders must start with strictly more energy than followers",
            ));
        }
        for (field, v) in [
            ("field.leader_detection_power", self.leader_detection_power),
            (
                "field.follower_detection_power",
                self.follower_detection_power,
            ),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(ConfigError::invalid(field, "must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        1 + self.leaders as usize + self.followers as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioModel {
    /// Meters.
    pub comm_range: f64,
    pub signal_exponent: f64,
    pub reference_strength: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            comm_range: 30.0,
            signal_exponent: 2.0,
            reference_strength: 1.0,
        }
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.comm_range.is_nan() || self.comm_range <= 0.0 {
            return Err(ConfigError::invalid("radio.comm_range", "must be > 0"));
        }
        if self.signal_exponent.is_nan() || self.signal_exponent < 1.0 {
            return Err(ConfigError::invalid(
                "radio.signal_exponent",
                "must be >= 1",
            ));
        }
        if self.reference_strength.is_nan() || self.reference_strength <= 0.0 {
            return Err(ConfigError::invalid(
                "radio.reference_strength",
                "must be > 0",
            ));
        }
        Ok(())
    }

    pub fn in_range(&self, a: &Position, b: &Position) -> bool {
        a.distance(b) <= self.comm_range
    }
}

/// `reference_strength / d^exponent`. Distances at or below 1 m saturate at
/// `reference_strength`, so co-located nodes do not produce infinities.
pub fn signal_strength(a: &Position, b: &Position, radio: &RadioModel) -> f64 {
    let d = a.distance(b);
    if d <= 1.0 {
        return radio.reference_strength;
    }
    radio.reference_strength / d.powf(radio.signal_exponent)
}

pub fn deploy_nodes(config: &FieldConfig, rng_seed: u64) -> Result<Vec<Node>, ConfigError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut nodes = Vec::with_capacity(config.node_count());
    nodes.push(Node {
        id: NodeId(0),
        kind: NodeKind::Sink,
        position: Position::new(config.sink[0], config.sink[1]),
        initial_energy: config.sink_energy,
        detection_power: config.leader_detection_power,
    });
    let kinds = std::iter::repeat_n(NodeKind::Leader, config.leaders as usize).chain(
        std::iter::repeat_n(NodeKind::Follower, config.followers as usize),
    );
    for (i, kind) in kinds.enumerate() {
        let position = Position::new(
            rng.random_range(0.0..=config.width),
            rng.random_range(0.0..=config.height),
        );
        let (initial_energy, detection_power) = match kind {
            NodeKind::Leader => (config.leader_energy, config.leader_detection_power),
            _ => (config.follower_energy, config.follower_detection_power),
        };
        nodes.push(Node {
            id: NodeId(i as u32 + 1),
            kind,
            position,
            initial_energy,
            detection_power,
        });
    }
    Ok(nodes)
}

/// Symmetric one-hop adjacency under a [`RadioModel`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborMap {
    adjacency: BTreeMap<NodeId, Vec<NodeId>>,
}

impl NeighborMap {
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn are_neighbors(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.keys().copied()
    }

    /// Breadth-first hop counts from `source`. Nodes absent from the result
    /// are unreachable.
    pub fn hop_distances(&self, source: NodeId) -> BTreeMap<NodeId, u32> {
        self.hop_distances_within(source, |_| true)
    }

    /// Like [`hop_distances`](Self::hop_distances) but only expands through
    /// nodes accepted by `allow` (the source is always expanded).
    pub fn hop_distances_within(
        &self,
        source: NodeId,
        allow: impl Fn(NodeId) -> bool,
    ) -> BTreeMap<NodeId, u32> {
        let mut hops = BTreeMap::new();
        if !self.adjacency.contains_key(&source) {
            return hops;
        }
        hops.insert(source, 0);
        let mut queue = VecDeque::from([source]);
        while let Some(cur) = queue.pop_front() {
            let next = hops[&cur] + 1;
            for &n in self.neighbors(cur) {
                if !hops.contains_key(&n) && allow(n) {
                    hops.insert(n, next);
                    queue.push_back(n);
                }
            }
        }
        hops
    }
}

pub fn neighbor_discovery(nodes: &[Node], radio: &RadioModel) -> NeighborMap {
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> =
        nodes.iter().map(|n| (n.id, Vec::new())).collect();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if radio.in_range(&a.position, &b.position) {
                adjacency.get_mut(&a.id).unwrap().push(b.id);
                adjacency.get_mut(&b.id).unwrap().push(a.id);
            }
        }
    }
    for list in adjacency.values_mut() {
        list.sort_unstable();
    }
    NeighborMap { adjacency }
}
