//! Pure election functions.
//!
//! Every election ranks candidates by a lexicographic key and breaks exact
//! ties with [`tie_rank`], a seeded hash of `(seed, tag, scope, node)`. The
//! scope conventions used by the hierarchy builder are documented on each
//! function so that results can be reproduced from the public inputs alone.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::ElectionError;
use crate::topology::{signal_strength, NodeId, NodeKind, Position, RadioModel};

/// What the electorate knows about a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Position,
    /// Advertised residual energy. Nodes advertising zero are never elected.
    pub energy: f64,
    pub detection_power: f64,
    /// Alive and not quarantined.
    pub present: bool,
}

impl Candidate {
    pub fn electable(&self) -> bool {
        self.present && self.energy > 0.0 && self.kind != NodeKind::Sink
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ElectionInput<'a> {
    pub candidates: &'a BTreeMap<NodeId, Candidate>,
    pub radio: &'a RadioModel,
    /// Coverage radius of a sector coordinator.
    pub sector_radius: f64,
    /// Detection roles require `detection_power > dp_min`.
    pub dp_min: f64,
    pub seed: u64,
}

impl ElectionInput<'_> {
    pub fn candidate(&self, id: NodeId) -> Option<&Candidate> {
        self.candidates.get(&id)
    }

    fn position(&self, id: NodeId) -> Position {
        self.candidates[&id].position
    }

    fn within(&self, a: NodeId, b: NodeId, radius: f64) -> bool {
        self.position(a).distance(&self.position(b)) <= radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum ElectionTag {
    Cluster = 1,
    Join = 2,
    Sector = 3,
    SectorJoin = 4,
    Monitor = 5,
    Forwarder = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded tie-break rank; among exactly tied candidates the lowest rank wins.
pub fn tie_rank(seed: u64, tag: ElectionTag, scope: u64, node: NodeId) -> u64 {
    let a = splitmix64(seed ^ (tag as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    let b = splitmix64(a ^ scope);
    splitmix64(b ^ u64::from(node.0))
}

/// Energy descending, then hop count ascending, then tie rank ascending.
fn energy_hops_order(a: (f64, u32, u64), b: (f64, u32, u64)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDraft {
    pub coordinator: NodeId,
    /// Present nodes inside the coordinator's radio range, coordinator excluded.
    pub coverage: BTreeSet<NodeId>,
}

/// Greedy coverage election of cluster coordinators.
///
/// Round `r` (0-based) considers every electable leader reachable from the
/// sink that is not yet a coordinator and whose range covers at least one
/// still-uncovered node. The winner maximizes advertised energy, then
/// minimizes hop distance to the sink, then minimizes
/// `tie_rank(seed, Cluster, r, id)`. Rounds continue until every reachable
/// present node is covered or no leader can extend coverage.
pub fn select_cluster_coordinators(
    input: &ElectionInput,
    hops_to_sink: &BTreeMap<NodeId, u32>,
) -> Result<Vec<ClusterDraft>, ElectionError> {
    let targets: BTreeSet<NodeId> = input
        .candidates
        .values()
        .filter(|c| c.present && c.kind != NodeKind::Sink && hops_to_sink.contains_key(&c.id))
        .map(|c| c.id)
        .collect();
    let leaders: Vec<NodeId> = targets
        .iter()
        .copied()
        .filter(|id| {
            let c = &input.candidates[id];
            c.kind == NodeKind::Leader && c.electable()
        })
        .collect();
    if leaders.is_empty() {
        return Err(ElectionError::NoReachableLeader);
    }
    let coverage_of = |leader: NodeId| -> BTreeSet<NodeId> {
        targets
            .iter()
            .copied()
            .filter(|&t| input.within(leader, t, input.radio.comm_range))
            .collect()
    };

    let mut uncovered = targets.clone();
    let mut chosen: BTreeSet<NodeId> = BTreeSet::new();
    let mut drafts = Vec::new();
    for round in 0u64.. {
        if uncovered.is_empty() {
            break;
        }
        let best = leaders
            .iter()
            .copied()
            .filter(|l| !chosen.contains(l))
            .filter(|&l| coverage_of(l).iter().any(|t| uncovered.contains(t)))
            .min_by(|&a, &b| {
                let key = |id: NodeId| {
                    (
                        input.candidates[&id].energy,
                        hops_to_sink[&id],
                        tie_rank(input.seed, ElectionTag::Cluster, round, id),
                    )
                };
                energy_hops_order(key(a), key(b))
            });
        let Some(coordinator) = best else { break };
        let mut coverage = coverage_of(coordinator);
        for t in &coverage {
            uncovered.remove(t);
        }
        coverage.remove(&coordinator);
        chosen.insert(coordinator);
        drafts.push(ClusterDraft {
            coordinator,
            coverage,
        });
    }
    Ok(drafts)
}

/// Picks the coordinator whose signal at `node` is strongest.
///
/// `options` pairs an opaque group key with that group's coordinator. Exact
/// ties go to the lowest `tie_rank(seed, tag, node, coordinator)`.
pub fn strongest_signal<K: Copy>(
    node: NodeId,
    options: &[(K, NodeId)],
    tag: ElectionTag,
    input: &ElectionInput,
) -> Option<K> {
    let here = input.position(node);
    options
        .iter()
        .map(|&(key, coord)| {
            let s = signal_strength(&here, &input.position(coord), input.radio);
            (key, coord, s)
        })
        .min_by(|a, b| {
            b.2.total_cmp(&a.2).then_with(|| {
                let ra = tie_rank(input.seed, tag, u64::from(node.0), a.1);
                let rb = tie_rank(input.seed, tag, u64::from(node.0), b.1);
                ra.cmp(&rb)
            })
        })
        .map(|(key, _, _)| key)
}

/// Cluster membership by strongest coordinator signal. `None` means the node
/// is outside every cluster (unassigned).
pub fn assign_membership(
    node: NodeId,
    candidate_clusters: &[(u32, NodeId)],
    input: &ElectionInput,
) -> Option<u32> {
    strongest_signal(node, candidate_clusters, ElectionTag::Join, input)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorDraft {
    pub coordinator: NodeId,
    /// Resolved members, coordinator included.
    pub members: BTreeSet<NodeId>,
}

fn detection_capable(c: &Candidate, dp_min: f64) -> bool {
    c.electable() && c.detection_power > dp_min
}

/// Greedy coverage election of sector coordinators inside one cluster,
/// followed by disjoint membership resolution.
///
/// `members` excludes the cluster coordinator. Round `r` considers
/// detection-capable electable followers whose `sector_radius` disc covers an
/// uncovered member; the winner maximizes energy, then minimizes hops to the
/// coordinator (`u32::MAX` if unreachable), then minimizes
/// `tie_rank(seed, Sector, (cc << 32) | r, id)`. Each non-coordinator member
/// then joins the strongest-signal coordinator among those covering it, or
/// among all of them when none does (tag `SectorJoin`).
pub fn select_sector_coordinators(
    members: &BTreeSet<NodeId>,
    cluster_coordinator: NodeId,
    hops_from_cc: &BTreeMap<NodeId, u32>,
    input: &ElectionInput,
) -> Vec<SectorDraft> {
    let present: BTreeSet<NodeId> = members
        .iter()
        .copied()
        .filter(|id| input.candidates.get(id).is_some_and(|c| c.present))
        .collect();
    let followers: Vec<NodeId> = present
        .iter()
        .copied()
        .filter(|id| {
            let c = &input.candidates[id];
            c.kind == NodeKind::Follower && detection_capable(c, input.dp_min)
        })
        .collect();
    let radius = input.sector_radius;
    let hops = |id: NodeId| hops_from_cc.get(&id).copied().unwrap_or(u32::MAX);

    let mut uncovered = present.clone();
    let mut coordinators: Vec<NodeId> = Vec::new();
    for round in 0u64.. {
        if uncovered.is_empty() {
            break;
        }
        let scope = (u64::from(cluster_coordinator.0) << 32) | round;
        let best = followers
            .iter()
            .copied()
            .filter(|f| !coordinators.contains(f))
            .filter(|&f| uncovered.iter().any(|&t| input.within(f, t, radius)))
            .min_by(|&a, &b| {
                let key = |id: NodeId| {
                    (
                        input.candidates[&id].energy,
                        hops(id),
                        tie_rank(input.seed, ElectionTag::Sector, scope, id),
                    )
                };
                energy_hops_order(key(a), key(b))
            });
        let Some(sc) = best else { break };
        uncovered.retain(|&t| !input.within(sc, t, radius));
        coordinators.push(sc);
    }
    if coordinators.is_empty() {
        return Vec::new();
    }

    let mut drafts: Vec<SectorDraft> = coordinators
        .iter()
        .map(|&sc| SectorDraft {
            coordinator: sc,
            members: BTreeSet::from([sc]),
        })
        .collect();
    let all: Vec<(usize, NodeId)> = coordinators.iter().copied().enumerate().collect();
    for &node in &present {
        if coordinators.contains(&node) {
            continue;
        }
        let covering: Vec<(usize, NodeId)> = all
            .iter()
            .copied()
            .filter(|&(_, sc)| input.within(sc, node, radius))
            .collect();
        let pool = if covering.is_empty() { &all } else { &covering };
        if let Some(idx) = strongest_signal(node, pool, ElectionTag::SectorJoin, input) {
            drafts[idx].members.insert(node);
        }
    }
    drafts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorChoice {
    Leader(NodeId),
    /// No eligible leader in the sector; the cluster coordinator monitors.
    Fallback(NodeId),
}

impl MonitorChoice {
    pub fn node(self) -> NodeId {
        match self {
            MonitorChoice::Leader(n) | MonitorChoice::Fallback(n) => n,
        }
    }
}

/// Leader in the sector (never the cluster coordinator or the sink) with the
/// most energy, then the most detection power, then the lowest
/// `tie_rank(seed, Monitor, sector_coordinator, id)`.
pub fn select_sector_monitor(
    members: &BTreeSet<NodeId>,
    sector_coordinator: NodeId,
    cluster_coordinator: NodeId,
    input: &ElectionInput,
) -> MonitorChoice {
    let scope = u64::from(sector_coordinator.0);
    members
        .iter()
        .copied()
        .filter(|&id| id != cluster_coordinator)
        .filter(|id| {
            let c = &input.candidates[id];
            c.kind == NodeKind::Leader && detection_capable(c, input.dp_min)
        })
        .min_by(|&a, &b| {
            let ca = &input.candidates[&a];
            let cb = &input.candidates[&b];
            cb.energy
                .total_cmp(&ca.energy)
                .then(cb.detection_power.total_cmp(&ca.detection_power))
                .then_with(|| {
                    tie_rank(input.seed, ElectionTag::Monitor, scope, a).cmp(&tie_rank(
                        input.seed,
                        ElectionTag::Monitor,
                        scope,
                        b,
                    ))
                })
        })
        .map(MonitorChoice::Leader)
        .unwrap_or(MonitorChoice::Fallback(cluster_coordinator))
}

/// Sector member closest (in hops) to the cluster coordinator, excluding the
/// coordinators and the monitor; ties by `tie_rank(seed, Forwarder,
/// sector_coordinator, id)`. Falls back to the sector coordinator itself when
/// nobody else is available.
pub fn select_forwarding_sector_head(
    members: &BTreeSet<NodeId>,
    sector_coordinator: NodeId,
    monitor: Option<NodeId>,
    cluster_coordinator: NodeId,
    hops_from_cc: &BTreeMap<NodeId, u32>,
    input: &ElectionInput,
) -> NodeId {
    let scope = u64::from(sector_coordinator.0);
    members
        .iter()
        .copied()
        .filter(|&id| id != cluster_coordinator && id != sector_coordinator && Some(id) != monitor)
        .filter(|id| input.candidates[id].electable())
        .min_by_key(|&id| {
            (
                hops_from_cc.get(&id).copied().unwrap_or(u32::MAX),
                tie_rank(input.seed, ElectionTag::Forwarder, scope, id),
            )
        })
        .unwrap_or(sector_coordinator)
}
