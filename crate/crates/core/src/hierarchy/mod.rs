//! Role classification, cluster and sector structure, and reconfiguration.

mod election;

pub use election::{
    assign_membership, select_cluster_coordinators, select_forwarding_sector_head,
    select_sector_coordinators, select_sector_monitor, strongest_signal, tie_rank, Candidate,
    ClusterDraft, ElectionInput, ElectionTag, MonitorChoice, SectorDraft,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ElectionError;
use crate::topology::{NeighborMap, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleKind {
    LeafNode,
    SectorCoordinator,
    SectorMonitor,
    ForwardingSectorHead,
    ClusterCoordinator,
    SinkNode,
}

impl RoleKind {
    pub fn priority(self) -> u8 {
        match self {
            RoleKind::LeafNode => 5,
            RoleKind::SectorCoordinator => 4,
            RoleKind::SectorMonitor | RoleKind::ForwardingSectorHead => 3,
            RoleKind::ClusterCoordinator => 2,
            RoleKind::SinkNode => 1,
        }
    }

    /// Roles that keep a detection-power budget.
    pub fn holds_detection_power(self) -> bool {
        !matches!(self, RoleKind::LeafNode | RoleKind::ForwardingSectorHead)
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RoleKind::LeafNode => "leaf",
            RoleKind::SectorCoordinator => "sector-coordinator",
            RoleKind::SectorMonitor => "sector-monitor",
            RoleKind::ForwardingSectorHead => "forwarding-sector-head",
            RoleKind::ClusterCoordinator => "cluster-coordinator",
            RoleKind::SinkNode => "sink",
        };
        f.write_str(s)
    }
}

/// A role as held by a node: its kind, priority, and the detection power it
/// carries (zero for roles without monitoring duty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Role {
    pub kind: RoleKind,
    pub priority: u8,
    pub detection_power: f64,
}

impl Role {
    pub fn new(kind: RoleKind, detection_power: f64) -> Self {
        Role {
            kind,
            priority: kind.priority(),
            detection_power: if kind.holds_detection_power() {
                detection_power
            } else {
                0.0
            },
        }
    }
}

/// Whether clusters are partitioned into sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    #[default]
    Sectorized,
    /// Leaves report straight to their cluster coordinator, which also runs
    /// the first-layer detector.
    NonSectorized,
}

pub type ClusterId = u32;
pub type SectorId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub id: SectorId,
    pub cluster: ClusterId,
    pub coordinator: NodeId,
    pub monitor: NodeId,
    /// The monitor duty sits with the cluster coordinator.
    pub monitor_fallback: bool,
    pub forwarding_head: NodeId,
    /// Every node of the sector, coordinators included.
    pub members: BTreeSet<NodeId>,
}

impl Sector {
    /// Nodes that generate sensed data in this sector.
    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members
            .iter()
            .copied()
            .filter(move |&n| n != self.coordinator && (self.monitor_fallback || n != self.monitor))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterBackup {
    pub epoch: u64,
    pub members: BTreeSet<NodeId>,
    pub sectors: Vec<Sector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: ClusterId,
    pub coordinator: NodeId,
    /// Resolved members, coordinator excluded.
    pub members: BTreeSet<NodeId>,
    pub sectors: Vec<SectorId>,
    pub backup: Option<ClusterBackup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Cluster(ClusterId),
    Sector(SectorId),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Cluster(c) => write!(f, "cluster-{c}"),
            Scope::Sector(s) => write!(f, "sector-{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReconfigTrigger {
    CoordinatorDeviates,
    NodeSuspectedHighConsumption,
    DetectionPowerExhausted,
    CoordinatorDead,
}

impl fmt::Display for ReconfigTrigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReconfigTrigger::CoordinatorDeviates => "coordinator-deviates",
            ReconfigTrigger::NodeSuspectedHighConsumption => "node-suspected-high-consumption",
            ReconfigTrigger::DetectionPowerExhausted => "detection-power-exhausted",
            ReconfigTrigger::CoordinatorDead => "coordinator-dead",
        };
        f.write_str(s)
    }
}

/// Noteworthy outcomes of an election pass, for the event log.
#[derive(Debug, Clone, PartialEq)]
pub enum HierarchyNote {
    ClusterFormed {
        cluster: ClusterId,
        coordinator: NodeId,
        members: usize,
    },
    SectorFormed {
        sector: SectorId,
        coordinator: NodeId,
        monitor: NodeId,
        forwarder: NodeId,
    },
    MonitorFallback {
        sector: SectorId,
        coordinator: NodeId,
    },
    ZeroSectors {
        cluster: ClusterId,
    },
    Unassigned {
        node: NodeId,
    },
    Degraded {
        scope: Scope,
    },
}

/// Clusters, sectors and the role each node currently holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    layout: Layout,
    sink: NodeId,
    clusters: BTreeMap<ClusterId, Cluster>,
    sectors: BTreeMap<SectorId, Sector>,
    unassigned: BTreeSet<NodeId>,
    isolated: BTreeSet<NodeId>,
    degraded: BTreeSet<Scope>,
    node_cluster: BTreeMap<NodeId, ClusterId>,
    node_sector: BTreeMap<NodeId, SectorId>,
    roles: BTreeMap<NodeId, RoleKind>,
    next_sector: SectorId,
    generation: u64,
}

fn present_hops(
    neighbors: &NeighborMap,
    input: &ElectionInput,
    from: NodeId,
) -> BTreeMap<NodeId, u32> {
    neighbors.hop_distances_within(from, |n| {
        n == from || input.candidate(n).is_some_and(|c| c.present)
    })
}

impl Hierarchy {
    /// A hierarchy with no clusters; every node is outside it.
    pub fn empty(layout: Layout, sink: NodeId) -> Hierarchy {
        let mut h = Hierarchy {
            layout,
            sink,
            clusters: BTreeMap::new(),
            sectors: BTreeMap::new(),
            unassigned: BTreeSet::new(),
            isolated: BTreeSet::new(),
            degraded: BTreeSet::new(),
            node_cluster: BTreeMap::new(),
            node_sector: BTreeMap::new(),
            roles: BTreeMap::new(),
            next_sector: 0,
            generation: 0,
        };
        h.refresh();
        h
    }

    /// Runs cluster formation only; sectors are added by [`Hierarchy::form_sectors`].
    pub fn form_clusters(
        layout: Layout,
        sink: NodeId,
        input: &ElectionInput,
        neighbors: &NeighborMap,
    ) -> Result<(Hierarchy, Vec<HierarchyNote>), ElectionError> {
        let hops = present_hops(neighbors, input, sink);
        let drafts = select_cluster_coordinators(input, &hops)?;
        let mut h = Hierarchy::empty(layout, sink);
        let coordinators: BTreeSet<NodeId> = drafts.iter().map(|d| d.coordinator).collect();
        for (i, d) in drafts.iter().enumerate() {
            h.clusters.insert(
                i as ClusterId,
                Cluster {
                    id: i as ClusterId,
                    coordinator: d.coordinator,
                    members: BTreeSet::new(),
                    sectors: Vec::new(),
                    backup: None,
                },
            );
        }
        let mut notes = Vec::new();
        for c in input.candidates.values() {
            if !c.present || c.kind == NodeKind::Sink || coordinators.contains(&c.id) {
                continue;
            }
            let options: Vec<(ClusterId, NodeId)> = drafts
                .iter()
                .enumerate()
                .filter(|(_, d)| d.coverage.contains(&c.id))
                .map(|(i, d)| (i as ClusterId, d.coordinator))
                .collect();
            match assign_membership(c.id, &options, input) {
                Some(cid) => {
                    h.clusters
                        .get_mut(&cid)
                        .expect("draft cluster")
                        .members
                        .insert(c.id);
                }
                None => {
                    h.unassigned.insert(c.id);
                    notes.push(HierarchyNote::Unassigned { node: c.id });
                }
            }
        }
        for cl in h.clusters.values() {
            notes.push(HierarchyNote::ClusterFormed {
                cluster: cl.id,
                coordinator: cl.coordinator,
                members: cl.members.len(),
            });
        }
        h.refresh();
        Ok((h, notes))
    }

    /// Builds the sectors of every cluster.
    pub fn form_sectors(
        &mut self,
        input: &ElectionInput,
        neighbors: &NeighborMap,
    ) -> Vec<HierarchyNote> {
        let ids: Vec<ClusterId> = self.clusters.keys().copied().collect();
        let mut notes = Vec::new();
        for cid in ids {
            self.build_sectors(cid, input, neighbors, &mut notes);
        }
        self.refresh();
        notes
    }

    /// Cluster formation followed by sector formation.
    pub fn build(
        layout: Layout,
        sink: NodeId,
        input: &ElectionInput,
        neighbors: &NeighborMap,
    ) -> Result<(Hierarchy, Vec<HierarchyNote>), ElectionError> {
        let (mut h, mut notes) = Hierarchy::form_clusters(layout, sink, input, neighbors)?;
        notes.extend(h.form_sectors(input, neighbors));
        Ok((h, notes))
    }

    fn build_sectors(
        &mut self,
        cid: ClusterId,
        input: &ElectionInput,
        neighbors: &NeighborMap,
        notes: &mut Vec<HierarchyNote>,
    ) {
        let Some(cluster) = self.clusters.get(&cid) else {
            return;
        };
        for sid in cluster.sectors.clone() {
            self.sectors.remove(&sid);
        }
        let cc = cluster.coordinator;
        let members: BTreeSet<NodeId> = cluster
            .members
            .iter()
            .copied()
            .filter(|id| input.candidate(*id).is_some_and(|c| c.present))
            .collect();
        let mut new_sectors = Vec::new();
        match self.layout {
            Layout::NonSectorized => {
                let mut all = members;
                all.insert(cc);
                new_sectors.push(Sector {
                    id: 0,
                    cluster: cid,
                    coordinator: cc,
                    monitor: cc,
                    monitor_fallback: true,
                    forwarding_head: cc,
                    members: all,
                });
            }
            Layout::Sectorized => {
                let hops = present_hops(neighbors, input, cc);
                let drafts = select_sector_coordinators(&members, cc, &hops, input);
                if drafts.is_empty() {
                    notes.push(HierarchyNote::ZeroSectors { cluster: cid });
                }
                for d in drafts {
                    new_sectors.push(complete_sector(
                        cid,
                        d.coordinator,
                        d.members,
                        cc,
                        &hops,
                        input,
                    ));
                }
            }
        }
        let mut ids = Vec::new();
        for mut s in new_sectors {
            s.id = self.next_sector;
            self.next_sector += 1;
            if s.monitor_fallback && self.layout == Layout::Sectorized {
                notes.push(HierarchyNote::MonitorFallback {
                    sector: s.id,
                    coordinator: cc,
                });
            }
            notes.push(HierarchyNote::SectorFormed {
                sector: s.id,
                coordinator: s.coordinator,
                monitor: s.monitor,
                forwarder: s.forwarding_head,
            });
            self.degraded.remove(&Scope::Sector(s.id));
            ids.push(s.id);
            self.sectors.insert(s.id, s);
        }
        self.clusters.get_mut(&cid).expect("cluster").sectors = ids;
    }

    fn refresh(&mut self) {
        self.node_cluster.clear();
        self.node_sector.clear();
        self.roles.clear();
        self.roles.insert(self.sink, RoleKind::SinkNode);
        for cl in self.clusters.values() {
            self.node_cluster.insert(cl.coordinator, cl.id);
            for &m in &cl.members {
                self.node_cluster.insert(m, cl.id);
            }
        }
        for s in self.sectors.values() {
            for &m in &s.members {
                self.node_sector.insert(m, s.id);
                self.roles.insert(m, RoleKind::LeafNode);
            }
        }
        for s in self.sectors.values() {
            if self.layout == Layout::Sectorized {
                self.roles
                    .insert(s.coordinator, RoleKind::SectorCoordinator);
                if !s.monitor_fallback {
                    self.roles.insert(s.monitor, RoleKind::SectorMonitor);
                }
                if s.forwarding_head != s.coordinator {
                    self.roles
                        .insert(s.forwarding_head, RoleKind::ForwardingSectorHead);
                }
            }
        }
        for cl in self.clusters.values() {
            self.roles
                .insert(cl.coordinator, RoleKind::ClusterCoordinator);
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn clusters(&self) -> &BTreeMap<ClusterId, Cluster> {
        &self.clusters
    }

    pub fn sectors(&self) -> &BTreeMap<SectorId, Sector> {
        &self.sectors
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.get(&id)
    }

    pub fn sector(&self, id: SectorId) -> Option<&Sector> {
        self.sectors.get(&id)
    }

    pub fn cluster_of(&self, node: NodeId) -> Option<ClusterId> {
        self.node_cluster.get(&node).copied()
    }

    pub fn sector_of(&self, node: NodeId) -> Option<SectorId> {
        self.node_sector.get(&node).copied()
    }

    /// `None` for nodes outside the hierarchy (unassigned, isolated or
    /// stranded in a degraded scope).
    pub fn role(&self, node: NodeId) -> Option<RoleKind> {
        self.roles.get(&node).copied()
    }

    pub fn unassigned(&self) -> &BTreeSet<NodeId> {
        &self.unassigned
    }

    pub fn isolated(&self) -> &BTreeSet<NodeId> {
        &self.isolated
    }

    pub fn degraded(&self) -> &BTreeSet<Scope> {
        &self.degraded
    }

    /// Nodes currently holding any role above leaf, with the scope that must
    /// be rebuilt if they fail.
    pub fn role_holders(&self) -> Vec<(NodeId, RoleKind, Scope)> {
        let mut out = Vec::new();
        for cl in self.clusters.values() {
            out.push((
                cl.coordinator,
                RoleKind::ClusterCoordinator,
                Scope::Cluster(cl.id),
            ));
        }
        if self.layout == Layout::Sectorized {
            for s in self.sectors.values() {
                out.push((
                    s.coordinator,
                    RoleKind::SectorCoordinator,
                    Scope::Sector(s.id),
                ));
                if !s.monitor_fallback {
                    out.push((s.monitor, RoleKind::SectorMonitor, Scope::Sector(s.id)));
                }
                if s.forwarding_head != s.coordinator {
                    out.push((
                        s.forwarding_head,
                        RoleKind::ForwardingSectorHead,
                        Scope::Sector(s.id),
                    ));
                }
            }
        }
        out
    }

    /// Copies every cluster's membership into its backup slot.
    pub fn snapshot_backups(&mut self, epoch: u64) {
        let sectors = &self.sectors;
        for cl in self.clusters.values_mut() {
            cl.backup = Some(ClusterBackup {
                epoch,
                members: cl.members.clone(),
                sectors: cl
                    .sectors
                    .iter()
                    .filter_map(|s| sectors.get(s).cloned())
                    .collect(),
            });
        }
    }

    /// The sink's copy of every cluster backup.
    pub fn sink_backups(&self) -> BTreeMap<ClusterId, &ClusterBackup> {
        self.clusters
            .iter()
            .filter_map(|(id, c)| c.backup.as_ref().map(|b| (*id, b)))
            .collect()
    }

    /// Strips `node` of membership and role. Returns the scope that must be
    /// rebuilt when the node held a role. Idempotent.
    pub fn isolate(&mut self, node: NodeId) -> Option<Scope> {
        if !self.isolated.insert(node) {
            return None;
        }
        let role = self.role(node);
        let scope = match role {
            Some(RoleKind::ClusterCoordinator) => self.cluster_of(node).map(Scope::Cluster),
            Some(
                RoleKind::SectorCoordinator
                | RoleKind::SectorMonitor
                | RoleKind::ForwardingSectorHead,
            ) => self.sector_of(node).map(Scope::Sector),
            _ => None,
        };
        self.unassigned.remove(&node);
        for cl in self.clusters.values_mut() {
            cl.members.remove(&node);
            if let Some(b) = cl.backup.as_mut() {
                b.members.remove(&node);
            }
        }
        if scope.is_none() {
            for s in self.sectors.values_mut() {
                s.members.remove(&node);
            }
        }
        self.refresh();
        scope
    }

    /// Re-runs the elections of `scope` against the current candidate table.
    pub fn reconfigure(
        &mut self,
        scope: Scope,
        _trigger: ReconfigTrigger,
        input: &ElectionInput,
        neighbors: &NeighborMap,
    ) -> Vec<HierarchyNote> {
        self.generation += 1;
        let mut notes = Vec::new();
        match scope {
            Scope::Cluster(cid) => self.reconfigure_cluster(cid, input, neighbors, &mut notes),
            Scope::Sector(sid) => match self.sectors.get(&sid).map(|s| s.cluster) {
                Some(cid) if self.layout == Layout::NonSectorized => {
                    self.reconfigure_cluster(cid, input, neighbors, &mut notes)
                }
                Some(_) => self.reconfigure_sector(sid, input, neighbors, &mut notes),
                None => {}
            },
        }
        self.refresh();
        notes
    }

    fn reconfigure_cluster(
        &mut self,
        cid: ClusterId,
        input: &ElectionInput,
        neighbors: &NeighborMap,
        notes: &mut Vec<HierarchyNote>,
    ) {
        let Some(old) = self.clusters.get(&cid).cloned() else {
            return;
        };
        let mut pool = old
            .backup
            .as_ref()
            .map(|b| b.members.clone())
            .unwrap_or_default();
        pool.extend(old.members.iter().copied());
        pool.insert(old.coordinator);
        pool.retain(|n| !self.isolated.contains(n));
        let present = |n: &NodeId| input.candidate(*n).is_some_and(|c| c.present);

        let hops = present_hops(neighbors, input, self.sink);
        let scope_key = (self.generation << 32) | u64::from(cid);
        let winner = pool
            .iter()
            .copied()
            .filter(|n| hops.contains_key(n))
            .filter(|n| {
                let c = &input.candidates[n];
                c.kind == NodeKind::Leader && c.electable()
            })
            .min_by(|&a, &b| {
                let (ca, cb) = (&input.candidates[&a], &input.candidates[&b]);
                cb.energy
                    .total_cmp(&ca.energy)
                    .then(hops[&a].cmp(&hops[&b]))
                    .then_with(|| {
                        tie_rank(input.seed, ElectionTag::Cluster, scope_key, a).cmp(&tie_rank(
                            input.seed,
                            ElectionTag::Cluster,
                            scope_key,
                            b,
                        ))
                    })
            });

        for sid in &old.sectors {
            self.sectors.remove(sid);
        }
        let Some(cc) = winner else {
            self.clusters.remove(&cid);
            for n in pool.into_iter().filter(present) {
                self.unassigned.insert(n);
            }
            self.degraded.insert(Scope::Cluster(cid));
            notes.push(HierarchyNote::Degraded {
                scope: Scope::Cluster(cid),
            });
            return;
        };

        let in_range = |n: NodeId| {
            input.candidates[&n]
                .position
                .distance(&input.candidates[&cc].position)
                <= input.radio.comm_range
        };
        let mut members = BTreeSet::new();
        let mut leftovers = Vec::new();
        for n in pool.iter().copied().filter(present) {
            if n == cc {
                continue;
            }
            if in_range(n) && hops.contains_key(&n) {
                members.insert(n);
            } else {
                leftovers.push(n);
            }
        }
        let joiners: Vec<NodeId> = self
            .unassigned
            .iter()
            .copied()
            .filter(|&n| present(&n) && in_range(n) && hops.contains_key(&n))
            .collect();
        for n in joiners {
            self.unassigned.remove(&n);
            members.insert(n);
        }
        let mut touched = BTreeSet::from([cid]);
        for n in leftovers {
            let options: Vec<(ClusterId, NodeId)> = self
                .clusters
                .values()
                .filter(|c| c.id != cid)
                .filter(|c| {
                    input.candidates[&n]
                        .position
                        .distance(&input.candidates[&c.coordinator].position)
                        <= input.radio.comm_range
                })
                .map(|c| (c.id, c.coordinator))
                .collect();
            match assign_membership(n, &options, input) {
                Some(other) => {
                    self.clusters
                        .get_mut(&other)
                        .expect("cluster")
                        .members
                        .insert(n);
                    touched.insert(other);
                }
                None => {
                    self.unassigned.insert(n);
                    notes.push(HierarchyNote::Unassigned { node: n });
                }
            }
        }
        notes.push(HierarchyNote::ClusterFormed {
            cluster: cid,
            coordinator: cc,
            members: members.len(),
        });
        self.clusters.insert(
            cid,
            Cluster {
                id: cid,
                coordinator: cc,
                members,
                sectors: Vec::new(),
                backup: old.backup,
            },
        );
        self.degraded.remove(&Scope::Cluster(cid));
        for t in touched {
            self.build_sectors(t, input, neighbors, notes);
        }
    }

    fn reconfigure_sector(
        &mut self,
        sid: SectorId,
        input: &ElectionInput,
        neighbors: &NeighborMap,
        notes: &mut Vec<HierarchyNote>,
    ) {
        let Some(old) = self.sectors.get(&sid).cloned() else {
            return;
        };
        let Some(cc) = self.clusters.get(&old.cluster).map(|c| c.coordinator) else {
            return;
        };
        let members: BTreeSet<NodeId> = old
            .members
            .iter()
            .copied()
            .filter(|n| {
                !self.isolated.contains(n) && input.candidate(*n).is_some_and(|c| c.present)
            })
            .collect();
        let hops = present_hops(neighbors, input, cc);
        let scope_key = (self.generation << 32) | u64::from(sid);
        let sc = members
            .iter()
            .copied()
            .filter(|n| {
                let c = &input.candidates[n];
                c.kind == NodeKind::Follower && c.electable() && c.detection_power > input.dp_min
            })
            .min_by(|&a, &b| {
                let (ca, cb) = (&input.candidates[&a], &input.candidates[&b]);
                let ha = hops.get(&a).copied().unwrap_or(u32::MAX);
                let hb = hops.get(&b).copied().unwrap_or(u32::MAX);
                cb.energy
                    .total_cmp(&ca.energy)
                    .then(ha.cmp(&hb))
                    .then_with(|| {
                        tie_rank(input.seed, ElectionTag::Sector, scope_key, a).cmp(&tie_rank(
                            input.seed,
                            ElectionTag::Sector,
                            scope_key,
                            b,
                        ))
                    })
            });
        let Some(sc) = sc else {
            self.sectors.remove(&sid);
            if let Some(cl) = self.clusters.get_mut(&old.cluster) {
                cl.sectors.retain(|s| *s != sid);
            }
            self.degraded.insert(Scope::Sector(sid));
            notes.push(HierarchyNote::Degraded {
                scope: Scope::Sector(sid),
            });
            return;
        };
        let mut s = complete_sector(old.cluster, sc, members, cc, &hops, input);
        s.id = sid;
        if s.monitor_fallback {
            notes.push(HierarchyNote::MonitorFallback {
                sector: sid,
                coordinator: cc,
            });
        }
        notes.push(HierarchyNote::SectorFormed {
            sector: sid,
            coordinator: s.coordinator,
            monitor: s.monitor,
            forwarder: s.forwarding_head,
        });
        self.sectors.insert(sid, s);
    }
}

fn complete_sector(
    cluster: ClusterId,
    coordinator: NodeId,
    members: BTreeSet<NodeId>,
    cc: NodeId,
    hops: &BTreeMap<NodeId, u32>,
    input: &ElectionInput,
) -> Sector {
    let monitor = select_sector_monitor(&members, coordinator, cc, input);
    let leader_monitor = match monitor {
        MonitorChoice::Leader(n) => Some(n),
        MonitorChoice::Fallback(_) => None,
    };
    let forwarder =
        select_forwarding_sector_head(&members, coordinator, leader_monitor, cc, hops, input);
    Sector {
        id: 0,
        cluster,
        coordinator,
        monitor: monitor.node(),
        monitor_fallback: leader_monitor.is_none(),
        forwarding_head: forwarder,
        members,
    }
}
