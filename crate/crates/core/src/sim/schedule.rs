use std::collections::BTreeMap;

use crate::error::ConfigError;
use crate::topology::NodeId;

/// Per-sector slot plan: each source owns one or more slots of the frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSchedule {
    frame_length: u32,
    slot_capacity: u32,
    assignments: BTreeMap<NodeId, Vec<u32>>,
    owners: BTreeMap<u32, NodeId>,
}

impl SlotSchedule {
    /// Deals slots round-robin over `sources` in id order, so source `i` of
    /// `n` owns slots `i, i + n, i + 2n, …` below `frame_length`.
    pub fn round_robin(
        sector: u32,
        sources: impl IntoIterator<Item = NodeId>,
        frame_length: u32,
        slot_capacity: u32,
    ) -> Result<SlotSchedule, ConfigError> {
        let mut sources: Vec<NodeId> = sources.into_iter().collect();
        sources.sort();
        sources.dedup();
        if sources.len() > frame_length as usize {
            return Err(ConfigError::Unschedulable {
                sector,
                leaves: sources.len(),
                slots: frame_length as usize,
            });
        }
        let mut assignments: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
        let mut owners = BTreeMap::new();
        if !sources.is_empty() {
            for slot in 0..frame_length {
                let owner = sources[slot as usize % sources.len()];
                assignments.entry(owner).or_default().push(slot);
                owners.insert(slot, owner);
            }
        }
        Ok(SlotSchedule {
            frame_length,
            slot_capacity,
            assignments,
            owners,
        })
    }

    pub fn frame_length(&self) -> u32 {
        self.frame_length
    }

    pub fn slot_capacity(&self) -> u32 {
        self.slot_capacity
    }

    pub fn slots(&self, node: NodeId) -> &[u32] {
        self.assignments
            .get(&node)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn owner(&self, slot: u32) -> Option<NodeId> {
        self.owners.get(&slot).copied()
    }

    pub fn owns(&self, node: NodeId, slot: u32) -> bool {
        self.owner(slot) == Some(node)
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.assignments.keys().copied()
    }

    /// Packet budget of a source per frame: owned slots × slot capacity.
    pub fn budget(&self, node: NodeId) -> u32 {
        self.slots(node).len() as u32 * self.slot_capacity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_is_disjoint_and_total() {
        let s = SlotSchedule::round_robin(0, [NodeId(5), NodeId(2), NodeId(9)], 8, 2).unwrap();
        assert_eq!(s.slots(NodeId(2)), &[0, 3, 6]);
        assert_eq!(s.slots(NodeId(5)), &[1, 4, 7]);
        assert_eq!(s.slots(NodeId(9)), &[2, 5]);
        assert_eq!(s.budget(NodeId(9)), 4);
        for slot in 0..8 {
            let owner = s.owner(slot).unwrap();
            assert!(s.slots(owner).contains(&slot));
        }
        assert!(s.slots(NodeId(1)).is_empty());
    }

    #[test]
    fn too_many_leaves_is_unschedulable() {
        let err = SlotSchedule::round_robin(3, (0..5).map(NodeId), 4, 1).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Unschedulable {
                sector: 3,
                leaves: 5,
                slots: 4
            }
        );
    }
}
