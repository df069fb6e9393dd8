use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketKind {
    /// Sensed data.
    Data,
    /// Unsolicited traffic addressed at sleeping neighbours.
    WakeFrame,
}

/// One data unit travelling leaf → sector coordinator → forwarder → cluster
/// coordinator → sink.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub origin: NodeId,
    pub kind: PacketKind,
    pub payload_size: u32,
    /// Local timestamp stamped by the origin, simulated seconds.
    pub created_at: f64,
    /// Slot index the origin claims to have used.
    pub slot: u32,
    pub hops: Vec<NodeId>,
}

impl Packet {
    /// Missing timestamp or empty payload.
    pub fn is_malformed(&self) -> bool {
        !self.created_at.is_finite() || self.payload_size == 0
    }

    pub fn push_hop(&mut self, node: NodeId) {
        if self.hops.last() != Some(&node) {
            self.hops.push(node);
        }
    }
}
