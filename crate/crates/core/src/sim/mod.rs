//! Event-driven simulation: packets, slot schedules, the event queue, protocol
//! phases, and the engine that ties them together.

mod engine;
mod metrics;
mod packet;
mod phase;
mod queue;
mod schedule;

pub use engine::{
    run, AttackerOutcome, Delivery, EnergyAudit, EventRecord, FlagStats, NodeSummary, RunOutput,
};
pub use metrics::{metrics_csv, MetricsFrame, CSV_HEADER};
pub use packet::{Packet, PacketKind};
pub use phase::{IllegalTransition, Phase, PhaseState};
pub use queue::EventQueue;
pub use schedule::SlotSchedule;
