//! Discrete-event simulator of a heterogeneous wireless sensor network
//! defending against sleep-deprivation attacks with a layered detector.

pub mod adjudication;
pub mod attack;
pub mod detection;
pub mod energy;
pub mod error;
pub mod hierarchy;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod topology;
