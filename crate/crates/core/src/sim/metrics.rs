use std::fmt::Write;

pub const CSV_HEADER: &str = "time_s,alive_count,energy_consumed_j,truedetect,phantomdetect,accuracy,data_packets,control_packets,overhead_ratio,quarantined_count";

/// Snapshot of the network taken at an epoch boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsFrame {
    pub time: f64,
    pub alive_count: usize,
    pub energy_consumed: f64,
    pub truedetect: u64,
    pub phantomdetect: u64,
    pub accuracy: f64,
    pub data_packets: u64,
    pub control_packets: u64,
    pub overhead_ratio: f64,
    pub quarantined_count: usize,
}

impl MetricsFrame {
    pub fn overhead(data: u64, control: u64) -> f64 {
        control as f64 / (data + control).max(1) as f64
    }

    /// One CSV row with fixed precision.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.3},{},{:.9},{},{},{:.6},{},{},{:.6},{}",
            self.time,
            self.alive_count,
            self.energy_consumed,
            self.truedetect,
            self.phantomdetect,
            self.accuracy,
            self.data_packets,
            self.control_packets,
            self.overhead_ratio,
            self.quarantined_count
        )
    }
}

pub fn metrics_csv(frames: &[MetricsFrame]) -> String {
    let mut out = String::with_capacity(64 * (frames.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for f in frames {
        let _ = writeln!(out, "{}", f.csv_row());
    }
    out
}
