//! Serialization of one run into its output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::SimError;
use crate::scenario::ScenarioConfig;
use crate::sim::{metrics_csv, run, RunOutput};

pub const METRICS_FILE: &str = "metrics.csv";
pub const EVENTS_FILE: &str = "events.log";
pub const QUARANTINE_FILE: &str = "quarantine_report.txt";
pub const CONFIG_FILE: &str = "config_resolved.toml";

pub fn events_log(out: &RunOutput) -> String {
    let mut s = String::with_capacity(48 * out.events.len());
    for e in &out.events {
        s.push_str(&e.line());
        s.push('\n');
    }
    s
}

pub fn quarantine_report(out: &RunOutput) -> String {
    let f = out.last_frame();
    let mut s = String::new();
    let _ = writeln!(s, "seed: {}", out.resolved.seed);
    let _ = writeln!(s, "epochs: {}", out.resolved.horizon);
    let _ = writeln!(s, "truedetect: {}", f.truedetect);
    let _ = writeln!(s, "phantomdetect: {}", f.phantomdetect);
    let _ = writeln!(s, "accuracy: {:.6}", f.accuracy);
    let _ = writeln!(s, "attacker recall: {:.6}", out.recall());
    let _ = writeln!(
        s,
        "first-layer false positives per 1000 benign node-epochs: {:.6} ({} of {})",
        out.flag_stats.benign_flags_per_1000(),
        out.flag_stats.benign_flags,
        out.flag_stats.benign_node_epochs
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "attackers:");
    if out.attackers.is_empty() {
        let _ = writeln!(s, "  none");
    }
    for a in &out.attackers {
        match a.quarantined_at {
            Some(t) => {
                let _ = writeln!(s, "  {} {} quarantined at {t:.3}", a.node, a.archetype);
            }
            None => {
                let _ = writeln!(s, "  {} {} not quarantined", a.node, a.archetype);
            }
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "quarantine list:");
    if out.quarantine.is_empty() {
        let _ = writeln!(s, "  empty");
    }
    for q in &out.quarantine {
        let sector = q
            .member_id
            .map_or_else(|| "-".to_owned(), |m| m.to_string());
        let _ = writeln!(
            s,
            "  {} epoch={} sector={} trust={:.6} malicious={} scout={} monitor={} compromised={} na={}",
            q.node_id,
            q.since,
            sector,
            q.trust,
            q.malicious,
            q.scout,
            q.monitor,
            q.compromised,
            if q.na.is_empty() { "-" } else { &q.na },
        );
    }
    s
}

/// Every output file of a run, in write order.
pub fn render(out: &RunOutput) -> Vec<(&'static str, String)> {
    vec![
        (METRICS_FILE, metrics_csv(&out.frames)),
        (EVENTS_FILE, events_log(out)),
        (QUARANTINE_FILE, quarantine_report(out)),
        (CONFIG_FILE, out.resolved.to_toml()),
    ]
}

/// Writes the rendered files, removing whatever was written (and the
/// directory, if this call created it) when any write fails.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<(), SimError> {
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, body) in render(out) {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in written.iter().chain(std::iter::once(&path)) {
                let _ = fs::remove_file(p);
            }
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(SimError::io(path, e));
        }
        written.push(path);
    }
    Ok(())
}

/// Runs the scenario and writes its outputs. Nothing is written when the
/// simulation itself fails.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> Result<RunOutput, SimError> {
    let out = run(cfg)?;
    write_outputs(&out, dir)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::with_seed(4);
        cfg.horizon = 6;
        cfg.field.leaders = 3;
        cfg.field.followers = 12;
        cfg
    }

    #[test]
    fn writes_all_four_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_scenario(&small(), dir.path()).unwrap();
        for name in [METRICS_FILE, EVENTS_FILE, QUARANTINE_FILE, CONFIG_FILE] {
            assert!(dir.path().join(name).is_file(), "{name}");
        }
        let csv = fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap();
        assert_eq!(csv.lines().count(), 1 + out.frames.len());
        assert_eq!(out.frames.len(), 7);
    }

    #[test]
    fn config_failure_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("run");
        let mut cfg = small();
        cfg.horizon = 0;
        assert!(run_scenario(&cfg, &target).is_err());
        assert!(!target.exists());
    }

    #[test]
    fn report_lists_attackers() {
        let mut cfg = small();
        cfg.attackers
            .push(crate::attack::AttackerSpec::new("flooder"));
        let out = run(&cfg).unwrap();
        let text = quarantine_report(&out);
        assert!(text.contains("flooder"), "{text}");
        assert!(text.contains("accuracy:"));
    }
}
