//! Experiment presets. Each preset expands into a list of independent runs
//! ("arms"), executes them in parallel, and folds their outputs into one
//! plotting series plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{AttackerSpec, ARCHETYPE_NAMES};
use crate::error::{ConfigError, SimError};
use crate::hierarchy::Layout;
use crate::report::{run_scenario, METRICS_FILE};
use crate::scenario::ScenarioConfig;
use crate::sim::RunOutput;

pub const MANIFEST_FILE: &str = "manifest.toml";

const SHAPE_NOTE: &str = "The source figure has no readable numeric axes. This series reproduces its qualitative shape only.";

#[derive(Debug, Clone)]
pub struct Arm {
    pub label: String,
    pub config: ScenarioConfig,
}

impl Arm {
    fn new(label: impl Into<String>, config: ScenarioConfig) -> Self {
        Arm {
            label: label.into(),
            config,
        }
    }
}

/// A summary table over all arms of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub file: &'static str,
    pub x: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

pub trait Preset: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// The comparison the series is meant to show.
    fn claim(&self) -> &'static str;
    fn arms(&self, seed: u64) -> Vec<Arm>;
    /// `outputs[i]` belongs to `arms[i]`.
    fn summarize(&self, arms: &[Arm], outputs: &[RunOutput]) -> Series;
}

fn attacked(mut cfg: ScenarioConfig, count: usize) -> ScenarioConfig {
    for i in 0..count {
        cfg.attackers.push(AttackerSpec::new(
            ARCHETYPE_NAMES[i % ARCHETYPE_NAMES.len()],
        ));
    }
    cfg
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn epoch_rows(
    outputs: &[&RunOutput],
    pick: impl Fn(&RunOutput, usize) -> Vec<String>,
) -> Vec<Vec<String>> {
    let n = outputs.iter().map(|o| o.frames.len()).min().unwrap_or(0);
    (0..n)
        .map(|i| {
            let mut row = vec![i.to_string(), format!("{:.3}", outputs[0].frames[i].time)];
            for o in outputs {
                row.extend(pick(o, i));
            }
            row
        })
        .collect()
}

pub struct AliveComparison;

pub const FIG4_INJECTORS: usize = 2;

impl Preset for AliveComparison {
    fn name(&self) -> &'static str {
        "fig4_alive"
    }

    fn description(&self) -> &'static str {
        "Alive nodes per epoch: attack-free, wake injectors with detection off, wake injectors with detection on."
    }

    fn claim(&self) -> &'static str {
        "Injected wake-ups drain victims when undetected; the layered detector keeps more nodes alive."
    }

    fn arms(&self, seed: u64) -> Vec<Arm> {
        let base = ScenarioConfig::with_seed(seed);
        let mut hit = base.clone();
        for _ in 0..FIG4_INJECTORS {
            hit.attackers.push(AttackerSpec::new("wake-injector"));
        }
        let mut off = hit.clone();
        off.detection.enabled = false;
        vec![
            Arm::new("attack-free", base),
            Arm::new("injected-detection-off", off),
            Arm::new("injected-detection-on", hit),
        ]
    }

    fn summarize(&self, _arms: &[Arm], outputs: &[RunOutput]) -> Series {
        let refs: Vec<&RunOutput> = outputs.iter().collect();
        Series {
            file: "alive.csv",
            x: "epoch",
            columns: vec![
                "epoch",
                "time_s",
                "attack_free",
                "detection_off",
                "detection_on",
            ],
            rows: epoch_rows(&refs, |o, i| vec![o.frames[i].alive_count.to_string()]),
        }
    }
}

pub struct AccuracySweep;

pub const FIG5_ATTACKERS: [usize; 5] = [1, 2, 3, 4, 5];

impl Preset for AccuracySweep {
    fn name(&self) -> &'static str {
        "fig5_accuracy"
    }

    fn description(&self) -> &'static str {
        "Final detection accuracy per attacker count, with adjudication and with every first-layer flag treated as final."
    }

    fn claim(&self) -> &'static str {
        "Adjudication suppresses phantom detections that the first layer alone would act on."
    }

    fn arms(&self, seed: u64) -> Vec<Arm> {
        let mut arms = Vec::new();
        for k in FIG5_ATTACKERS {
            let cfg = attacked(ScenarioConfig::with_seed(seed), k);
            let mut base = cfg.clone();
            base.adjudication.policy = "sids-final".into();
            arms.push(Arm::new(format!("attackers-{k}"), cfg));
            arms.push(Arm::new(format!("attackers-{k}-sids-final"), base));
        }
        arms
    }

    fn summarize(&self, arms: &[Arm], outputs: &[RunOutput]) -> Series {
        let rows = arms
            .chunks(2)
            .zip(outputs.chunks(2))
            .map(|(a, o)| {
                let (full, base) = (o[0].last_frame(), o[1].last_frame());
                vec![
                    a[0].config.attackers.len().to_string(),
                    f6(full.accuracy),
                    full.truedetect.to_string(),
                    full.phantomdetect.to_string(),
                    f6(base.accuracy),
                    base.truedetect.to_string(),
                    base.phantomdetect.to_string(),
                ]
            })
            .collect();
        Series {
            file: "accuracy.csv",
            x: "attackers",
            columns: vec![
                "attackers",
                "accuracy",
                "truedetect",
                "phantomdetect",
                "baseline_accuracy",
                "baseline_truedetect",
                "baseline_phantomdetect",
            ],
            rows,
        }
    }
}

pub struct SectorizationEnergy;

pub const FIG6_DENSITIES: [u32; 4] = [50, 100, 150, 200];

/// The default field with `nodes` sensors, one in ten a leader.
pub fn density_config(seed: u64, nodes: u32, mode: Layout) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::with_seed(seed);
    cfg.field.leaders = nodes / 10;
    cfg.field.followers = nodes - nodes / 10;
    cfg.mode = mode;
    cfg
}

impl Preset for SectorizationEnergy {
    fn name(&self) -> &'static str {
        "fig6_sectorization"
    }

    fn description(&self) -> &'static str {
        "Total energy consumed at the horizon per node count, sectorized against non-sectorized clusters."
    }

    fn claim(&self) -> &'static str {
        "Sectorization lowers total energy consumption at every density."
    }

    fn arms(&self, seed: u64) -> Vec<Arm> {
        FIG6_DENSITIES
            .iter()
            .flat_map(|&n| {
                [
                    Arm::new(
                        format!("nodes-{n}-sectorized"),
                        density_config(seed, n, Layout::Sectorized),
                    ),
                    Arm::new(
                        format!("nodes-{n}-non-sectorized"),
                        density_config(seed, n, Layout::NonSectorized),
                    ),
                ]
            })
            .collect()
    }

    fn summarize(&self, arms: &[Arm], outputs: &[RunOutput]) -> Series {
        let rows = arms
            .chunks(2)
            .zip(outputs.chunks(2))
            .map(|(a, o)| {
                vec![
                    a[0].config.field.node_count().saturating_sub(1).to_string(),
                    f6(o[0].last_frame().energy_consumed),
                    f6(o[1].last_frame().energy_consumed),
                ]
            })
            .collect();
        Series {
            file: "energy.csv",
            x: "nodes",
            columns: vec!["nodes", "sectorized_j", "non_sectorized_j"],
            rows,
        }
    }
}

pub struct OverheadSeries;

pub const FIG7_ATTACKERS: usize = 2;

impl Preset for OverheadSeries {
    fn name(&self) -> &'static str {
        "fig7_overhead"
    }

    fn description(&self) -> &'static str {
        "Cumulative data and control transmissions and the overhead ratio per epoch, attack-free and attacked."
    }

    fn claim(&self) -> &'static str {
        "Transmission counts, and with them the absolute overhead, grow with time."
    }

    fn arms(&self, seed: u64) -> Vec<Arm> {
        let base = ScenarioConfig::with_seed(seed);
        vec![
            Arm::new("attack-free", base.clone()),
            Arm::new("attacked", attacked(base, FIG7_ATTACKERS)),
        ]
    }

    fn summarize(&self, _arms: &[Arm], outputs: &[RunOutput]) -> Series {
        let refs: Vec<&RunOutput> = outputs.iter().collect();
        Series {
            file: "overhead.csv",
            x: "epoch",
            columns: vec![
                "epoch",
                "time_s",
                "data_packets",
                "control_packets",
                "overhead_ratio",
                "attacked_data_packets",
                "attacked_control_packets",
                "attacked_overhead_ratio",
            ],
            rows: epoch_rows(&refs, |o, i| {
                let f = &o.frames[i];
                vec![
                    f.data_packets.to_string(),
                    f.control_packets.to_string(),
                    f6(f.overhead_ratio),
                ]
            }),
        }
    }
}

pub const PRESET_NAMES: [&str; 4] = [
    "fig4_alive",
    "fig5_accuracy",
    "fig6_sectorization",
    "fig7_overhead",
];

pub fn preset_by_name(name: &str) -> Result<Box<dyn Preset>, ConfigError> {
    match name {
        "fig4_alive" => Ok(Box::new(AliveComparison)),
        "fig5_accuracy" => Ok(Box::new(AccuracySweep)),
        "fig6_sectorization" => Ok(Box::new(SectorizationEnergy)),
        "fig7_overhead" => Ok(Box::new(OverheadSeries)),
        other => Err(ConfigError::UnknownName {
            kind: "preset",
            name: other.to_owned(),
            known: PRESET_NAMES.join(", "),
        }),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    preset: &'a str,
    seed: u64,
    description: &'a str,
    claim: &'a str,
    note: &'a str,
    series: ManifestSeries<'a>,
    runs: Vec<ManifestRun<'a>>,
}

#[derive(Serialize)]
struct ManifestSeries<'a> {
    file: &'a str,
    x: &'a str,
    columns: &'a [&'static str],
}

#[derive(Serialize)]
struct ManifestRun<'a> {
    label: &'a str,
    metrics: String,
}

pub struct PresetOutput {
    pub arms: Vec<Arm>,
    pub outputs: Vec<RunOutput>,
    pub series: Series,
}

/// Runs every arm, one subdirectory each, on a pool of `threads` workers
/// (0 picks the machine default). Results keep arm order whatever the
/// thread count.
pub fn run_preset(
    preset: &dyn Preset,
    seed: u64,
    dir: &Path,
    threads: usize,
) -> Result<PresetOutput, SimError> {
    let arms = preset.arms(seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::invalid("threads", e.to_string()))?;
    let created = !dir.exists();
    let results: Vec<Result<RunOutput, SimError>> = pool.install(|| {
        arms.par_iter()
            .map(|a| run_scenario(&a.config, &dir.join(&a.label)))
            .collect()
    });
    let outputs = match results.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(o) => o,
        Err(e) => {
            if created {
                let _ = fs::remove_dir_all(dir);
            }
            return Err(e);
        }
    };
    let series = preset.summarize(&arms, &outputs);
    let manifest = Manifest {
        preset: preset.name(),
        seed,
        description: preset.description(),
        claim: preset.claim(),
        note: SHAPE_NOTE,
        series: ManifestSeries {
            file: series.file,
            x: series.x,
            columns: &series.columns,
        },
        runs: arms
            .iter()
            .map(|a| ManifestRun {
                label: &a.label,
                metrics: format!("{}/{METRICS_FILE}", a.label),
            })
            .collect(),
    };
    let manifest = toml::to_string(&manifest).expect("manifest serializes");
    for (name, body) in [(series.file, series.csv()), (MANIFEST_FILE, manifest)] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| SimError::io(path, e))?;
    }
    Ok(PresetOutput {
        arms,
        outputs,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_every_name() {
        for name in PRESET_NAMES {
            assert_eq!(preset_by_name(name).unwrap().name(), name);
        }
        let err = preset_by_name("fig8").err().unwrap().to_string();
        assert!(PRESET_NAMES.iter().all(|n| err.contains(n)), "{err}");
    }

    #[test]
    fn arm_labels_are_unique() {
        for name in PRESET_NAMES {
            let arms = preset_by_name(name).unwrap().arms(1);
            let mut labels: Vec<&str> = arms.iter().map(|a| a.label.as_str()).collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), arms.len(), "{name}");
        }
    }

    #[test]
    fn accuracy_arms_pair_full_and_baseline() {
        let arms = AccuracySweep.arms(3);
        assert_eq!(arms.len(), 2 * FIG5_ATTACKERS.len());
        for pair in arms.chunks(2) {
            assert_eq!(pair[0].config.attackers, pair[1].config.attackers);
            assert_eq!(pair[1].config.adjudication.policy, "sids-final");
            assert_ne!(pair[0].config.adjudication.policy, "sids-final");
        }
    }

    #[test]
    fn density_config_counts() {
        let cfg = density_config(1, 150, Layout::NonSectorized);
        assert_eq!(cfg.field.leaders + cfg.field.followers, 150);
        assert_eq!(cfg.mode, Layout::NonSectorized);
    }
}
