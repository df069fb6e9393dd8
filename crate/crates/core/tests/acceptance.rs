//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any failed.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hwsn_core::adjudication::{adjudicate, AdjudicationConfig, DetectionBudget};
use hwsn_core::attack::{AttackerSpec, ARCHETYPE_NAMES};
use hwsn_core::detection::{
    evaluate_insomnia, AcquisitionVector, CaseRegistry, DetectionThresholds, LedgerView,
    ReputationRecord,
};
use hwsn_core::hierarchy::{tie_rank, Candidate, ElectionInput, ElectionTag, Hierarchy, Layout};
use hwsn_core::presets::{
    run_preset, AccuracySweep, AliveComparison, OverheadSeries, Preset, SectorizationEnergy,
    FIG6_DENSITIES,
};
use hwsn_core::report::{run_scenario, METRICS_FILE};
use hwsn_core::scenario::ScenarioConfig;
use hwsn_core::sim::{run, Packet, PacketKind, RunOutput, SlotSchedule};
use hwsn_core::topology::{neighbor_discovery, Node, NodeId, NodeKind, Position, RadioModel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(elapsed < limit, || {
        format!("{what} took {elapsed:?}, limit {limit:?}")
    })
}

const SEEDS: [u64; 3] = [1, 2, 3];

// ---------------------------------------------------------------------------
// 1. Insomnia cases at, below and above each threshold.

const LEAF: NodeId = NodeId(3);

fn thresholds() -> DetectionThresholds {
    DetectionThresholds {
        tnec: 2.0,
        th_lifetime: 4.0,
        th_wake: 1.5,
        th_sleep: 8.0,
        th_buffer: 50.0,
        energy_jump_delta: 0.5,
    }
}

struct Probe {
    consumed: f64,
    lifetime: f64,
    wake: f64,
    sleep: f64,
    foreign: usize,
    own: usize,
    reported: f64,
}

impl Default for Probe {
    fn default() -> Self {
        Probe {
            consumed: 1.0,
            lifetime: 10.0,
            wake: 1.0,
            sleep: 9.0,
            foreign: 0,
            own: 1,
            reported: 8.0,
        }
    }
}

fn evaluate(p: &Probe) -> [bool; 6] {
    // LEAF owns slots 0, 2, 4, 6 of an 8-slot frame: budget 4 slots x 4 = 16.
    let schedule = SlotSchedule::round_robin(0, [LEAF, NodeId(4)], 8, 4).unwrap();
    let packet = |slot: u32| Packet {
        id: 0,
        origin: LEAF,
        kind: PacketKind::Data,
        payload_size: 36,
        created_at: 0.0,
        slot,
        hops: vec![LEAF],
    };
    let mut packets: Vec<Packet> = (0..p.own).map(|_| packet(0)).collect();
    packets.extend((0..p.foreign).map(|_| packet(1)));
    let av = AcquisitionVector {
        leaf: LEAF,
        packets,
        observed_wake: p.wake,
        observed_sleep: p.sleep,
        reported_residual: p.reported,
    };
    let view = LedgerView {
        consumed: p.consumed,
        last_recorded: 8.0,
        remaining_lifetime: p.lifetime,
    };
    let v = evaluate_insomnia(
        &CaseRegistry::standard(),
        &av,
        Some(&view),
        &schedule,
        &thresholds(),
        0,
    )
    .unwrap();
    [
        v.insomnia, v.flags[0], v.flags[1], v.flags[2], v.flags[3], v.flags[4],
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    // (label, probe, case number expected to fire or 0 for none)
    let table: Vec<(&str, Probe, u8)> = vec![
        ("baseline", Probe::default(), 0),
        (
            "tnec below",
            Probe {
                consumed: 1.999,
                ..Probe::default()
            },
            0,
        ),
        (
            "tnec at",
            Probe {
                consumed: 2.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "tnec above",
            Probe {
                consumed: 2.001,
                ..Probe::default()
            },
            1,
        ),
        (
            "lifetime above",
            Probe {
                lifetime: 4.001,
                ..Probe::default()
            },
            0,
        ),
        (
            "lifetime at",
            Probe {
                lifetime: 4.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "lifetime below",
            Probe {
                lifetime: 3.999,
                ..Probe::default()
            },
            1,
        ),
        (
            "wake at, sleep short",
            Probe {
                wake: 1.5,
                sleep: 7.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "wake above, sleep at",
            Probe {
                wake: 2.0,
                sleep: 8.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "wake above, sleep short",
            Probe {
                wake: 2.0,
                sleep: 7.999,
                ..Probe::default()
            },
            2,
        ),
        (
            "wake below, sleep short",
            Probe {
                wake: 1.499,
                sleep: 7.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "no sleep",
            Probe {
                wake: 1.0,
                sleep: 0.0,
                ..Probe::default()
            },
            2,
        ),
        (
            "foreign slots at 0",
            Probe {
                foreign: 0,
                own: 3,
                ..Probe::default()
            },
            0,
        ),
        (
            "foreign slots above",
            Probe {
                foreign: 1,
                own: 0,
                ..Probe::default()
            },
            3,
        ),
        (
            "jump below",
            Probe {
                reported: 4.001,
                ..Probe::default()
            },
            0,
        ),
        (
            "jump at",
            Probe {
                reported: 4.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "jump at, upward",
            Probe {
                reported: 12.0,
                ..Probe::default()
            },
            0,
        ),
        (
            "jump above",
            Probe {
                reported: 3.999,
                ..Probe::default()
            },
            4,
        ),
        (
            "jump above, upward",
            Probe {
                reported: 12.001,
                ..Probe::default()
            },
            4,
        ),
        (
            "buffer below",
            Probe {
                own: 7,
                ..Probe::default()
            },
            0,
        ),
        (
            "buffer at",
            Probe {
                own: 8,
                ..Probe::default()
            },
            0,
        ),
        (
            "buffer above",
            Probe {
                own: 9,
                ..Probe::default()
            },
            5,
        ),
    ];
    for (label, probe, case) in &table {
        let got = evaluate(probe);
        let mut want = [false; 6];
        if *case > 0 {
            want[0] = true;
            want[usize::from(*case)] = true;
        }
        check(got == want, || {
            format!("{label}: flags {got:?}, expected {want:?}")
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1), "case suite")?;
    Ok(format!("{} threshold probes in {elapsed:?}", table.len()))
}

// ---------------------------------------------------------------------------
// 2. Elections against a brute-force oracle.

const RANGE: f64 = 25.0;
const SECTOR_RADIUS: f64 = 12.5;
const DP_MIN: f64 = 1.0;

struct Instance {
    nodes: Vec<Node>,
    candidates: BTreeMap<NodeId, Candidate>,
    radio: RadioModel,
    seed: u64,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=25usize);
    let leaders = rng.random_range(1..=(n / 3).max(1));
    let energies = [0.0, 5.0, 10.0, 10.0, 20.0];
    let powers = [0.5, 2.0, 5.0, 5.0];
    let mut nodes = Vec::new();
    let mut candidates = BTreeMap::new();
    for i in 0..n {
        let kind = match i {
            0 => NodeKind::Sink,
            i if i <= leaders => NodeKind::Leader,
            _ => NodeKind::Follower,
        };
        // Grid positions make equal distances, and so exact ties, common.
        let position = Position::new(
            5.0 * f64::from(rng.random_range(0..=12u8)),
            5.0 * f64::from(rng.random_range(0..=12u8)),
        );
        let (energy, dp, present) = if kind == NodeKind::Sink {
            (1e6, 0.0, true)
        } else {
            (
                energies[rng.random_range(0..energies.len())],
                powers[rng.random_range(0..powers.len())],
                rng.random_bool(0.9),
            )
        };
        let id = NodeId(i as u32);
        nodes.push(Node {
            id,
            kind,
            position,
            initial_energy: energy,
            detection_power: dp,
        });
        candidates.insert(
            id,
            Candidate {
                id,
                kind,
                position,
                energy,
                detection_power: dp,
                present,
            },
        );
    }
    Instance {
        nodes,
        candidates,
        radio: RadioModel {
            comm_range: RANGE,
            ..RadioModel::default()
        },
        seed,
    }
}

const INF: u32 = u32::MAX;

/// All-pairs hop counts over present nodes.
#[allow(clippy::needless_range_loop)]
fn floyd_warshall(inst: &Instance) -> Vec<Vec<u32>> {
    let n = inst.nodes.len();
    let present = |i: usize| inst.candidates[&NodeId(i as u32)].present;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        if !present(i) {
            continue;
        }
        d[i][i] = 0;
        for j in 0..n {
            if i != j
                && present(j)
                && inst.nodes[i].position.distance(&inst.nodes[j].position) <= RANGE
            {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != INF && d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn signal(a: &Position, b: &Position, radio: &RadioModel) -> f64 {
    let d = a.distance(b);
    if d <= 1.0 {
        radio.reference_strength
    } else {
        radio.reference_strength * d.powf(-radio.signal_exponent)
    }
}

/// Sorts every candidate by its full key and returns the first.
fn brute_best<K: PartialOrd>(mut keyed: Vec<(K, NodeId)>) -> Option<NodeId> {
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    keyed.first().map(|k| k.1)
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct OracleSector {
    coordinator: NodeId,
    monitor: NodeId,
    fallback: bool,
    forwarder: NodeId,
    members: BTreeSet<NodeId>,
}

#[derive(Debug, PartialEq)]
struct OracleCluster {
    coordinator: NodeId,
    members: BTreeSet<NodeId>,
    sectors: BTreeSet<OracleSector>,
}

fn strongest(inst: &Instance, node: NodeId, coords: &[NodeId], tag: ElectionTag) -> Option<NodeId> {
    let here = inst.candidates[&node].position;
    let keyed = coords
        .iter()
        .map(|&c| {
            let s = signal(&here, &inst.candidates[&c].position, &inst.radio);
            ((-s, tie_rank(inst.seed, tag, u64::from(node.0), c)), c)
        })
        .collect();
    brute_best(keyed)
}

fn oracle(inst: &Instance) -> Option<Vec<OracleCluster>> {
    let hops = floyd_warshall(inst);
    let c = &inst.candidates;
    let pos = |id: NodeId| c[&id].position;
    let near = |a: NodeId, b: NodeId, r: f64| pos(a).distance(&pos(b)) <= r;
    let electable =
        |id: NodeId| c[&id].present && c[&id].energy > 0.0 && c[&id].kind != NodeKind::Sink;
    let capable = |id: NodeId| electable(id) && c[&id].detection_power > DP_MIN;
    let hop = |a: NodeId, b: NodeId| hops[a.0 as usize][b.0 as usize];

    let targets: BTreeSet<NodeId> = c
        .values()
        .filter(|x| x.present && x.kind != NodeKind::Sink && hop(NodeId(0), x.id) != INF)
        .map(|x| x.id)
        .collect();
    let leaders: Vec<NodeId> = targets
        .iter()
        .copied()
        .filter(|&id| c[&id].kind == NodeKind::Leader && electable(id))
        .collect();
    if leaders.is_empty() {
        return None;
    }

    // Cluster coordinators, one greedy round at a time.
    let mut uncovered = targets.clone();
    let mut drafts: Vec<(NodeId, BTreeSet<NodeId>)> = Vec::new();
    let mut round = 0u64;
    while !uncovered.is_empty() {
        let keyed = leaders
            .iter()
            .copied()
            .filter(|l| !drafts.iter().any(|d| d.0 == *l))
            .filter(|&l| uncovered.iter().any(|&t| near(l, t, RANGE)))
            .map(|l| {
                (
                    (
                        -c[&l].energy,
                        hop(NodeId(0), l),
                        tie_rank(inst.seed, ElectionTag::Cluster, round, l),
                    ),
                    l,
                )
            })
            .collect();
        let Some(cc) = brute_best(keyed) else { break };
        let cover: BTreeSet<NodeId> = targets
            .iter()
            .copied()
            .filter(|&t| near(cc, t, RANGE))
            .collect();
        uncovered.retain(|t| !cover.contains(t));
        let mut cover = cover;
        cover.remove(&cc);
        drafts.push((cc, cover));
        round += 1;
    }

    // Membership by strongest signal among covering coordinators.
    let coordinators: BTreeSet<NodeId> = drafts.iter().map(|d| d.0).collect();
    let mut members: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); drafts.len()];
    for x in c.values() {
        if !x.present || x.kind == NodeKind::Sink || coordinators.contains(&x.id) {
            continue;
        }
        let covering: Vec<NodeId> = drafts
            .iter()
            .filter(|d| d.1.contains(&x.id))
            .map(|d| d.0)
            .collect();
        if let Some(cc) = strongest(inst, x.id, &covering, ElectionTag::Join) {
            let idx = drafts.iter().position(|d| d.0 == cc).unwrap();
            members[idx].insert(x.id);
        }
    }

    let mut clusters = Vec::new();
    for ((cc, _), members) in drafts.iter().zip(members) {
        let cc = *cc;
        let hc = |id: NodeId| hop(cc, id);
        let followers: Vec<NodeId> = members
            .iter()
            .copied()
            .filter(|&id| c[&id].kind == NodeKind::Follower && capable(id))
            .collect();
        let mut uncovered = members.clone();
        let mut scs: Vec<NodeId> = Vec::new();
        let mut round = 0u64;
        while !uncovered.is_empty() {
            let scope = (u64::from(cc.0) << 32) | round;
            let keyed = followers
                .iter()
                .copied()
                .filter(|f| !scs.contains(f))
                .filter(|&f| uncovered.iter().any(|&t| near(f, t, SECTOR_RADIUS)))
                .map(|f| {
                    (
                        (
                            -c[&f].energy,
                            hc(f),
                            tie_rank(inst.seed, ElectionTag::Sector, scope, f),
                        ),
                        f,
                    )
                })
                .collect();
            let Some(sc) = brute_best(keyed) else { break };
            uncovered.retain(|&t| !near(sc, t, SECTOR_RADIUS));
            scs.push(sc);
            round += 1;
        }
        let mut groups: BTreeMap<NodeId, BTreeSet<NodeId>> =
            scs.iter().map(|&s| (s, BTreeSet::from([s]))).collect();
        if !scs.is_empty() {
            for &m in &members {
                if scs.contains(&m) {
                    continue;
                }
                let covering: Vec<NodeId> = scs
                    .iter()
                    .copied()
                    .filter(|&s| near(s, m, SECTOR_RADIUS))
                    .collect();
                let pool = if covering.is_empty() {
                    scs.clone()
                } else {
                    covering
                };
                let sc = strongest(inst, m, &pool, ElectionTag::SectorJoin).unwrap();
                groups.get_mut(&sc).unwrap().insert(m);
            }
        }
        let sectors = groups
            .into_iter()
            .map(|(sc, group)| {
                let scope = u64::from(sc.0);
                let monitor = brute_best(
                    group
                        .iter()
                        .copied()
                        .filter(|&id| id != cc && c[&id].kind == NodeKind::Leader && capable(id))
                        .map(|id| {
                            (
                                (
                                    -c[&id].energy,
                                    -c[&id].detection_power,
                                    tie_rank(inst.seed, ElectionTag::Monitor, scope, id),
                                ),
                                id,
                            )
                        })
                        .collect(),
                );
                let forwarder = brute_best(
                    group
                        .iter()
                        .copied()
                        .filter(|&id| id != cc && id != sc && Some(id) != monitor && electable(id))
                        .map(|id| {
                            (
                                (
                                    hc(id),
                                    tie_rank(inst.seed, ElectionTag::Forwarder, scope, id),
                                ),
                                id,
                            )
                        })
                        .collect(),
                )
                .unwrap_or(sc);
                OracleSector {
                    coordinator: sc,
                    monitor: monitor.unwrap_or(cc),
                    fallback: monitor.is_none(),
                    forwarder,
                    members: group,
                }
            })
            .collect();
        clusters.push(OracleCluster {
            coordinator: cc,
            members,
            sectors,
        });
    }
    Some(clusters)
}

fn compare_instance(seed: u64) -> Result<usize, String> {
    let inst = instance(seed);
    let input = ElectionInput {
        candidates: &inst.candidates,
        radio: &inst.radio,
        sector_radius: SECTOR_RADIUS,
        dp_min: DP_MIN,
        seed,
    };
    let neighbors = neighbor_discovery(&inst.nodes, &inst.radio);
    let built = Hierarchy::build(Layout::Sectorized, NodeId(0), &input, &neighbors);
    let expected = oracle(&inst);
    let (h, expected) = match (built, expected) {
        (Err(_), None) => return Ok(0),
        (Ok(_), None) => {
            return Err(format!(
                "instance {seed}: oracle finds no leader, election succeeded"
            ))
        }
        (Err(e), Some(_)) => {
            return Err(format!(
                "instance {seed}: election failed ({e}), oracle succeeded"
            ))
        }
        (Ok((h, _)), Some(x)) => (h, x),
    };
    let got: Vec<_> = h.clusters().values().collect();
    check(got.len() == expected.len(), || {
        format!(
            "instance {seed}: {} clusters, oracle {}",
            got.len(),
            expected.len()
        )
    })?;
    for (g, e) in got.iter().zip(&expected) {
        check(
            g.coordinator == e.coordinator && g.members == e.members,
            || {
                format!(
                    "instance {seed}: cluster {} {:?} vs oracle {} {:?}",
                    g.coordinator, g.members, e.coordinator, e.members
                )
            },
        )?;
        let sectors: BTreeSet<OracleSector> = h
            .sectors()
            .values()
            .filter(|s| s.cluster == g.id)
            .map(|s| OracleSector {
                coordinator: s.coordinator,
                monitor: s.monitor,
                fallback: s.monitor_fallback,
                forwarder: s.forwarding_head,
                members: s.members.clone(),
            })
            .collect();
        check(sectors == e.sectors, || {
            format!(
                "instance {seed}: sectors {sectors:?} vs oracle {:?}",
                e.sectors
            )
        })?;
    }
    Ok(expected.len())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut clusters = 0;
    for seed in 0..1000u64 {
        clusters += compare_instance(seed)?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30), "election oracle")?;
    Ok(format!(
        "1000 topologies, {clusters} clusters, 0 mismatches in {elapsed:?}"
    ))
}

// ---------------------------------------------------------------------------
// 3. Conservation at every frame.

fn conservation_error(out: &RunOutput) -> f64 {
    let initial: Vec<f64> = out.nodes.iter().map(|n| n.initial_energy).collect();
    out.frames
        .iter()
        .zip(&out.audit)
        .map(|(f, a)| {
            let drained: f64 = initial
                .iter()
                .zip(&a.residual)
                .map(|(pw, re)| pw - re)
                .sum();
            let scale = f.energy_consumed.abs().max(1e-12);
            ((drained - f.energy_consumed).abs() / scale)
                .max((a.accounted - f.energy_consumed).abs() / scale)
        })
        .fold(0.0, f64::max)
}

fn criterion_3() -> Outcome {
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    for seed in SEEDS {
        let base = ScenarioConfig::with_seed(seed);
        let mut configs = vec![base.clone()];
        let mut ns = base.clone();
        ns.mode = Layout::NonSectorized;
        configs.push(ns);
        for arch in ARCHETYPE_NAMES {
            let mut c = base.clone();
            c.attackers.push(AttackerSpec::new(arch));
            configs.push(c.clone());
            c.detection.enabled = false;
            configs.push(c);
        }
        for cfg in configs {
            let out = run(&cfg).map_err(|e| e.to_string())?;
            check(out.audit.len() == out.frames.len(), || {
                "audit missing frames".into()
            })?;
            let err = conservation_error(&out);
            check(err <= 1e-9, || {
                format!("seed {seed}: relative error {err:e}")
            })?;
            worst = worst.max(err);
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, worst relative error {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 4. Each archetype is isolated end to end.

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for arch in ARCHETYPE_NAMES {
        let mut cfg = ScenarioConfig::with_seed(1);
        cfg.attackers.push(AttackerSpec::new(arch));
        let nodes = cfg.field.node_count() - 1;
        check(nodes <= 200 && cfg.horizon <= 500, || {
            "scenario too large".into()
        })?;
        let start = Instant::now();
        let out = run(&cfg).map_err(|e| e.to_string())?;
        within(start.elapsed(), Duration::from_secs(60), arch)?;
        let a = &out.attackers[0];
        let t = a
            .quarantined_at
            .ok_or_else(|| format!("{arch} at {} never quarantined", a.node))?;
        check(out.quarantine.iter().any(|q| q.node_id == a.node), || {
            format!("{arch}: {} missing from the quarantine list", a.node)
        })?;
        let leaked = out
            .deliveries
            .iter()
            .filter(|d| d.origin == a.node && d.delivered_at > t)
            .count();
        check(leaked == 0, || {
            format!("{arch}: {leaked} packets reached the sink after quarantine")
        })?;
        notes.push(format!("{arch}@{t:.0}s"));
    }
    Ok(format!("quarantined: {}", notes.join(", ")))
}

// ---------------------------------------------------------------------------
// 5-8. Figure shapes.

fn run_arms(preset: &dyn Preset, seed: u64) -> Result<Vec<RunOutput>, String> {
    preset
        .arms(seed)
        .iter()
        .map(|a| run(&a.config).map_err(|e| format!("{}: {e}", a.label)))
        .collect()
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for seed in SEEDS {
        let outs = run_arms(&AliveComparison, seed)?;
        let alive: Vec<usize> = outs.iter().map(|o| o.last_frame().alive_count).collect();
        let (clean, off, on) = (alive[0], alive[1], alive[2]);
        check(off < clean, || {
            format!("seed {seed}: detection off {off} not below attack-free {clean}")
        })?;
        check(on > off, || {
            format!("seed {seed}: detection on {on} not above detection off {off}")
        })?;
        notes.push(format!("seed {seed}: {clean}/{off}/{on}"));
    }
    Ok(format!("alive attack-free/off/on: {}", notes.join("; ")))
}

fn criterion_6() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut best_baseline: f64 = 0.0;
    for seed in SEEDS {
        let outs = run_arms(&AccuracySweep, seed)?;
        for pair in outs.chunks(2) {
            let k = pair[0].attackers.len();
            let (full, base) = (pair[0].last_frame().accuracy, pair[1].last_frame().accuracy);
            check(full >= 0.8, || {
                format!("seed {seed}, {k} attackers: accuracy {full:.3}")
            })?;
            check(full > base, || {
                format!("seed {seed}, {k} attackers: {full:.3} vs baseline {base:.3}")
            })?;
            worst = worst.min(full);
            best_baseline = best_baseline.max(base);
        }
    }
    Ok(format!(
        "min accuracy {worst:.3}, max baseline {best_baseline:.3}"
    ))
}

fn criterion_7() -> Outcome {
    let mut min_gap = f64::INFINITY;
    for seed in SEEDS {
        let outs = run_arms(&SectorizationEnergy, seed)?;
        for (pair, n) in outs.chunks(2).zip(FIG6_DENSITIES) {
            let (s, ns) = (
                pair[0].last_frame().energy_consumed,
                pair[1].last_frame().energy_consumed,
            );
            check(s <= ns, || {
                format!("seed {seed}, {n} nodes: sectorized {s:.3} J > {ns:.3} J")
            })?;
            min_gap = min_gap.min(ns - s);
        }
    }
    Ok(format!(
        "sectorized lower at every density, smallest gap {min_gap:.1} J"
    ))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let res = run_preset(&OverheadSeries, 1, dir.path(), 0).map_err(|e| e.to_string())?;
    for (arm, out) in res.arms.iter().zip(&res.outputs) {
        let rows = out.frames.len() as u64;
        check(rows == arm.config.horizon + 1, || {
            format!("{}: {rows} frames", arm.label)
        })?;
        for w in out.frames.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            check(
                b.data_packets + b.control_packets >= a.data_packets + a.control_packets,
                || format!("{}: transmissions fell at t={}", arm.label, b.time),
            )?;
            check(b.control_packets >= a.control_packets, || {
                format!("{}: control fell", arm.label)
            })?;
        }
        let csv = std::fs::read_to_string(dir.path().join(&arm.label).join(METRICS_FILE))
            .map_err(|e| e.to_string())?;
        check(
            csv.lines()
                .next()
                .is_some_and(|h| h.contains("overhead_ratio")),
            || "no overhead column".into(),
        )?;
        check(csv.lines().count() as u64 == rows + 1, || {
            "metrics.csv row count".into()
        })?;
    }
    let series =
        std::fs::read_to_string(dir.path().join(res.series.file)).map_err(|e| e.to_string())?;
    let horizon = res.arms[0].config.horizon;
    check(series.lines().count() as u64 == horizon + 2, || {
        "overhead series row count".into()
    })?;
    let last = res.outputs[0].last_frame();
    Ok(format!(
        "{} epochs, final transmissions {} data + {} control",
        horizon, last.data_packets, last.control_packets
    ))
}

// ---------------------------------------------------------------------------
// 9. Determinism.

fn tree_files(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ScenarioConfig::with_seed(42);
    cfg.attackers.push(AttackerSpec::new("wake-injector"));
    cfg.attackers.push(AttackerSpec::new("flooder"));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let first = run_scenario(&cfg, &a).map_err(|e| e.to_string())?;
    run_scenario(&cfg, &b).map_err(|e| e.to_string())?;
    let ma = std::fs::read(a.join(METRICS_FILE)).unwrap();
    check(ma == std::fs::read(b.join(METRICS_FILE)).unwrap(), || {
        "consecutive runs differ".into()
    })?;
    check(tree_files(&a) == tree_files(&b), || {
        "run outputs differ".into()
    })?;

    let c = tmp.path().join("c");
    run_scenario(&first.resolved, &c).map_err(|e| e.to_string())?;
    check(ma == std::fs::read(c.join(METRICS_FILE)).unwrap(), || {
        "resolved config re-run differs".into()
    })?;

    let mut trees = Vec::new();
    for threads in [1usize, 2, 8] {
        let d = tmp.path().join(format!("sweep-{threads}"));
        run_preset(&AccuracySweep, 7, &d, threads).map_err(|e| e.to_string())?;
        trees.push(tree_files(&d));
    }
    check(trees.windows(2).all(|w| w[0] == w[1]), || {
        "sweep output depends on thread count".into()
    })?;
    Ok(format!(
        "byte-identical across reruns and 1/2/8 threads ({} files per sweep)",
        trees[0].len()
    ))
}

// ---------------------------------------------------------------------------
// 10. Reputation bounds and budget monotonicity.

#[derive(Debug, Clone)]
enum Op {
    Penalize(f64),
    Reward(f64),
    Adjudicate(f64),
}

fn criterion_10() -> Outcome {
    let op = prop_oneof![
        (0.0f64..1.5).prop_map(Op::Penalize),
        (0.0f64..1.5).prop_map(Op::Reward),
        (0.0f64..30.0).prop_map(Op::Adjudicate),
    ];
    let strategy = (
        0.0f64..200.0,
        0.0f64..20.0,
        proptest::collection::vec(op, 1..200),
    );
    let mut runner = TestRunner::new(PropConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let thresholds = AdjudicationConfig::default().thresholds();
    let rulings = Cell::new(0u64);
    let refusals = Cell::new(0u64);
    let result = runner.run(&strategy, |(dp, dp_min, ops)| {
        let mut rec = ReputationRecord::new(NodeId(1));
        let mut budget = DetectionBudget::new(dp, dp_min);
        for o in ops {
            match o {
                Op::Penalize(p) => rec.penalize(p),
                Op::Reward(q) => rec.reward(q),
                Op::Adjudicate(cost) => {
                    let before = budget.dp();
                    let r = adjudicate(&rec, None, &thresholds, &mut budget, cost);
                    prop_assert_eq!(
                        r.is_err(),
                        before <= dp_min,
                        "ruling at dp {} with dp_min {}",
                        before,
                        dp_min
                    );
                    prop_assert!(budget.dp() <= before);
                    if r.is_ok() {
                        rulings.set(rulings.get() + 1);
                    } else {
                        refusals.set(refusals.get() + 1);
                        prop_assert_eq!(budget.dp(), before);
                    }
                }
            }
            prop_assert!((0.0..=1.0).contains(&rec.reputation));
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok(format!(
        "10000 sequences, {} rulings, {} refusals at dp <= dp_min",
        rulings.get(),
        refusals.get()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 10] = [
        ("insomnia case thresholds", criterion_1),
        ("election oracle equivalence", criterion_2),
        ("energy conservation", criterion_3),
        ("end-to-end isolation", criterion_4),
        ("alive-node comparison shape", criterion_5),
        ("accuracy sweep shape", criterion_6),
        ("sectorization energy shape", criterion_7),
        ("transmission overhead shape", criterion_8),
        ("determinism", criterion_9),
        ("reputation and budget properties", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
