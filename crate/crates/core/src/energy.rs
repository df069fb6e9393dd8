//! Per-node energy accounting over operating modes.
//!
//! Every joule leaving a ledger is attributed to exactly one [`Mode`], so
//! `initial - residual == Σ power(mode) * duration(mode)` holds for the whole
//! life of the ledger, including the final partial accrual that kills a node.

use std::collections::VecDeque;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Sleep,
    Transmit,
    Idle,
    Wakeup,
    Compute,
    Sensing,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Sleep,
        Mode::Transmit,
        Mode::Idle,
        Mode::Wakeup,
        Mode::Compute,
        Mode::Sensing,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyProfile {
    /// Watts.
    pub pw_sleep: f64,
    pub pw_transmit: f64,
    pub pw_idle: f64,
    pub pw_wakeup: f64,
    pub pw_compute: f64,
    pub pw_sensing: f64,
}

impl Default for EnergyProfile {
    fn default() -> Self {
        EnergyProfile {
            pw_sleep: 0.001,
            pw_transmit: 0.06,
            pw_idle: 0.01,
            pw_wakeup: 0.02,
            pw_compute: 0.008,
            pw_sensing: 0.005,
        }
    }
}

impl EnergyProfile {
    pub fn power(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Sleep => self.pw_sleep,
            Mode::Transmit => self.pw_transmit,
            Mode::Idle => self.pw_idle,
            Mode::Wakeup => self.pw_wakeup,
            Mode::Compute => self.pw_compute,
            Mode::Sensing => self.pw_sensing,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("energy.pw_sleep", self.pw_sleep),
            ("energy.pw_transmit", self.pw_transmit),
            ("energy.pw_idle", self.pw_idle),
            ("energy.pw_wakeup", self.pw_wakeup),
            ("energy.pw_compute", self.pw_compute),
            ("energy.pw_sensing", self.pw_sensing),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(ConfigError::invalid(name, "power must be >= 0"));
            }
        }
        if !(self.pw_sleep < self.pw_idle && self.pw_idle < self.pw_transmit) {
            return Err(ConfigError::invalid(
                "energy.pw_sleep",
                "expected pw_sleep < pw_idle < pw_transmit",
            ));
        }
        Ok(())
    }

    /// Dot product of mode powers with mode durations.
    pub fn energy_for(&self, times: &ModeDurations) -> f64 {
        Mode::ALL.iter().map(|&m| self.power(m) * times[m]).sum()
    }
}

/// Seconds spent per mode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeDurations([f64; 6]);

impl ModeDurations {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Index<Mode> for ModeDurations {
    type Output = f64;
    fn index(&self, mode: Mode) -> &f64 {
        &self.0[mode.index()]
    }
}

impl IndexMut<Mode> for ModeDurations {
    fn index_mut(&mut self, mode: Mode) -> &mut f64 {
        &mut self.0[mode.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accrual {
    Applied,
    /// This accrual exhausted the battery; only the powered part was booked.
    Died,
    /// The ledger was already empty.
    DeadNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    initial: f64,
    residual: f64,
    last_recorded: f64,
    durations: ModeDurations,
    standard_lifetime: f64,
}

impl EnergyLedger {
    pub fn new(initial: f64, standard_lifetime: f64) -> Self {
        EnergyLedger {
            initial,
            residual: initial,
            last_recorded: initial,
            durations: ModeDurations::default(),
            standard_lifetime,
        }
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn last_recorded(&self) -> f64 {
        self.last_recorded
    }

    pub fn durations(&self) -> &ModeDurations {
        &self.durations
    }

    pub fn standard_lifetime(&self) -> f64 {
        self.standard_lifetime
    }

    pub fn is_dead(&self) -> bool {
        self.residual <= 0.0
    }

    pub fn consumed(&self) -> f64 {
        self.initial - self.residual
    }

    /// Consumption recomputed from accumulated mode durations. Independent of
    /// the residual bookkeeping; the two must agree.
    pub fn accounted_consumption(&self, profile: &EnergyProfile) -> f64 {
        profile.energy_for(&self.durations)
    }

    /// Closes a detection epoch: the current residual becomes the last
    /// recorded energy.
    pub fn mark_epoch(&mut self) {
        self.last_recorded = self.residual;
    }

    pub fn accrue(&mut self, mode: Mode, duration: f64, profile: &EnergyProfile) -> Accrual {
        debug_assert!(duration >= 0.0, "negative duration {duration}");
        if self.is_dead() {
            return Accrual::DeadNode;
        }
        let power = profile.power(mode);
        let cost = power * duration;
        if cost < self.residual {
            self.residual -= cost;
            self.durations[mode] += duration;
            Accrual::Applied
        } else {
            self.durations[mode] += self.residual / power;
            self.residual = 0.0;
            Accrual::Died
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DutyCycle {
    /// Seconds awake per epoch.
    pub wake: f64,
    /// Seconds asleep per epoch.
    pub sleep: f64,
    pub epoch_length: f64,
}

impl Default for DutyCycle {
    fn default() -> Self {
        DutyCycle {
            wake: 1.0,
            sleep: 9.0,
            epoch_length: 10.0,
        }
    }
}

impl DutyCycle {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.epoch_length.is_nan() || self.epoch_length <= 0.0 {
            return Err(ConfigError::invalid("duty.epoch_length", "must be > 0"));
        }
        if !(self.wake >= 0.0 && self.sleep >= 0.0) {
            return Err(ConfigError::invalid("duty.wake", "durations must be >= 0"));
        }
        if self.wake + self.sleep > self.epoch_length + 1e-12 {
            return Err(ConfigError::invalid(
                "duty.sleep",
                "wake + sleep must not exceed epoch_length",
            ));
        }
        Ok(())
    }

    pub fn idle(&self) -> f64 {
        (self.epoch_length - self.wake - self.sleep).max(0.0)
    }
}

/// Per-epoch activity of a node on top of its duty cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpochActivity {
    pub transmit: f64,
    pub sensing: f64,
    pub compute: f64,
    /// Extra awake time beyond the duty cycle's wake window (listening for
    /// slots, or wake-ups forced by foreign traffic).
    pub extra_awake: f64,
}

impl EpochActivity {
    pub fn busy(&self) -> f64 {
        self.transmit + self.sensing + self.compute
    }
}

/// Splits one epoch into exclusive mode durations.
///
/// Busy time lives inside the awake window; the awake window grows to fit the
/// busy time and any extra awake time, eating sleep first and idle second.
pub fn epoch_mode_times(duty: &DutyCycle, activity: &EpochActivity) -> ModeDurations {
    let mut t = ModeDurations::default();
    let awake = (duty.wake + activity.extra_awake)
        .max(activity.busy())
        .min(duty.epoch_length);
    let overflow = awake - duty.wake;
    let (sleep, idle) = if overflow <= 0.0 {
        (duty.sleep, duty.idle())
    } else if overflow <= duty.sleep {
        (duty.sleep - overflow, duty.idle())
    } else {
        (0.0, (duty.idle() - (overflow - duty.sleep)).max(0.0))
    };
    let busy = activity.busy().min(awake);
    t[Mode::Sleep] = sleep;
    t[Mode::Idle] = idle;
    t[Mode::Transmit] = activity.transmit.min(busy);
    t[Mode::Sensing] = activity.sensing.min(busy - t[Mode::Transmit]);
    t[Mode::Compute] = activity
        .compute
        .min(busy - t[Mode::Transmit] - t[Mode::Sensing]);
    t[Mode::Wakeup] = awake - busy;
    t
}

/// Nominal per-packet costs used to derive the normal consumption of a leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficLoad {
    pub packets_per_epoch: f64,
    pub transmit_time: f64,
    pub sensing_time: f64,
    pub compute_time: f64,
}

impl TrafficLoad {
    pub fn activity(&self) -> EpochActivity {
        EpochActivity {
            transmit: self.packets_per_epoch * self.transmit_time,
            sensing: self.packets_per_epoch * self.sensing_time,
            compute: self.packets_per_epoch * self.compute_time,
            extra_awake: 0.0,
        }
    }
}

/// NEC: joules per epoch for a node following `duty` and sending `traffic`.
pub fn normal_energy_consumption(
    profile: &EnergyProfile,
    duty: &DutyCycle,
    traffic: &TrafficLoad,
) -> f64 {
    profile.energy_for(&epoch_mode_times(duty, &traffic.activity()))
}

/// TNEC: NEC widened by a tolerance band.
pub fn threshold_normal_consumption(nec: f64, tolerance: f64) -> f64 {
    nec * (1.0 + tolerance)
}

/// CRLT in epochs; `f64::INFINITY` when nothing was consumed over the window.
pub fn calculated_remaining_lifetime(residual: f64, observed_rate: f64) -> f64 {
    if observed_rate <= 0.0 {
        f64::INFINITY
    } else {
        residual / observed_rate
    }
}

/// Trailing mean of per-epoch consumption.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumptionWindow {
    capacity: usize,
    samples: VecDeque<f64>,
}

impl ConsumptionWindow {
    pub fn new(capacity: usize) -> Self {
        ConsumptionWindow {
            capacity: capacity.max(1),
            samples: VecDeque::new(),
        }
    }

    pub fn push(&mut self, joules: f64) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(joules);
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.samples.iter().sum::<f64>() / self.samples.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_profile() -> EnergyProfile {
        EnergyProfile {
            pw_sleep: 0.0,
            pw_transmit: 1.0,
            pw_idle: 0.0,
            pw_wakeup: 0.0,
            pw_compute: 0.0,
            pw_sensing: 0.0,
        }
    }

    #[test]
    fn linear_drain() {
        let mut l = EnergyLedger::new(10.0, 0.0);
        assert_eq!(
            l.accrue(Mode::Transmit, 2.0, &unit_profile()),
            Accrual::Applied
        );
        assert_eq!(l.residual(), 8.0);
        assert_eq!(l.durations()[Mode::Transmit], 2.0);
    }

    #[test]
    fn floor_at_zero_books_only_powered_time() {
        let mut l = EnergyLedger::new(0.5, 0.0);
        assert_eq!(
            l.accrue(Mode::Transmit, 1.0, &unit_profile()),
            Accrual::Died
        );
        assert_eq!(l.residual(), 0.0);
        assert!(l.is_dead());
        assert_eq!(l.durations()[Mode::Transmit], 0.5);
        assert_eq!(
            l.accrue(Mode::Transmit, 1.0, &unit_profile()),
            Accrual::DeadNode
        );
        assert_eq!(l.accounted_consumption(&unit_profile()), l.consumed());
    }

    #[test]
    fn zero_power_accrual_is_free() {
        let mut l = EnergyLedger::new(1.0, 0.0);
        l.accrue(Mode::Sleep, 100.0, &unit_profile());
        assert_eq!(l.residual(), 1.0);
    }

    #[test]
    fn nec_examples() {
        let zero = EnergyProfile {
            pw_transmit: 0.0,
            ..unit_profile()
        };
        let duty = DutyCycle::default();
        let load = TrafficLoad {
            packets_per_epoch: 1.0,
            transmit_time: 1.0,
            sensing_time: 0.0,
            compute_time: 0.0,
        };
        assert_eq!(normal_energy_consumption(&zero, &duty, &load), 0.0);

        let p = EnergyProfile {
            pw_sleep: 0.01,
            ..unit_profile()
        };
        let nec = normal_energy_consumption(&p, &duty, &load);
        assert!((nec - 1.09).abs() < 1e-12, "{nec}");
        assert_eq!(threshold_normal_consumption(nec, 0.0), nec);
        assert!((threshold_normal_consumption(nec, 0.2) - 1.308).abs() < 1e-12);
    }

    #[test]
    fn crlt_examples() {
        assert_eq!(calculated_remaining_lifetime(10.0, 1.0), 10.0);
        assert!(calculated_remaining_lifetime(10.0, 0.0).is_infinite());
    }

    #[test]
    fn crlt_falls_under_constant_drain() {
        let p = EnergyProfile::default();
        let mut l = EnergyLedger::new(5.0, 0.0);
        let mut window = ConsumptionWindow::new(5);
        let mut last = f64::INFINITY;
        for _ in 0..20 {
            let before = l.residual();
            l.accrue(Mode::Wakeup, 10.0, &p);
            window.push(before - l.residual());
            let crlt = calculated_remaining_lifetime(l.residual(), window.mean());
            assert!(crlt < last);
            last = crlt;
        }
    }

    #[test]
    fn epoch_split_fills_the_epoch() {
        let duty = DutyCycle::default();
        let t = epoch_mode_times(&duty, &EpochActivity::default());
        assert_eq!(t[Mode::Sleep], 9.0);
        assert_eq!(t[Mode::Wakeup], 1.0);
        assert_eq!(t.total(), 10.0);

        let forced = EpochActivity {
            extra_awake: 9.0,
            ..EpochActivity::default()
        };
        let t = epoch_mode_times(&duty, &forced);
        assert_eq!(t[Mode::Sleep], 0.0);
        assert_eq!(t[Mode::Wakeup], 10.0);
    }

    #[test]
    fn profile_ordering_checked() {
        let bad = EnergyProfile {
            pw_sleep: 0.5,
            ..EnergyProfile::default()
        };
        assert!(bad.validate().is_err());
        let neg = EnergyProfile {
            pw_compute: -1.0,
            ..EnergyProfile::default()
        };
        assert!(neg.validate().is_err());
        assert!(EnergyProfile::default().validate().is_ok());
    }

    proptest::proptest! {
        #[test]
        fn conservation_and_monotone_residual(
            ops in proptest::collection::vec((0usize..6, 0.0f64..5.0), 1..200),
            initial in 0.1f64..50.0,
        ) {
            let p = EnergyProfile::default();
            let mut l = EnergyLedger::new(initial, 0.0);
            let mut independent = 0.0;
            let mut prev = l.residual();
            for (m, d) in ops {
                let mode = Mode::ALL[m];
                let before = l.residual();
                l.accrue(mode, d, &p);
                independent += before - l.residual();
                proptest::prop_assert!(l.residual() <= prev);
                proptest::prop_assert!(l.residual() >= 0.0 && l.residual() <= l.initial());
                prev = l.residual();
            }
            let accounted = l.accounted_consumption(&p);
            let tol = 1e-9 * l.consumed().max(1e-12);
            proptest::prop_assert!((accounted - l.consumed()).abs() <= tol);
            proptest::prop_assert!((independent - l.consumed()).abs() <= tol);
        }

        #[test]
        fn epoch_split_is_exclusive(extra in 0.0f64..20.0, tx in 0.0f64..3.0) {
            let duty = DutyCycle::default();
            let a = EpochActivity { transmit: tx, sensing: 0.1, compute: 0.05, extra_awake: extra };
            let t = epoch_mode_times(&duty, &a);
            proptest::prop_assert!((t.total() - duty.epoch_length).abs() < 1e-9);
            for m in Mode::ALL {
                proptest::prop_assert!(t[m] >= 0.0);
            }
        }
    }
}
