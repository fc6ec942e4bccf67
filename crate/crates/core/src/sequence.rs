//! Time-dependent drive envelopes and the input single-photon waveform.
//!
//! A [`TimingSequence`] is a set of on-intervals within one repetition window
//! with raised-cosine switching edges; [`standard_sequence`] builds the
//! schedules for the three canonical scenarios (slow light, EIT memory, and
//! EIT memory followed by an SLP hold).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::math::normal_quantile;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceError {
    Invalid {
        field: &'static str,
        constraint: &'static str,
    },
    UnknownScenario(String),
    /// The repetition window cannot hold the requested storage + hold phases.
    PeriodTooShort {
        needed: f64,
        period: f64,
    },
}

impl fmt::Display for SequenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceError::Invalid { field, constraint } => {
                write!(f, "invalid sequence parameter `{field}`: requires {constraint}")
            }
            SequenceError::UnknownScenario(name) => write!(
                f,
                "unknown scenario `{name}` (expected slow_light, eit_memory, or eit_plus_qslp)"
            ),
            SequenceError::PeriodTooShort { needed, period } => write!(
                f,
                "sequence needs {:.3} us but the repetition period is {:.3} us",
                needed * 1e6,
                period * 1e6
            ),
        }
    }
}

impl core::error::Error for SequenceError {}

/// Drive channel identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Fwc,
    Bwc,
}

/// On-intervals of one drive channel within a repetition window.
///
/// Edges strictly inside the window switch with a raised-cosine ramp centered
/// on the edge; edges at 0 or at the period are hard (the drive is treated as
/// continuous across repetitions there).
#[derive(Debug, Clone, PartialEq)]
pub struct TimingSequence {
    channel: Channel,
    intervals: Vec<(f64, f64)>,
    ramp_time: f64,
    period: f64,
}

impl TimingSequence {
    pub fn new(
        channel: Channel,
        intervals: Vec<(f64, f64)>,
        ramp_time: f64,
        period: f64,
    ) -> Result<Self, SequenceError> {
        if !(period > 0.0) {
            return Err(SequenceError::Invalid { field: "period", constraint: "period > 0" });
        }
        if !(ramp_time >= 0.0) {
            return Err(SequenceError::Invalid { field: "ramp_time", constraint: "ramp_time >= 0" });
        }
        let mut prev_end = f64::NEG_INFINITY;
        for &(a, b) in &intervals {
            if !(0.0 <= a && a < b && b <= period) {
                return Err(SequenceError::Invalid {
                    field: "intervals",
                    constraint: "0 <= t_on < t_off <= period, sorted",
                });
            }
            if a < prev_end + ramp_time {
                return Err(SequenceError::Invalid {
                    field: "intervals",
                    constraint: "disjoint with gaps of at least ramp_time",
                });
            }
            if ramp_time >= 0.5 * (b - a) {
                return Err(SequenceError::Invalid {
                    field: "ramp_time",
                    constraint: "ramp_time < half the shortest interval",
                });
            }
            prev_end = b;
        }
        Ok(TimingSequence { channel, intervals, ramp_time, period })
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Dimensionless envelope in [0, 1]; `t` is reduced modulo the period.
    pub fn envelope(&self, t: f64) -> f64 {
        let mut tm = t % self.period;
        if tm < 0.0 {
            tm += self.period;
        }
        let r = self.ramp_time;
        let mut value = 0.0;
        for &(a, b) in &self.intervals {
            let rise = if a == 0.0 || r == 0.0 {
                if tm >= a { 1.0 } else { 0.0 }
            } else if tm <= a - r / 2.0 {
                0.0
            } else if tm >= a + r / 2.0 {
                1.0
            } else {
                0.5 * (1.0 - (core::f64::consts::PI * (tm - (a - r / 2.0)) / r).cos())
            };
            let fall = if b == self.period || r == 0.0 {
                if tm <= b { 1.0 } else { 0.0 }
            } else if tm >= b + r / 2.0 {
                0.0
            } else if tm <= b - r / 2.0 {
                1.0
            } else {
                0.5 * (1.0 + (core::f64::consts::PI * (tm - (b - r / 2.0)) / r).cos())
            };
            value += rise * fall;
        }
        value
    }
}

/// Gaussian input photon waveform, normalized to unit pulse energy at
/// `scale = 1`: `∫ |amplitude(t)|² dt = scale²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputWaveform {
    /// Peak time, s.
    pub center: f64,
    /// Full width at half maximum of the intensity profile, s.
    pub fwhm: f64,
    /// Overall amplitude factor. The propagation is linear, so this only
    /// rescales outputs; it exists to probe that linearity.
    pub scale: f64,
}

impl Default for InputWaveform {
    fn default() -> Self {
        InputWaveform { center: 1.2e-6, fwhm: 0.57e-6, scale: 1.0 }
    }
}

impl InputWaveform {
    pub fn validate(&self) -> Result<(), SequenceError> {
        if !(self.fwhm > 0.0) {
            return Err(SequenceError::Invalid { field: "fwhm", constraint: "fwhm > 0" });
        }
        if !(self.scale > 0.0) {
            return Err(SequenceError::Invalid { field: "scale", constraint: "scale > 0" });
        }
        Ok(())
    }

    /// Standard deviation of the intensity profile.
    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * core::f64::consts::LN_2).sqrt())
    }

    /// Real field amplitude at time `t`, units 1/√s.
    pub fn amplitude(&self, t: f64) -> f64 {
        let s = self.sigma();
        let norm = self.scale * (core::f64::consts::TAU * s * s).powf(-0.25);
        let dt = t - self.center;
        norm * (-dt * dt / (4.0 * s * s)).exp()
    }

    /// Intensity |amplitude|², units 1/s.
    pub fn intensity(&self, t: f64) -> f64 {
        let a = self.amplitude(t);
        a * a
    }

    /// Fraction of the pulse energy that has crossed the entry face by `t`.
    pub fn energy_entered(&self, t: f64) -> f64 {
        let s = self.sigma();
        0.5 * libm::erfc(-(t - self.center) / (s * core::f64::consts::SQRT_2))
    }

    /// Time by which the given fraction of the pulse energy has entered.
    pub fn entry_time(&self, fraction: f64) -> f64 {
        self.center + self.sigma() * normal_quantile(fraction)
    }

    /// Inverse-CDF draw from the intensity profile; `u` in (0, 1).
    pub fn sample_time(&self, u: f64) -> f64 {
        self.center + self.sigma() * normal_quantile(u)
    }
}

/// Named end-to-end drive scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Forward coupling always on; plain slow-light transmission.
    SlowLight,
    /// Forward coupling gated off for the storage phase, then back on.
    EitMemory,
    /// EIT memory followed by a both-beams-on stationary hold after release.
    EitPlusQslp,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SlowLight => "slow_light",
            Scenario::EitMemory => "eit_memory",
            Scenario::EitPlusQslp => "eit_plus_qslp",
        }
    }
}

impl core::str::FromStr for Scenario {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slow_light" => Ok(Scenario::SlowLight),
            "eit_memory" => Ok(Scenario::EitMemory),
            "eit_plus_qslp" => Ok(Scenario::EitPlusQslp),
            other => Err(SequenceError::UnknownScenario(String::from(other))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Durations and thresholds that position the scenario phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTiming {
    /// Raised-cosine switching time of every interior edge, s.
    pub ramp_time: f64,
    /// Length of the coupling-off storage phase, s.
    pub storage_duration: f64,
    /// Length of the both-beams-on stationary hold, s.
    pub hold_duration: f64,
    /// Fraction of input pulse energy that must have entered before storage.
    pub entry_threshold: f64,
    /// Repetition window, s.
    pub period: f64,
}

impl Default for ScenarioTiming {
    fn default() -> Self {
        ScenarioTiming {
            ramp_time: 50e-9,
            storage_duration: 2e-6,
            hold_duration: 1e-6,
            entry_threshold: 0.99,
            period: 12e-6,
        }
    }
}

impl ScenarioTiming {
    pub fn validate(&self) -> Result<(), SequenceError> {
        if !(self.period > 0.0) {
            return Err(SequenceError::Invalid { field: "period", constraint: "period > 0" });
        }
        if !(self.ramp_time >= 0.0) {
            return Err(SequenceError::Invalid { field: "ramp_time", constraint: "ramp_time >= 0" });
        }
        if !(self.storage_duration > 0.0) {
            return Err(SequenceError::Invalid {
                field: "storage_duration",
                constraint: "storage_duration > 0",
            });
        }
        if !(self.hold_duration > 0.0) {
            return Err(SequenceError::Invalid {
                field: "hold_duration",
                constraint: "hold_duration > 0",
            });
        }
        if !(self.entry_threshold > 0.0 && self.entry_threshold < 1.0) {
            return Err(SequenceError::Invalid {
                field: "entry_threshold",
                constraint: "0 < entry_threshold < 1",
            });
        }
        Ok(())
    }
}

/// Derived switching instants of a scheduled scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScheduleEvents {
    /// Forward-coupling switch-off time (start of storage), if any.
    pub storage_time: Option<f64>,
    /// Forward-coupling re-on time (retrieval), if any.
    pub release_time: Option<f64>,
    /// Both-beams-on stationary hold interval, if any.
    pub hold: Option<(f64, f64)>,
}

impl ScheduleEvents {
    /// Last switching edge strictly inside the window; the simulation span
    /// must cover it.
    pub fn last_event(&self) -> Option<f64> {
        let release = self.release_time;
        let hold_end = self.hold.map(|(_, e)| e);
        match (release, hold_end) {
            (Some(r), Some(h)) => Some(if h > r { h } else { r }),
            (Some(r), None) => Some(r),
            (None, h) => h,
        }
    }
}

/// Drive envelopes for both channels plus the derived event times.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSchedule {
    pub fwc: TimingSequence,
    pub bwc: TimingSequence,
    pub events: ScheduleEvents,
}

/// Builds the drive schedule for a named scenario.
///
/// The storage instant is the time at which `entry_threshold` of the input
/// pulse energy has entered the medium; the hold starts at the retrieval
/// edge and lasts `hold_duration`.
pub fn standard_sequence(
    scenario: Scenario,
    input: &InputWaveform,
    timing: &ScenarioTiming,
) -> Result<DriveSchedule, SequenceError> {
    input.validate()?;
    timing.validate()?;
    let period = timing.period;
    let ramp = timing.ramp_time;

    let full = TimingSequence::new(Channel::Fwc, vec![(0.0, period)], ramp, period)?;
    let bwc_off = TimingSequence::new(Channel::Bwc, vec![], ramp, period)?;

    match scenario {
        Scenario::SlowLight => Ok(DriveSchedule {
            fwc: full,
            bwc: bwc_off,
            events: ScheduleEvents::default(),
        }),
        Scenario::EitMemory | Scenario::EitPlusQslp => {
            let t_store = input.entry_time(timing.entry_threshold);
            let t_release = t_store + timing.storage_duration;
            let needed = match scenario {
                Scenario::EitPlusQslp => t_release + timing.hold_duration + ramp,
                _ => t_release + ramp,
            };
            if !(t_store > ramp) || needed >= period {
                return Err(SequenceError::PeriodTooShort { needed, period });
            }
            let fwc = TimingSequence::new(
                Channel::Fwc,
                vec![(0.0, t_store), (t_release, period)],
                ramp,
                period,
            )?;
            let (bwc, hold) = match scenario {
                Scenario::EitPlusQslp => {
                    let hold = (t_release, t_release + timing.hold_duration);
                    (TimingSequence::new(Channel::Bwc, vec![hold], ramp, period)?, Some(hold))
                }
                _ => (bwc_off, None),
            };
            Ok(DriveSchedule {
                fwc,
                bwc,
                events: ScheduleEvents {
                    storage_time: Some(t_store),
                    release_time: Some(t_release),
                    hold,
                },
            })
        }
    }
}
