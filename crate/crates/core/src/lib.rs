//! Semiclassical simulation of slow light, EIT storage, and stationary-light-pulse
//! (SLP) trapping of a single-photon waveform in a doubly-driven cold atomic
//! ensemble, together with the photon-correlation statistics of the heralded
//! pair source that feeds it.
//!
//! The crate is split along the physics:
//!
//! - [`medium`] — closed-form dark-state-polariton algebra (mixing angles, group
//!   velocity, phase matching) and the atomic-ensemble constants.
//! - [`sequence`] — drive-laser timing envelopes and the input photon waveform.
//! - [`solver`] — the coupled Maxwell-Bloch finite-difference integrator for the
//!   forward/backward probe fields and five atomic coherences on a 1-D grid.
//! - [`stats`] — two-mode-squeezed-state correlation formulas, TCSPC histogram
//!   analysis, and a Monte Carlo coincidence-event synthesizer.
//!
//! Everything here is `no_std` + `alloc`; file formats, configuration, and the
//! command-line front end live in the companion `qslp-cli` crate.

#![no_std]
// validation predicates are written `!(x > 0.0)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod math;
pub mod medium;
pub mod sequence;
pub mod solver;
pub mod stats;

pub use num_complex::Complex64;

pub use medium::{DriveAmplitudes, Geometry, MediumParams, MixingAngles, PhiConvention};
pub use sequence::{DriveSchedule, InputWaveform, Scenario, ScenarioTiming, TimingSequence};
pub use solver::{SimulationRecord, Solver, SolverConfig, SystemState};
pub use stats::{Histogram, PairSourceModel, WindowSpec};
