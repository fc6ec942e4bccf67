//! Finite-difference integrator for the coupled Maxwell-Bloch system of the
//! doubly-driven ensemble: five atomic coherences and the forward/backward
//! probe envelopes on a 1-D grid.
//!
//! The medium transit time L/c₀ (~33 ps) is far below every dynamical
//! timescale, so the 1/c₀ ∂t terms of the field equations are dropped and the
//! fields are re-solved as quasi-static spatial ODEs after each atomic step:
//!
//! 1. the atomic variables advance pointwise in z by one explicit RK4 step
//!    with the fields frozen;
//! 2. the forward field integrates from the entry boundary (input waveform)
//!    by trapezoidal quadrature, the backward field from the far boundary
//!    (zero) with the phase-mismatch term folded in semi-implicitly.
//!
//! Internally space is the dimensionless ζ = z/L, so the optical depth enters
//! the field equations directly. Fields are stored in the input waveform's
//! amplitude units; the system is linear, so only ratios matter.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::math::refine_peak;
use crate::medium::{DriveAmplitudes, MediumError, MediumParams};
use crate::sequence::{
    standard_sequence, DriveSchedule, InputWaveform, Scenario, ScenarioTiming, ScheduleEvents,
    SequenceError,
};

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Invalid {
        field: &'static str,
        constraint: &'static str,
    },
    /// Time step too large for the fastest rate in the system.
    StiffnessGuard {
        dt: f64,
        limit: f64,
    },
    /// Simulation span ends before the last scheduled switching event.
    SpanTooShort {
        t_max: f64,
        last_event: f64,
    },
    Medium(MediumError),
    Sequence(SequenceError),
    /// A non-finite value appeared; carries the step time, grid index,
    /// offending variable, and the last finite state for debugging.
    NonFinite {
        t: f64,
        z_index: usize,
        variable: &'static str,
        last_valid: Option<Box<SystemState>>,
    },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Invalid { field, constraint } => {
                write!(f, "invalid solver parameter `{field}`: requires {constraint}")
            }
            SolverError::StiffnessGuard { dt, limit } => write!(
                f,
                "time step {dt:.3e} s violates the stiffness guard dt <= {limit:.3e} s \
                 (1/10 of the fastest rate)"
            ),
            SolverError::SpanTooShort { t_max, last_event } => write!(
                f,
                "t_max = {:.3} us ends before the last scheduled event at {:.3} us",
                t_max * 1e6,
                last_event * 1e6
            ),
            SolverError::Medium(e) => write!(f, "{e}"),
            SolverError::Sequence(e) => write!(f, "{e}"),
            SolverError::NonFinite { t, z_index, variable, .. } => write!(
                f,
                "non-finite value in `{variable}` at t = {:.4} us, grid index {z_index}",
                t * 1e6
            ),
        }
    }
}

impl core::error::Error for SolverError {}

impl From<MediumError> for SolverError {
    fn from(e: MediumError) -> Self {
        SolverError::Medium(e)
    }
}

impl From<SequenceError> for SolverError {
    fn from(e: SequenceError) -> Self {
        SolverError::Sequence(e)
    }
}

/// Full solver configuration; scenario-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Spatial grid points across the medium.
    pub nz: usize,
    /// Time step, s.
    pub dt: f64,
    /// Simulation span, s.
    pub t_max: f64,
    /// Recording cadence, s (rounded to a multiple of `dt`).
    pub dt_record: f64,
    pub medium: MediumParams,
    pub drives: DriveAmplitudes,
    pub input: InputWaveform,
    pub timing: ScenarioTiming,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nz: 200,
            dt: 1e-9,
            t_max: 12e-6,
            dt_record: 10e-9,
            medium: MediumParams::default(),
            drives: DriveAmplitudes::default(),
            input: InputWaveform::default(),
            timing: ScenarioTiming::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.nz < 50 {
            return Err(SolverError::Invalid { field: "nz", constraint: "nz >= 50" });
        }
        if !(self.dt > 0.0) {
            return Err(SolverError::Invalid { field: "dt", constraint: "dt > 0" });
        }
        if !(self.t_max > 0.0) {
            return Err(SolverError::Invalid { field: "t_max", constraint: "t_max > 0" });
        }
        if !(self.dt_record >= self.dt) {
            return Err(SolverError::Invalid { field: "dt_record", constraint: "dt_record >= dt" });
        }
        self.medium.validate()?;
        self.drives.validate()?;
        self.input.validate()?;
        self.timing.validate()?;
        let fastest = self
            .medium
            .gamma
            .max(self.drives.omega_fwc)
            .max(self.drives.omega_bwc)
            .max(self.medium.two_photon_detuning.abs());
        let limit = 1.0 / (10.0 * fastest);
        if self.dt > limit {
            return Err(SolverError::StiffnessGuard { dt: self.dt, limit });
        }
        Ok(())
    }

    /// Grid spacing in meters.
    pub fn dz(&self) -> f64 {
        self.medium.length / (self.nz - 1) as f64
    }
}

/// Field envelopes and atomic coherences over the grid at one instant.
///
/// `e_plus`/`e_minus` are the forward/backward probe envelopes; `rho_eg_*`
/// the optical coherences driven by them; `rho_sg_pm`/`rho_sg_mp` the cross
/// (higher-order Raman) coherences; `rho_sg_zero` the stored spin wave.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub e_plus: Vec<Complex64>,
    pub e_minus: Vec<Complex64>,
    pub rho_eg_plus: Vec<Complex64>,
    pub rho_eg_minus: Vec<Complex64>,
    pub rho_sg_pm: Vec<Complex64>,
    pub rho_sg_mp: Vec<Complex64>,
    pub rho_sg_zero: Vec<Complex64>,
}

impl SystemState {
    pub fn zero(nz: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); nz];
        SystemState {
            t: 0.0,
            e_plus: z.clone(),
            e_minus: z.clone(),
            rho_eg_plus: z.clone(),
            rho_eg_minus: z.clone(),
            rho_sg_pm: z.clone(),
            rho_sg_mp: z.clone(),
            rho_sg_zero: z,
        }
    }

    pub fn nz(&self) -> usize {
        self.e_plus.len()
    }

    fn first_non_finite(&self) -> Option<(usize, &'static str)> {
        let arrays: [(&[Complex64], &'static str); 7] = [
            (&self.e_plus, "e_plus"),
            (&self.e_minus, "e_minus"),
            (&self.rho_eg_plus, "rho_eg_plus"),
            (&self.rho_eg_minus, "rho_eg_minus"),
            (&self.rho_sg_pm, "rho_sg_pm"),
            (&self.rho_sg_mp, "rho_sg_mp"),
            (&self.rho_sg_zero, "rho_sg_zero"),
        ];
        for (arr, name) in arrays {
            for (j, v) in arr.iter().enumerate() {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Some((j, name));
                }
            }
        }
        None
    }
}

/// Field and coherence energy diagnostics:
/// photonic `Σ (|E⁺|²+|E⁻|²) dz`, spin `Σ |ρ⁰|² dz`, and higher-order
/// coherence `Σ (|ρ⁺⁻|²+|ρ⁻⁺|²) dz`.
pub fn energies(state: &SystemState, dz: f64) -> (f64, f64, f64) {
    let mut photonic = 0.0;
    let mut spin = 0.0;
    let mut higher = 0.0;
    for j in 0..state.nz() {
        photonic += state.e_plus[j].norm_sqr() + state.e_minus[j].norm_sqr();
        spin += state.rho_sg_zero[j].norm_sqr();
        higher += state.rho_sg_pm[j].norm_sqr() + state.rho_sg_mp[j].norm_sqr();
    }
    (photonic * dz, spin * dz, higher * dz)
}

/// Time series of boundary outputs and internal energies for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub scenario: Scenario,
    pub nz: usize,
    pub dt: f64,
    pub dt_record: f64,
    /// Grid spacing, m.
    pub dz: f64,
    pub events: ScheduleEvents,
    pub times: Vec<f64>,
    /// Forward output E⁺(L, t).
    pub e_plus_out: Vec<Complex64>,
    /// Backward output E⁻(0, t).
    pub e_minus_out: Vec<Complex64>,
    pub photonic_energy: Vec<f64>,
    pub spin_energy: Vec<f64>,
    pub higher_coherence_energy: Vec<f64>,
}

impl SimulationRecord {
    /// Recorded sample spacing, s.
    pub fn sample_dt(&self) -> f64 {
        self.dt_record
    }

    /// ∫ |E⁺(L,t)|² dt over `t0 <= t < t1`.
    pub fn forward_energy_between(&self, t0: f64, t1: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.e_plus_out)
            .filter(|(&t, _)| t >= t0 && t < t1)
            .map(|(_, e)| e.norm_sqr() * self.dt_record)
            .sum()
    }

    /// ∫ |E⁻(0,t)|² dt over the whole record.
    pub fn backward_energy(&self) -> f64 {
        self.e_minus_out.iter().map(|e| e.norm_sqr() * self.dt_record).sum()
    }

    /// Parabola-refined arrival time and height of the |E⁺(L,t)|² peak
    /// within `t0 <= t < t1`.
    pub fn forward_peak_between(&self, t0: f64, t1: f64) -> Option<(f64, f64)> {
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for (&t, e) in self.times.iter().zip(&self.e_plus_out) {
            if t >= t0 && t < t1 {
                ts.push(t);
                ys.push(e.norm_sqr());
            }
        }
        refine_peak(&ts, &ys)
    }

    /// Largest |E⁺(L,t)|² sample within `t0 <= t < t1`.
    pub fn max_forward_intensity_between(&self, t0: f64, t1: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.e_plus_out)
            .filter(|(&t, _)| t >= t0 && t < t1)
            .map(|(_, e)| e.norm_sqr())
            .fold(0.0, f64::max)
    }
}

/// One scheduled scenario bound to a configuration, ready to step.
pub struct Solver {
    cfg: SolverConfig,
    schedule: DriveSchedule,
    scenario: Scenario,
    // precomputed coefficients
    kappa: f64,
    dzeta: f64,
    gamma_half: f64,
    decay_minus: Complex64,
    decay_pm: Complex64,
    decay_mp: Complex64,
    gamma_gs: f64,
}

impl Solver {
    pub fn new(cfg: &SolverConfig, scenario: Scenario) -> Result<Self, SolverError> {
        cfg.validate()?;
        let schedule = standard_sequence(scenario, &cfg.input, &cfg.timing)?;
        if let Some(last) = schedule.events.last_event() {
            if cfg.t_max < last {
                return Err(SolverError::SpanTooShort { t_max: cfg.t_max, last_event: last });
            }
        }
        let m = &cfg.medium;
        let delta = m.two_photon_detuning;
        Ok(Solver {
            kappa: m.optical_depth * m.gamma / 2.0,
            dzeta: 1.0 / (cfg.nz - 1) as f64,
            gamma_half: m.gamma / 2.0,
            decay_minus: Complex64::new(m.gamma / 2.0, -delta),
            decay_pm: Complex64::new(m.gamma_gs_prime, -delta),
            decay_mp: Complex64::new(m.gamma_gs_prime, delta),
            gamma_gs: m.gamma_gs,
            cfg: cfg.clone(),
            schedule,
            scenario,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn schedule(&self) -> &DriveSchedule {
        &self.schedule
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn initial_state(&self) -> SystemState {
        SystemState::zero(self.cfg.nz)
    }

    fn drives_at(&self, t: f64) -> (f64, f64) {
        (
            self.cfg.drives.omega_fwc * self.schedule.fwc.envelope(t),
            self.cfg.drives.omega_bwc * self.schedule.bwc.envelope(t),
        )
    }

    /// Advances the state by one `dt`: RK4 on the atomic variables with the
    /// fields frozen, then quasi-static field sweeps at the new time.
    pub fn step(&self, state: &mut SystemState) -> Result<(), SolverError> {
        let dt = self.cfg.dt;
        let t = state.t;
        let nz = self.cfg.nz;

        let d0 = self.drives_at(t);
        let dh = self.drives_at(t + 0.5 * dt);
        let d1 = self.drives_at(t + dt);

        let deriv = |y: &[Complex64; 5], ep: Complex64, em: Complex64, q: (f64, f64)| {
            let (qf, qb) = q;
            let half_i = Complex64::new(0.0, 0.5);
            [
                half_i * (ep + y[4] * qf + y[3] * qb) - self.gamma_half * y[0],
                half_i * (em + y[4] * qb + y[2] * qf) - self.decay_minus * y[1],
                half_i * qf * y[1] - self.decay_pm * y[2],
                half_i * qb * y[0] - self.decay_mp * y[3],
                half_i * (qf * y[0] + qb * y[1]) - self.gamma_gs * y[4],
            ]
        };

        for j in 0..nz {
            let ep = state.e_plus[j];
            let em = state.e_minus[j];
            let y = [
                state.rho_eg_plus[j],
                state.rho_eg_minus[j],
                state.rho_sg_pm[j],
                state.rho_sg_mp[j],
                state.rho_sg_zero[j],
            ];
            let k1 = deriv(&y, ep, em, d0);
            let mut y2 = y;
            for i in 0..5 {
                y2[i] = y[i] + 0.5 * dt * k1[i];
            }
            let k2 = deriv(&y2, ep, em, dh);
            for i in 0..5 {
                y2[i] = y[i] + 0.5 * dt * k2[i];
            }
            let k3 = deriv(&y2, ep, em, dh);
            for i in 0..5 {
                y2[i] = y[i] + dt * k3[i];
            }
            let k4 = deriv(&y2, ep, em, d1);
            let mut out = y;
            for i in 0..5 {
                out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            state.rho_eg_plus[j] = out[0];
            state.rho_eg_minus[j] = out[1];
            state.rho_sg_pm[j] = out[2];
            state.rho_sg_mp[j] = out[3];
            state.rho_sg_zero[j] = out[4];
        }

        // forward sweep: dE⁺/dζ = i κ ρ⁺, boundary at the entry face
        let half_step = Complex64::new(0.0, 0.5 * self.kappa * self.dzeta);
        state.e_plus[0] = Complex64::new(self.cfg.input.amplitude(t + dt), 0.0);
        for j in 0..nz - 1 {
            state.e_plus[j + 1] =
                state.e_plus[j] + half_step * (state.rho_eg_plus[j] + state.rho_eg_plus[j + 1]);
        }

        // backward sweep: dE⁻/dζ = i Δk L E⁻ − i κ ρ⁻, zero boundary at the far
        // face, phase-mismatch term trapezoidal-implicit
        let fac = Complex64::new(0.0, 0.5 * self.cfg.medium.delta_k * self.cfg.medium.length * self.dzeta);
        let denom = Complex64::new(1.0, 0.0) + fac;
        let numer = Complex64::new(1.0, 0.0) - fac;
        state.e_minus[nz - 1] = Complex64::new(0.0, 0.0);
        for j in (0..nz - 1).rev() {
            state.e_minus[j] = (state.e_minus[j + 1] * numer
                + half_step * (state.rho_eg_minus[j] + state.rho_eg_minus[j + 1]))
                / denom;
        }

        state.t = t + dt;

        if let Some((z_index, variable)) = state.first_non_finite() {
            return Err(SolverError::NonFinite {
                t: state.t,
                z_index,
                variable,
                last_valid: None,
            });
        }
        Ok(())
    }

    /// Runs the scenario from the zero state to `t_max`, recording every
    /// `dt_record`. Deterministic for a fixed configuration.
    pub fn run(cfg: &SolverConfig, scenario: Scenario) -> Result<SimulationRecord, SolverError> {
        let solver = Solver::new(cfg, scenario)?;
        let record_every = ((cfg.dt_record / cfg.dt).round() as usize).max(1);
        let n_steps = (cfg.t_max / cfg.dt).round() as usize;
        let n_records = n_steps / record_every + 1;
        let dz = cfg.dz();

        let mut rec = SimulationRecord {
            scenario,
            nz: cfg.nz,
            dt: cfg.dt,
            dt_record: cfg.dt * record_every as f64,
            dz,
            events: solver.schedule.events,
            times: Vec::with_capacity(n_records),
            e_plus_out: Vec::with_capacity(n_records),
            e_minus_out: Vec::with_capacity(n_records),
            photonic_energy: Vec::with_capacity(n_records),
            spin_energy: Vec::with_capacity(n_records),
            higher_coherence_energy: Vec::with_capacity(n_records),
        };

        let mut state = solver.initial_state();
        let mut last_valid = state.clone();
        for n in 0..=n_steps {
            if n % record_every == 0 {
                let (ph, sp, hc) = energies(&state, dz);
                rec.times.push(state.t);
                rec.e_plus_out.push(state.e_plus[cfg.nz - 1]);
                rec.e_minus_out.push(state.e_minus[0]);
                rec.photonic_energy.push(ph);
                rec.spin_energy.push(sp);
                rec.higher_coherence_energy.push(hc);
            }
            if n == n_steps {
                break;
            }
            last_valid.clone_from(&state);
            if let Err(e) = solver.step(&mut state) {
                return Err(match e {
                    SolverError::NonFinite { t, z_index, variable, .. } => SolverError::NonFinite {
                        t,
                        z_index,
                        variable,
                        last_valid: Some(Box::new(last_valid)),
                    },
                    other => other,
                });
            }
        }
        Ok(rec)
    }
}

/// Relative-change report between a run at (dt, dz) and one at (dt/2, dz/2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub coarse_energy: f64,
    pub fine_energy: f64,
    pub rel_energy_change: f64,
    pub coarse_peak_time: f64,
    pub fine_peak_time: f64,
    pub peak_time_shift: f64,
    pub energy_threshold: f64,
    pub peak_time_threshold: f64,
}

impl ConvergenceReport {
    pub fn energy_converged(&self) -> bool {
        self.rel_energy_change < self.energy_threshold
    }

    pub fn peak_time_converged(&self) -> bool {
        self.peak_time_shift.abs() < self.peak_time_threshold
    }

    pub fn converged(&self) -> bool {
        self.energy_converged() && self.peak_time_converged()
    }
}

/// Default acceptance thresholds for grid self-convergence.
pub const ENERGY_CONVERGENCE_THRESHOLD: f64 = 1e-2;
pub const PEAK_TIME_CONVERGENCE_THRESHOLD: f64 = 20e-9;

/// Runs the scenario at (dt, dz) and (dt/2, dz/2) and reports the relative
/// change in total released forward energy and in the output peak time.
pub fn convergence_check(
    cfg: &SolverConfig,
    scenario: Scenario,
) -> Result<ConvergenceReport, SolverError> {
    let coarse = Solver::run(cfg, scenario)?;
    let mut fine_cfg = cfg.clone();
    fine_cfg.nz = 2 * cfg.nz - 1;
    fine_cfg.dt = cfg.dt / 2.0;
    let fine = Solver::run(&fine_cfg, scenario)?;

    let e0 = coarse.forward_energy_between(0.0, cfg.t_max * 2.0);
    let e1 = fine.forward_energy_between(0.0, cfg.t_max * 2.0);
    let rel = if e0.max(e1) > 0.0 { (e1 - e0).abs() / e0.max(e1) } else { 0.0 };
    let p0 = coarse.forward_peak_between(0.0, cfg.t_max * 2.0).map(|(t, _)| t).unwrap_or(0.0);
    let p1 = fine.forward_peak_between(0.0, cfg.t_max * 2.0).map(|(t, _)| t).unwrap_or(0.0);
    Ok(ConvergenceReport {
        coarse_energy: e0,
        fine_energy: e1,
        rel_energy_change: rel,
        coarse_peak_time: p0,
        fine_peak_time: p1,
        peak_time_shift: p1 - p0,
        energy_threshold: ENERGY_CONVERGENCE_THRESHOLD,
        peak_time_threshold: PEAK_TIME_CONVERGENCE_THRESHOLD,
    })
}
