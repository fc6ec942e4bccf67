//! Photon-pair correlation statistics: closed-form two-mode squeezed-state
//! results, TCSPC-style delay histograms with DC-offset subtraction, windowed
//! efficiency extraction, and a Monte Carlo coincidence-event synthesizer.
//!
//! The pair source emits `n` photon pairs per repetition with the geometric
//! law `p(n) = (1-η) ηⁿ`. Herald detections sit at the repetition offset (the
//! heralding photon is detected essentially at pair creation); the partner
//! detection delay is drawn from the waveform intensity profile, so the delay
//! histogram reproduces the measured waveform and the first-peak/far-peak
//! ratio estimates the cross-correlation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

#[allow(unused_imports)]
use num_traits::Float;

use crate::sequence::InputWaveform;
use crate::solver::SimulationRecord;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    Invalid {
        field: &'static str,
        constraint: &'static str,
    },
    /// Ratio denominators vanished or went negative after offset subtraction.
    DegenerateStatistics(&'static str),
    EmptyHeralds,
    /// No bins (or no samples) fall inside the requested window.
    EmptyWindow,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::Invalid { field, constraint } => {
                write!(f, "invalid statistics parameter `{field}`: requires {constraint}")
            }
            StatsError::DegenerateStatistics(what) => {
                write!(f, "degenerate statistics: {what}")
            }
            StatsError::EmptyHeralds => write!(f, "herald list is empty"),
            StatsError::EmptyWindow => write!(f, "window covers no bins or samples"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Half-open analysis window `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub t_start: f64,
    pub t_end: f64,
}

impl WindowSpec {
    pub fn new(t_start: f64, t_end: f64) -> Result<Self, StatsError> {
        if !(t_end > t_start) {
            return Err(StatsError::Invalid { field: "window", constraint: "t_end > t_start" });
        }
        Ok(WindowSpec { t_start, t_end })
    }

    pub fn width(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Named analysis windows used by the trace and histogram pipelines.
pub mod windows {
    use super::WindowSpec;

    /// Default histogram bin width, s. Also the reference bin for the pair
    /// source's `noise_floor` (counts per bin per herald).
    pub const DEFAULT_BIN_WIDTH: f64 = 20e-9;

    /// Repetitions skipped before taking the uncorrelated reference peak.
    pub const REFERENCE_PERIODS: u32 = 8;

    /// First coincidence peak of the delay histogram.
    pub fn first_peak() -> WindowSpec {
        WindowSpec { t_start: 0.0, t_end: 3.5e-6 }
    }

    /// Release window of the storage-and-retrieval trace.
    pub fn eit_release() -> WindowSpec {
        WindowSpec { t_start: 3.3e-6, t_end: 7.0e-6 }
    }

    /// Release window of the storage-plus-hold trace.
    pub fn qslp_release() -> WindowSpec {
        WindowSpec { t_start: 4.3e-6, t_end: 8.0e-6 }
    }

    /// Reference peak far enough out that repetitions are uncorrelated;
    /// same width as [`first_peak`].
    pub fn reference_peak(period: f64) -> WindowSpec {
        let start = REFERENCE_PERIODS as f64 * period;
        WindowSpec { t_start: start, t_end: start + 3.5e-6 }
    }
}

/// Two-mode-squeezed pair source with detection efficiencies and a flat
/// background.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSourceModel {
    /// Squeezing parameter of the geometric photon-number law, in [0, 1).
    pub eta: f64,
    pub herald_efficiency: f64,
    pub signal_efficiency: f64,
    /// Flat background level in counts per bin per herald, referred to
    /// [`windows::DEFAULT_BIN_WIDTH`].
    pub noise_floor: f64,
    /// Repetition period, s.
    pub repetition_period: f64,
    /// Gaussian detector jitter (standard deviation), s. Zero disables it.
    pub jitter: f64,
    /// Intensity profile from which detection delays are drawn.
    pub waveform: InputWaveform,
}

impl Default for PairSourceModel {
    fn default() -> Self {
        PairSourceModel {
            eta: 0.0988,
            herald_efficiency: 1.0,
            signal_efficiency: 1.0,
            noise_floor: 0.0,
            repetition_period: 12e-6,
            jitter: 0.0,
            waveform: InputWaveform::default(),
        }
    }
}

impl PairSourceModel {
    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.eta >= 0.0 && self.eta < 1.0) {
            return Err(StatsError::Invalid { field: "eta", constraint: "0 <= eta < 1" });
        }
        for (field, v) in [
            ("herald_efficiency", self.herald_efficiency),
            ("signal_efficiency", self.signal_efficiency),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(StatsError::Invalid { field, constraint: "in [0, 1]" });
            }
        }
        if !(self.noise_floor >= 0.0) {
            return Err(StatsError::Invalid { field: "noise_floor", constraint: ">= 0" });
        }
        if !(self.repetition_period > 0.0) {
            return Err(StatsError::Invalid { field: "repetition_period", constraint: "> 0" });
        }
        if !(self.jitter >= 0.0) {
            return Err(StatsError::Invalid { field: "jitter", constraint: ">= 0" });
        }
        self.waveform.validate().map_err(|_| StatsError::Invalid {
            field: "waveform",
            constraint: "fwhm > 0",
        })
    }
}

/// Cross-correlation of the two-mode squeezed state, `1 + 1/η`.
pub fn g2_cross(eta: f64) -> Result<f64, StatsError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(StatsError::Invalid { field: "eta", constraint: "0 < eta < 1" });
    }
    Ok(1.0 + 1.0 / eta)
}

/// Inversion of [`g2_cross`]: `η = 1 / (g² − 1)`.
pub fn eta_from_g2(g2: f64) -> Result<f64, StatsError> {
    if !(g2 > 1.0) {
        return Err(StatsError::Invalid { field: "g2", constraint: "g2 > 1" });
    }
    Ok(1.0 / (g2 - 1.0))
}

/// Heralded beam-splitter self-correlation, `2η(η+2)/(η+1)²`.
///
/// Vanishes in the single-photon limit and approaches 2 from below.
pub fn g2_conditional(eta: f64) -> f64 {
    assert!(eta >= 0.0, "g2_conditional requires eta >= 0");
    2.0 * eta * (eta + 2.0) / ((eta + 1.0) * (eta + 1.0))
}

/// Exponential decay time implied by a survival `efficiency` over
/// `hold_duration`: `-hold / ln(efficiency)`.
pub fn decay_time(efficiency: f64, hold_duration: f64) -> Result<f64, StatsError> {
    if !(efficiency > 0.0 && efficiency < 1.0) {
        return Err(StatsError::Invalid { field: "efficiency", constraint: "0 < efficiency < 1" });
    }
    if !(hold_duration > 0.0) {
        return Err(StatsError::Invalid { field: "hold_duration", constraint: "> 0" });
    }
    Ok(-hold_duration / efficiency.ln())
}

/// Herald-normalized delay histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    /// Coincidences per bin divided by the herald count.
    pub counts: Vec<f64>,
    /// Number of heralds used for normalization.
    pub heralds: u64,
}

impl Histogram {
    /// Start time of bin `j`.
    pub fn bin_start(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.bin_width
    }

    /// Indices of bins lying fully inside the window.
    fn bins_inside(&self, win: &WindowSpec) -> impl Iterator<Item = usize> + '_ {
        let bw = self.bin_width;
        let origin = self.origin;
        let start = win.t_start;
        let end = win.t_end;
        (0..self.counts.len()).filter(move |&j| {
            let a = origin + j as f64 * bw;
            a >= start && a + bw <= end
        })
    }
}

/// Histograms `signal − herald` delays over `[0, span)` in bins of
/// `bin_width`, normalized by the number of heralds.
pub fn build_histogram(
    herald_times: &[f64],
    signal_times: &[f64],
    bin_width: f64,
    span: f64,
) -> Result<Histogram, StatsError> {
    if herald_times.is_empty() {
        return Err(StatsError::EmptyHeralds);
    }
    if !(bin_width > 0.0) {
        return Err(StatsError::Invalid { field: "bin_width", constraint: "> 0" });
    }
    if !(span > bin_width) {
        return Err(StatsError::Invalid { field: "span", constraint: "span > bin_width" });
    }
    let n_bins = (span / bin_width).ceil() as usize;
    let mut raw = vec![0u64; n_bins];

    let mut signals: Vec<f64> = signal_times.to_vec();
    signals.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    for &th in herald_times {
        let start = signals.partition_point(|&s| s < th);
        for &s in &signals[start..] {
            let delay = s - th;
            if delay >= span {
                break;
            }
            let j = ((delay / bin_width) as usize).min(n_bins - 1);
            raw[j] += 1;
        }
    }
    let heralds = herald_times.len() as u64;
    let counts = raw.iter().map(|&c| c as f64 / heralds as f64).collect();
    Ok(Histogram { bin_width, origin: 0.0, counts, heralds })
}

/// Mean count per bin over the plateau windows; the flat background level.
pub fn dc_offset(h: &Histogram, plateaus: &[WindowSpec]) -> Result<f64, StatsError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for win in plateaus {
        for j in h.bins_inside(win) {
            sum += h.counts[j];
            n += 1;
        }
    }
    if n == 0 {
        return Err(StatsError::EmptyWindow);
    }
    Ok(sum / n as f64)
}

/// Cross-correlation estimate from a delay histogram: the offset-subtracted
/// first-peak sum divided by the reference-peak sum over an equal window.
/// `offset = 0` gives the raw-data variant.
pub fn g2_from_histogram(
    h: &Histogram,
    first_peak: &WindowSpec,
    reference_peak: &WindowSpec,
    offset: f64,
) -> Result<f64, StatsError> {
    if (first_peak.width() - reference_peak.width()).abs() > 0.5 * h.bin_width {
        return Err(StatsError::Invalid {
            field: "reference_peak",
            constraint: "same width as the first-peak window",
        });
    }
    let sum_win = |win: &WindowSpec| -> Result<f64, StatsError> {
        let mut s = 0.0;
        let mut n = 0usize;
        for j in h.bins_inside(win) {
            s += h.counts[j] - offset;
            n += 1;
        }
        if n == 0 {
            return Err(StatsError::EmptyWindow);
        }
        Ok(s)
    };
    let first = sum_win(first_peak)?;
    let reference = sum_win(reference_peak)?;
    if reference <= 0.0 {
        return Err(StatsError::DegenerateStatistics(
            "reference-peak sum is not positive after offset subtraction",
        ));
    }
    Ok(first / reference)
}

/// Anything with an offset-subtracted integral over a time window.
pub trait TimeTrace {
    /// For histograms the offset is counts per bin; for simulation records it
    /// is an intensity level subtracted from |E⁺(L,t)|².
    fn windowed_integral(&self, win: &WindowSpec, offset: f64) -> Result<f64, StatsError>;
}

impl TimeTrace for Histogram {
    fn windowed_integral(&self, win: &WindowSpec, offset: f64) -> Result<f64, StatsError> {
        let mut s = 0.0;
        let mut n = 0usize;
        for j in self.bins_inside(win) {
            s += self.counts[j] - offset;
            n += 1;
        }
        if n == 0 {
            return Err(StatsError::EmptyWindow);
        }
        Ok(s)
    }
}

impl TimeTrace for SimulationRecord {
    fn windowed_integral(&self, win: &WindowSpec, offset: f64) -> Result<f64, StatsError> {
        let mut s = 0.0;
        let mut n = 0usize;
        for (&t, e) in self.times.iter().zip(&self.e_plus_out) {
            if t >= win.t_start && t < win.t_end {
                s += (e.norm_sqr() - offset) * self.dt_record;
                n += 1;
            }
        }
        if n == 0 {
            return Err(StatsError::EmptyWindow);
        }
        Ok(s)
    }
}

/// Ratio of two offset-subtracted windowed integrals.
pub fn window_efficiency<A: TimeTrace + ?Sized, B: TimeTrace + ?Sized>(
    trace_a: &A,
    win_a: &WindowSpec,
    trace_b: &B,
    win_b: &WindowSpec,
    offset: f64,
) -> Result<f64, StatsError> {
    let num = trace_a.windowed_integral(win_a, offset)?;
    let den = trace_b.windowed_integral(win_b, offset)?;
    if den <= 0.0 {
        return Err(StatsError::DegenerateStatistics("reference integral is not positive"));
    }
    Ok(num / den)
}

/// Uniform (0,1) doubles from a counter-based deterministic stream.
struct UniformSource(ChaCha12Rng);

impl UniformSource {
    fn new(seed: u64) -> Self {
        UniformSource(ChaCha12Rng::seed_from_u64(seed))
    }

    fn next(&mut self) -> f64 {
        // 53 mantissa bits, shifted into the open interval
        (((self.0.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9007199254740992.0)
    }
}

/// Sample from `p(n) = (1-η) ηⁿ`.
fn geometric(u: f64, eta: f64) -> u64 {
    if eta == 0.0 {
        return 0;
    }
    (u.ln() / eta.ln()) as u64
}

/// Knuth Poisson sampler; exact for the small means used here.
fn poisson(src: &mut UniformSource, mean: f64) -> u64 {
    let limit = (-mean).exp();
    let mut k = 0u64;
    let mut p = 1.0;
    loop {
        p *= src.next();
        if p <= limit {
            return k;
        }
        k += 1;
    }
}

/// Synthesizes herald/signal detection-time streams for `n_repetitions`
/// windows of the pair source. Fully deterministic for a fixed seed: the
/// draw order per repetition is pair count, then per pair herald survival,
/// signal survival, signal delay, then the background count and its
/// timestamps. Jitter blurs come from a stream derived from the same seed,
/// so enabling jitter moves timestamps without reshuffling which events
/// exist.
pub fn monte_carlo_events(
    model: &PairSourceModel,
    n_repetitions: u64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), StatsError> {
    model.validate()?;
    if n_repetitions == 0 {
        return Err(StatsError::Invalid { field: "n_repetitions", constraint: ">= 1" });
    }
    let mut src = UniformSource::new(seed);
    let mut jitter_src = UniformSource::new(seed ^ 0x6a69_7474);
    let mut blur = |t: f64| {
        if model.jitter > 0.0 {
            t + model.jitter * crate::math::normal_quantile(jitter_src.next())
        } else {
            t
        }
    };
    let mut heralds = Vec::new();
    let mut signals = Vec::new();
    let noise_mean =
        model.noise_floor / windows::DEFAULT_BIN_WIDTH * model.repetition_period;

    for rep in 0..n_repetitions {
        let offset = rep as f64 * model.repetition_period;
        let n = if model.eta > 0.0 { geometric(src.next(), model.eta) } else { 0 };
        for _ in 0..n {
            if src.next() < model.herald_efficiency {
                heralds.push(blur(offset));
            }
            if src.next() < model.signal_efficiency {
                let t = offset + model.waveform.sample_time(src.next());
                signals.push(blur(t));
            }
        }
        if noise_mean > 0.0 {
            let k = poisson(&mut src, noise_mean);
            for _ in 0..k {
                signals.push(offset + src.next() * model.repetition_period);
            }
        }
    }
    Ok((heralds, signals))
}

/// Heralded beam-splitter self-correlation estimator.
///
/// Each signal event is routed to one of two arms with probability 1/2
/// (deterministic per `splitter_seed`, in the given event order). For every
/// herald, arm counts are taken over `[t_h, t_h + coincidence_window)` and
/// accumulated into `N_h · N_h12 / (N_h1 · N_h2)`.
pub fn g2_conditional_from_events(
    herald_times: &[f64],
    signal_times: &[f64],
    splitter_seed: u64,
    coincidence_window: f64,
) -> Result<f64, StatsError> {
    if herald_times.is_empty() {
        return Err(StatsError::EmptyHeralds);
    }
    if signal_times.is_empty() {
        return Err(StatsError::DegenerateStatistics("signal stream is empty"));
    }
    if !(coincidence_window > 0.0) {
        return Err(StatsError::Invalid { field: "coincidence_window", constraint: "> 0" });
    }

    let mut src = UniformSource::new(splitter_seed);
    let mut routed: Vec<(f64, bool)> =
        signal_times.iter().map(|&t| (t, src.next() < 0.5)).collect();
    routed.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut n_h = 0u64;
    let mut n_1 = 0u64;
    let mut n_2 = 0u64;
    let mut n_12 = 0u64;
    for &th in herald_times {
        let start = routed.partition_point(|&(t, _)| t < th);
        let mut c1 = 0u64;
        let mut c2 = 0u64;
        for &(t, arm1) in &routed[start..] {
            if t - th >= coincidence_window {
                break;
            }
            if arm1 {
                c1 += 1;
            } else {
                c2 += 1;
            }
        }
        n_h += 1;
        n_1 += c1;
        n_2 += c2;
        n_12 += c1 * c2;
    }
    if n_1 == 0 || n_2 == 0 {
        return Err(StatsError::DegenerateStatistics("zero heralded singles in one arm"));
    }
    Ok(n_h as f64 * n_12 as f64 / (n_1 as f64 * n_2 as f64))
}
