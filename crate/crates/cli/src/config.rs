//! Configuration: a line-based `key = value` format with `[section]` headers,
//! resolved against the built-in operating-point defaults.
//!
//! Rates are written with their unit in the key name (`*_2pi_mhz` means the
//! stored value is 2π × value × 10⁶ rad/s), which keeps factor-of-2π mistakes
//! out of config files. The same dotted `section.key` names are accepted by
//! `--set` overrides and as sweep parameters.

use std::f64::consts::TAU;
use std::str::FromStr;

use qslp_core::medium::{Geometry, PhiConvention};
use qslp_core::sequence::Scenario;
use qslp_core::solver::SolverConfig;
use qslp_core::stats::{windows, PairSourceModel};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: unknown section `{section}`")]
    UnknownSection { section: String, line: usize },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { text: String, line: usize },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String, line: usize },
    #[error("{0}")]
    Invariant(String),
}

/// Portion of the configuration describing analysis settings.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSettings {
    /// Histogram bin width, s.
    pub bin_width: f64,
    /// Histogram span, s.
    pub span: f64,
}

impl Default for StatsSettings {
    fn default() -> Self {
        StatsSettings { bin_width: windows::DEFAULT_BIN_WIDTH, span: 100e-6 }
    }
}

/// Portion of the configuration describing event-stream generation.
#[derive(Debug, Clone, PartialEq)]
pub struct EventsSettings {
    pub n_repetitions: u64,
    /// Coincidence window of the conditional correlation estimator, s.
    pub coincidence_window: f64,
}

impl Default for EventsSettings {
    fn default() -> Self {
        EventsSettings { n_repetitions: 200_000, coincidence_window: 3.5e-6 }
    }
}

/// One- or two-parameter sweep grid; values are applied through the same
/// dotted keys as `--set`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<String>,
    pub parameter_b: Option<String>,
    pub values_b: Vec<String>,
}

/// Fully resolved application configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub solver: SolverConfig,
    pub scenario: Scenario,
    pub phi_convention: PhiConvention,
    pub geometry: Geometry,
    pub source: PairSourceModel,
    pub stats: StatsSettings,
    pub events: EventsSettings,
    pub sweep: Option<SweepSpec>,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            solver: SolverConfig::default(),
            scenario: Scenario::EitPlusQslp,
            phi_convention: PhiConvention::default(),
            geometry: Geometry::default(),
            source: PairSourceModel::default(),
            stats: StatsSettings::default(),
            events: EventsSettings::default(),
            sweep: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
        line,
    })
}

/// Decimal string for `value / unit` chosen so that re-parsing it and
/// multiplying by `unit` reproduces `value` bit-exactly; a rerun from an
/// echoed header is then byte-identical to the original run.
fn unit_repr(value: f64, unit: f64) -> String {
    let q = value / unit;
    let mut candidates = [q, q, q, q, q];
    candidates[1] = q.next_up();
    candidates[2] = q.next_down();
    candidates[3] = candidates[1].next_up();
    candidates[4] = candidates[2].next_down();
    for c in candidates {
        if c * unit == value {
            return format!("{c}");
        }
    }
    format!("{q}")
}

impl AppConfig {
    /// Applies one dotted `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let v = value.trim();
        let bad = |reason: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: v.to_string(),
            reason: reason.to_string(),
            line,
        };
        match key {
            "medium.od" => self.solver.medium.optical_depth = parse_num(key, v, line)?,
            "medium.gamma_2pi_mhz" => {
                self.solver.medium.gamma = TAU * 1e6 * parse_num::<f64>(key, v, line)?
            }
            "medium.gamma_gs_2pi_khz" => {
                self.solver.medium.gamma_gs = TAU * 1e3 * parse_num::<f64>(key, v, line)?
            }
            "medium.gamma_gs_prime_2pi_khz" => {
                self.solver.medium.gamma_gs_prime = TAU * 1e3 * parse_num::<f64>(key, v, line)?
            }
            "medium.length_mm" => {
                self.solver.medium.length = 1e-3 * parse_num::<f64>(key, v, line)?
            }
            "medium.delta_2pi_mhz" => {
                self.solver.medium.two_photon_detuning = TAU * 1e6 * parse_num::<f64>(key, v, line)?
            }
            "medium.delta_k_per_m" => {
                self.solver.medium.delta_k = parse_num(key, v, line)?
            }
            "medium.light_speed_m_per_s" => {
                self.solver.medium.light_speed = parse_num(key, v, line)?
            }
            "drives.omega_fwc_2pi_mhz" => {
                self.solver.drives.omega_fwc = TAU * 1e6 * parse_num::<f64>(key, v, line)?
            }
            "drives.omega_bwc_2pi_mhz" => {
                self.solver.drives.omega_bwc = TAU * 1e6 * parse_num::<f64>(key, v, line)?
            }
            "drives.g2n_2pi_mhz_sq" => {
                self.solver.drives.coupling_g2n = if v == "none" {
                    None
                } else {
                    let sq = TAU * 1e6;
                    Some(sq * sq * parse_num::<f64>(key, v, line)?)
                }
            }
            "drives.phi_convention" => {
                self.phi_convention = match v {
                    "amplitude_ratio" => PhiConvention::AmplitudeRatio,
                    "intensity_ratio" => PhiConvention::IntensityRatio,
                    _ => return Err(bad("expected amplitude_ratio or intensity_ratio")),
                }
            }
            "grid.nz" => self.solver.nz = parse_num(key, v, line)?,
            "grid.dt_ns" => self.solver.dt = 1e-9 * parse_num::<f64>(key, v, line)?,
            "grid.t_max_us" => self.solver.t_max = 1e-6 * parse_num::<f64>(key, v, line)?,
            "grid.dt_record_ns" => {
                self.solver.dt_record = 1e-9 * parse_num::<f64>(key, v, line)?
            }
            "input.center_us" => {
                self.solver.input.center = 1e-6 * parse_num::<f64>(key, v, line)?
            }
            "input.fwhm_us" => self.solver.input.fwhm = 1e-6 * parse_num::<f64>(key, v, line)?,
            "input.scale" => self.solver.input.scale = parse_num(key, v, line)?,
            "sequence.scenario" => {
                self.scenario = Scenario::from_str(v).map_err(|e| bad(&e.to_string()))?
            }
            "sequence.ramp_ns" => {
                self.solver.timing.ramp_time = 1e-9 * parse_num::<f64>(key, v, line)?
            }
            "sequence.storage_us" => {
                self.solver.timing.storage_duration = 1e-6 * parse_num::<f64>(key, v, line)?
            }
            "sequence.hold_us" => {
                self.solver.timing.hold_duration = 1e-6 * parse_num::<f64>(key, v, line)?
            }
            "sequence.entry_threshold" => {
                self.solver.timing.entry_threshold = parse_num(key, v, line)?
            }
            "sequence.period_us" => {
                self.solver.timing.period = 1e-6 * parse_num::<f64>(key, v, line)?
            }
            "source.eta" => self.source.eta = parse_num(key, v, line)?,
            "source.herald_efficiency" => {
                self.source.herald_efficiency = parse_num(key, v, line)?
            }
            "source.signal_efficiency" => {
                self.source.signal_efficiency = parse_num(key, v, line)?
            }
            "source.noise_floor" => self.source.noise_floor = parse_num(key, v, line)?,
            "source.repetition_period_us" => {
                self.source.repetition_period = 1e-6 * parse_num::<f64>(key, v, line)?
            }
            "source.jitter_ns" => self.source.jitter = 1e-9 * parse_num::<f64>(key, v, line)?,
            "events.n_repetitions" => self.events.n_repetitions = parse_num(key, v, line)?,
            "events.coincidence_window_us" => {
                self.events.coincidence_window = 1e-6 * parse_num::<f64>(key, v, line)?
            }
            "stats.bin_ns" => self.stats.bin_width = 1e-9 * parse_num::<f64>(key, v, line)?,
            "stats.span_us" => self.stats.span = 1e-6 * parse_num::<f64>(key, v, line)?,
            "geometry.angle_deg" => {
                self.geometry.angle = parse_num::<f64>(key, v, line)?.to_radians()
            }
            "geometry.wavelength_nm" => {
                self.geometry.wavelength = 1e-9 * parse_num::<f64>(key, v, line)?
            }
            "sweep.parameter" => {
                self.sweep.get_or_insert_with(SweepSpec::default).parameter = v.to_string()
            }
            "sweep.values" => {
                self.sweep.get_or_insert_with(SweepSpec::default).values =
                    v.split(',').map(|s| s.trim().to_string()).collect()
            }
            "sweep.parameter_b" => {
                self.sweep.get_or_insert_with(SweepSpec::default).parameter_b =
                    Some(v.to_string())
            }
            "sweep.values_b" => {
                self.sweep.get_or_insert_with(SweepSpec::default).values_b =
                    v.split(',').map(|s| s.trim().to_string()).collect()
            }
            _ => {
                return Err(ConfigError::UnknownKey { key: key.to_string(), line });
            }
        }
        Ok(())
    }

    /// Runs every domain validator; errors name the offending field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.solver
            .validate()
            .map_err(|e| ConfigError::Invariant(e.to_string()))?;
        self.geometry
            .validate()
            .map_err(|e| ConfigError::Invariant(e.to_string()))?;
        self.source
            .validate()
            .map_err(|e| ConfigError::Invariant(e.to_string()))?;
        if !(self.stats.bin_width > 0.0) {
            return Err(ConfigError::Invariant(
                "invalid statistics parameter `stats.bin_ns`: requires bin > 0".into(),
            ));
        }
        if !(self.stats.span > self.stats.bin_width) {
            return Err(ConfigError::Invariant(
                "invalid statistics parameter `stats.span_us`: requires span > bin".into(),
            ));
        }
        if self.events.n_repetitions == 0 {
            return Err(ConfigError::Invariant(
                "invalid parameter `events.n_repetitions`: requires >= 1".into(),
            ));
        }
        if !(self.events.coincidence_window > 0.0) {
            return Err(ConfigError::Invariant(
                "invalid parameter `events.coincidence_window_us`: requires > 0".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.parameter.is_empty() || sweep.values.is_empty() {
                return Err(ConfigError::Invariant(
                    "sweep requires `sweep.parameter` and `sweep.values`".into(),
                ));
            }
            if sweep.parameter_b.is_some() != !sweep.values_b.is_empty() {
                return Err(ConfigError::Invariant(
                    "sweep.parameter_b and sweep.values_b must be given together".into(),
                ));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` listing of the fully resolved configuration,
    /// defaults included. Stable ordering; used for the metadata block of
    /// every emitted file.
    pub fn echo(&self) -> Vec<(String, String)> {
        let m = &self.solver.medium;
        let d = &self.solver.drives;
        let t = &self.solver.timing;
        let s = &self.source;
        let mhz = TAU * 1e6;
        let khz = TAU * 1e3;
        let deg = std::f64::consts::PI / 180.0;
        let mut out: Vec<(String, String)> = vec![
            ("medium.od".into(), format!("{}", m.optical_depth)),
            ("medium.gamma_2pi_mhz".into(), unit_repr(m.gamma, mhz)),
            ("medium.gamma_gs_2pi_khz".into(), unit_repr(m.gamma_gs, khz)),
            ("medium.gamma_gs_prime_2pi_khz".into(), unit_repr(m.gamma_gs_prime, khz)),
            ("medium.length_mm".into(), unit_repr(m.length, 1e-3)),
            ("medium.delta_2pi_mhz".into(), unit_repr(m.two_photon_detuning, mhz)),
            ("medium.delta_k_per_m".into(), format!("{}", m.delta_k)),
            ("medium.light_speed_m_per_s".into(), format!("{}", m.light_speed)),
            ("drives.omega_fwc_2pi_mhz".into(), unit_repr(d.omega_fwc, mhz)),
            ("drives.omega_bwc_2pi_mhz".into(), unit_repr(d.omega_bwc, mhz)),
            (
                "drives.g2n_2pi_mhz_sq".into(),
                match d.coupling_g2n {
                    Some(g) => unit_repr(g, mhz * mhz),
                    None => "none".into(),
                },
            ),
            (
                "drives.phi_convention".into(),
                match self.phi_convention {
                    PhiConvention::AmplitudeRatio => "amplitude_ratio".into(),
                    PhiConvention::IntensityRatio => "intensity_ratio".into(),
                },
            ),
            ("grid.nz".into(), format!("{}", self.solver.nz)),
            ("grid.dt_ns".into(), unit_repr(self.solver.dt, 1e-9)),
            ("grid.t_max_us".into(), unit_repr(self.solver.t_max, 1e-6)),
            ("grid.dt_record_ns".into(), unit_repr(self.solver.dt_record, 1e-9)),
            ("input.center_us".into(), unit_repr(self.solver.input.center, 1e-6)),
            ("input.fwhm_us".into(), unit_repr(self.solver.input.fwhm, 1e-6)),
            ("input.scale".into(), format!("{}", self.solver.input.scale)),
            ("sequence.scenario".into(), self.scenario.name().into()),
            ("sequence.ramp_ns".into(), unit_repr(t.ramp_time, 1e-9)),
            ("sequence.storage_us".into(), unit_repr(t.storage_duration, 1e-6)),
            ("sequence.hold_us".into(), unit_repr(t.hold_duration, 1e-6)),
            ("sequence.entry_threshold".into(), format!("{}", t.entry_threshold)),
            ("sequence.period_us".into(), unit_repr(t.period, 1e-6)),
            ("source.eta".into(), format!("{}", s.eta)),
            ("source.herald_efficiency".into(), format!("{}", s.herald_efficiency)),
            ("source.signal_efficiency".into(), format!("{}", s.signal_efficiency)),
            ("source.noise_floor".into(), format!("{}", s.noise_floor)),
            ("source.repetition_period_us".into(), unit_repr(s.repetition_period, 1e-6)),
            ("source.jitter_ns".into(), unit_repr(s.jitter, 1e-9)),
            ("events.n_repetitions".into(), format!("{}", self.events.n_repetitions)),
            (
                "events.coincidence_window_us".into(),
                unit_repr(self.events.coincidence_window, 1e-6),
            ),
            ("stats.bin_ns".into(), unit_repr(self.stats.bin_width, 1e-9)),
            ("stats.span_us".into(), unit_repr(self.stats.span, 1e-6)),
            ("geometry.angle_deg".into(), unit_repr(self.geometry.angle, deg)),
            ("geometry.wavelength_nm".into(), unit_repr(self.geometry.wavelength, 1e-9)),
        ];
        if let Some(sweep) = &self.sweep {
            out.push(("sweep.parameter".into(), sweep.parameter.clone()));
            out.push(("sweep.values".into(), sweep.values.join(",")));
            if let Some(p) = &sweep.parameter_b {
                out.push(("sweep.parameter_b".into(), p.clone()));
                out.push(("sweep.values_b".into(), sweep.values_b.join(",")));
            }
        }
        out
    }
}

/// Parses the config file text over the defaults. Lines are `key = value`
/// within `[section]` headers; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<AppConfig, ConfigError> {
    let mut cfg = AppConfig::default();
    let mut section = String::new();

    const SECTIONS: [&str; 9] = [
        "medium", "drives", "grid", "input", "sequence", "source", "events", "stats",
        "geometry",
    ];

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) && name != "sweep" {
                return Err(ConfigError::UnknownSection {
                    section: name.to_string(),
                    line: line_no,
                });
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed { text: line.to_string(), line: line_no });
        };
        let key = key.trim();
        let dotted = if key.contains('.') || section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        cfg.set(&dotted, value, line_no)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
