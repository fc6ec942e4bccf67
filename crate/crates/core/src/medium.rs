//! Atomic-ensemble constants and the closed-form dark-state-polariton algebra:
//! mixing angles, group velocity, component weights, and phase matching.
//!
//! All rates and Rabi frequencies are angular frequencies in rad/s; a value
//! quoted as "2π × 6.0 MHz" is stored as `TAU * 6.0e6`.

use core::f64::consts::TAU;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// Speed of light in vacuum, m/s.
pub const LIGHT_SPEED: f64 = 299_792_458.0;

/// Natural linewidth of the ⁸⁷Rb D1 line, rad/s.
pub const GAMMA_RB87_D1: f64 = TAU * 5.746e6;

#[derive(Debug, Clone, PartialEq)]
pub enum MediumError {
    /// A parameter violates its invariant; carries the field and the constraint.
    Invalid {
        field: &'static str,
        constraint: &'static str,
    },
    /// Both drive amplitudes are zero, so no mixing angle is defined.
    AllDrivesZero,
    /// The atomic mixing angle requires `coupling_g2n`, which was not supplied.
    ThetaUndefined,
}

impl fmt::Display for MediumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MediumError::Invalid { field, constraint } => {
                write!(f, "invalid medium parameter `{field}`: requires {constraint}")
            }
            MediumError::AllDrivesZero => {
                write!(f, "mixing angles are undefined for all-zero drive amplitudes")
            }
            MediumError::ThetaUndefined => write!(
                f,
                "atomic mixing angle is undefined without the collective coupling g^2 N"
            ),
        }
    }
}

impl core::error::Error for MediumError {}

/// Constants of the driven atomic ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumParams {
    /// Optical depth (resonant intensity attenuation `e^-OD`), dimensionless.
    pub optical_depth: f64,
    /// Radiative decay rate of the excited level, rad/s.
    pub gamma: f64,
    /// Ground-state dephasing rate of the stored spin coherence, rad/s.
    pub gamma_gs: f64,
    /// Dephasing rate of the cross (higher-order Raman) coherences, rad/s.
    pub gamma_gs_prime: f64,
    /// Medium length, m.
    pub length: f64,
    /// Two-photon detuning of the backward drive, rad/s.
    pub two_photon_detuning: f64,
    /// Residual wave-vector mismatch of the backward channel, 1/m.
    pub delta_k: f64,
    /// Vacuum light speed, m/s.
    pub light_speed: f64,
}

impl Default for MediumParams {
    /// Cold ⁸⁷Rb D1 ensemble operating point used throughout the crate.
    fn default() -> Self {
        MediumParams {
            optical_depth: 100.0,
            gamma: GAMMA_RB87_D1,
            gamma_gs: TAU * 60e3,
            gamma_gs_prime: TAU * 60e3,
            length: 0.010,
            two_photon_detuning: TAU * 4.0e6,
            delta_k: 5.0,
            light_speed: LIGHT_SPEED,
        }
    }
}

impl MediumParams {
    pub fn validate(&self) -> Result<(), MediumError> {
        let checks: [(&str, bool, &str); 6] = [
            ("optical_depth", self.optical_depth > 0.0, "OD > 0"),
            ("gamma", self.gamma > 0.0, "gamma > 0"),
            ("length", self.length > 0.0, "length > 0"),
            ("gamma_gs", self.gamma_gs >= 0.0, "gamma_gs >= 0"),
            ("gamma_gs_prime", self.gamma_gs_prime >= 0.0, "gamma_gs_prime >= 0"),
            ("light_speed", self.light_speed > 0.0, "light_speed > 0"),
        ];
        for (field, ok, constraint) in checks {
            if !ok {
                return Err(MediumError::Invalid { field, constraint });
            }
        }
        Ok(())
    }
}

/// Peak Rabi frequencies of the forward and backward coupling beams.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveAmplitudes {
    /// Forward coupling beam, rad/s.
    pub omega_fwc: f64,
    /// Backward coupling beam, rad/s.
    pub omega_bwc: f64,
    /// Collective coupling g²N, rad²/s². Only needed for θ-dependent
    /// diagnostics; the propagation equations use the optical depth instead.
    pub coupling_g2n: Option<f64>,
}

impl Default for DriveAmplitudes {
    fn default() -> Self {
        DriveAmplitudes {
            omega_fwc: TAU * 6.0e6,
            omega_bwc: TAU * 4.2e6,
            coupling_g2n: None,
        }
    }
}

impl DriveAmplitudes {
    pub fn validate(&self) -> Result<(), MediumError> {
        if self.omega_fwc < 0.0 {
            return Err(MediumError::Invalid { field: "omega_fwc", constraint: "omega_fwc >= 0" });
        }
        if self.omega_bwc < 0.0 {
            return Err(MediumError::Invalid { field: "omega_bwc", constraint: "omega_bwc >= 0" });
        }
        if let Some(g2n) = self.coupling_g2n {
            if g2n < 0.0 {
                return Err(MediumError::Invalid { field: "coupling_g2n", constraint: "g2n >= 0" });
            }
        }
        Ok(())
    }

    /// Quadrature sum Ω² = Ω²_FWC + Ω²_BWC.
    pub fn omega_sq(&self) -> f64 {
        self.omega_fwc * self.omega_fwc + self.omega_bwc * self.omega_bwc
    }
}

/// Which ratio defines the photonic mixing angle tan²φ.
///
/// `AmplitudeRatio` is tan²φ = Ω_BWC/Ω_FWC; `IntensityRatio` is
/// tan²φ = (Ω_BWC/Ω_FWC)². The two agree at the balanced point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhiConvention {
    #[default]
    AmplitudeRatio,
    IntensityRatio,
}

/// Polariton mixing angles. `theta` sets the atomic/photonic split and is
/// only defined when the collective coupling g²N is known; `phi` sets the
/// forward/backward photonic split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngles {
    pub theta: Option<f64>,
    pub phi: f64,
}

/// Squared projections of the dark-state polariton onto its three components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonDecomposition {
    pub forward_photonic: f64,
    pub backward_photonic: f64,
    pub atomic: f64,
}

/// Beam geometry entering the phase-matching condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Angle between the probe and the coupling beams, rad.
    pub angle: f64,
    /// Probe wavelength, m.
    pub wavelength: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<(), MediumError> {
        if self.wavelength <= 0.0 {
            return Err(MediumError::Invalid { field: "wavelength", constraint: "wavelength > 0" });
        }
        if self.angle.abs() >= core::f64::consts::FRAC_PI_2 {
            return Err(MediumError::Invalid { field: "angle", constraint: "|angle| < pi/2" });
        }
        Ok(())
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry { angle: 0.345_f64.to_radians(), wavelength: 795e-9 }
    }
}

/// Mixing angles from the drive amplitudes.
///
/// θ = atan√(g²N/Ω²) when the collective coupling is supplied, otherwise left
/// undefined; φ from the selected tan²φ convention.
pub fn mixing_angles(
    drives: &DriveAmplitudes,
    convention: PhiConvention,
) -> Result<MixingAngles, MediumError> {
    drives.validate()?;
    if drives.omega_fwc + drives.omega_bwc == 0.0 {
        return Err(MediumError::AllDrivesZero);
    }
    let tan_sq_phi = match convention {
        PhiConvention::AmplitudeRatio => drives.omega_bwc / drives.omega_fwc,
        PhiConvention::IntensityRatio => {
            let r = drives.omega_bwc / drives.omega_fwc;
            r * r
        }
    };
    // omega_fwc = 0 puts tan²φ at +inf; atan maps it to φ = π/2
    let phi = tan_sq_phi.sqrt().atan();
    let theta = drives
        .coupling_g2n
        .map(|g2n| (g2n / drives.omega_sq()).sqrt().atan());
    Ok(MixingAngles { theta, phi })
}

/// Group velocity of the dark-state polariton, `c₀ cos²θ cos2φ`. Negative for
/// φ beyond 45°.
pub fn group_velocity(angles: &MixingAngles, c0: f64) -> Result<f64, MediumError> {
    let theta = angles.theta.ok_or(MediumError::ThetaUndefined)?;
    let ct = theta.cos();
    Ok(c0 * ct * ct * (2.0 * angles.phi).cos())
}

/// Squared component weights of the polariton; they sum to one.
pub fn polariton_decomposition(
    angles: &MixingAngles,
) -> Result<PolaritonDecomposition, MediumError> {
    let theta = angles.theta.ok_or(MediumError::ThetaUndefined)?;
    let (ct, st) = (theta.cos(), theta.sin());
    let (cp, sp) = (angles.phi.cos(), angles.phi.sin());
    Ok(PolaritonDecomposition {
        forward_photonic: (cp * ct) * (cp * ct),
        backward_photonic: (sp * ct) * (sp * ct),
        atomic: st * st,
    })
}

/// Wave-vector mismatch `k (cos 2Θ − 1)` of the backward conversion path for
/// a probe tilted by Θ against the coupling beams.
pub fn phase_mismatch(geom: &Geometry) -> f64 {
    let k = TAU / geom.wavelength;
    k * ((2.0 * geom.angle).cos() - 1.0)
}

/// Residual of the four-beam phase-matching condition; zero when satisfied.
pub fn phase_matching_residual(k_as_fwd: f64, k_fwc: f64, k_as_bwd: f64, k_bwc: f64) -> f64 {
    (k_as_fwd - k_fwc) - (k_as_bwd - k_bwc)
}
