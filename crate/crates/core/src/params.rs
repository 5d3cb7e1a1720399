//! Physical parameters of the NV center model and the external field
//! configuration applied to it.

use crate::error::{NvError, Result};
use crate::units::ghz;

/// Reduced matrix elements and material constants of the NV center.
///
/// All frequency-like fields are stored as angular frequencies (rad/s);
/// `gamma_r` is a plain rate (1/s) and `e_ph` an energy (J). Construct with
/// struct-update syntax from [`NvParams::default`], which carries the
/// measured defaults (see the README's constants table for which defaults
/// are literature placeholders rather than values pinned by this model).
#[derive(Clone, Debug, PartialEq)]
pub struct NvParams {
    /// Excited-state spin-orbit splitting λ (rad/s).
    pub lambda_so: f64,
    /// Excited-state axial spin-spin splitting D_es (rad/s).
    pub d_es: f64,
    /// Excited-state transverse spin-spin parameter Δ1 (rad/s).
    pub delta1: f64,
    /// Excited-state transverse spin-spin parameter Δ2 (rad/s).
    pub delta2: f64,
    /// Ground-state zero-field splitting D_gs (rad/s).
    pub d_gs: f64,
    /// Ground-state isotropic g-factor.
    pub g_gs: f64,
    /// Excited-state g-factor along the NV axis.
    pub g_es_par: f64,
    /// Excited-state transverse g-factor.
    pub g_es_perp: f64,
    /// Orbital magnetic moment L_z (dimensionless).
    pub l_z: f64,
    /// Radiative decay rate of the excited orbital (1/s).
    pub gamma_r: f64,
    /// Zero-phonon-line photon energy (J).
    pub e_ph: f64,
    /// Refractive index of diamond.
    pub n_diamond: f64,
    /// Debye-Waller factor (fraction of emission into the zero-phonon line).
    pub f_dw: f64,
}

impl Default for NvParams {
    fn default() -> Self {
        Self {
            lambda_so: ghz(5.33),
            d_es: ghz(1.60),
            delta1: ghz(0.10),
            delta2: ghz(0.150),
            d_gs: ghz(2.87),
            g_gs: 2.003,
            g_es_par: 2.01,
            g_es_perp: 0.10,
            l_z: 0.05,
            gamma_r: 1.0 / 13.0e-9,
            e_ph: 1.945 * crate::constants::ELECTRON_VOLT,
            n_diamond: 2.4,
            f_dw: 0.04,
        }
    }
}

impl NvParams {
    /// Check the physical-range invariants.
    pub fn validate(&self) -> Result<()> {
        let nonneg: [(&str, f64); 7] = [
            ("lambda_so", self.lambda_so),
            ("d_es", self.d_es),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("d_gs", self.d_gs),
            ("gamma_r", self.gamma_r),
            ("e_ph", self.e_ph),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(NvError::InvalidParameter(format!(
                    "{name} must be finite and ≥ 0, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("g_gs", self.g_gs),
            ("g_es_par", self.g_es_par),
            ("g_es_perp", self.g_es_perp),
            ("l_z", self.l_z),
        ] {
            if !v.is_finite() {
                return Err(NvError::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if !(self.f_dw > 0.0 && self.f_dw <= 1.0) {
            return Err(NvError::InvalidParameter(format!(
                "f_dw must lie in (0, 1], got {}",
                self.f_dw
            )));
        }
        if !(self.n_diamond >= 1.0) {
            return Err(NvError::InvalidParameter(format!(
                "n_diamond must be ≥ 1, got {}",
                self.n_diamond
            )));
        }
        Ok(())
    }
}

/// Static external conditions: magnetic field and crystal strain.
///
/// `strain_delta` is half the total splitting between the two orbital
/// branches (the branches separate by 2δ); `strain_angle` is the in-plane
/// strain direction α_s.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfig {
    /// Magnetic field (B_x, B_y, B_z) in gauss.
    pub b_field: [f64; 3],
    /// Strain half-splitting δ (rad/s), ≥ 0.
    pub strain_delta: f64,
    /// Strain angle α_s (radians) in [−π, π].
    pub strain_angle: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            b_field: [0.0; 3],
            strain_delta: 0.0,
            strain_angle: 0.0,
        }
    }
}

impl FieldConfig {
    /// Zero field, zero strain.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Purely axial magnetic field (gauss).
    pub fn axial_b(bz: f64) -> Self {
        Self {
            b_field: [0.0, 0.0, bz],
            ..Self::default()
        }
    }

    /// Strain of half-splitting δ (rad/s) at angle α_s, no magnetic field.
    pub fn strain(delta: f64, angle: f64) -> Self {
        Self {
            strain_delta: delta,
            strain_angle: angle,
            ..Self::default()
        }
    }

    /// Check the physical-range invariants.
    pub fn validate(&self) -> Result<()> {
        for (i, b) in self.b_field.iter().enumerate() {
            if !b.is_finite() {
                return Err(NvError::InvalidParameter(format!(
                    "b_field[{i}] must be finite, got {b}"
                )));
            }
        }
        if !self.strain_delta.is_finite() || self.strain_delta < 0.0 {
            return Err(NvError::InvalidParameter(format!(
                "strain_delta must be finite and ≥ 0, got {}",
                self.strain_delta
            )));
        }
        if !self.strain_angle.is_finite()
            || self.strain_angle < -std::f64::consts::PI
            || self.strain_angle > std::f64::consts::PI
        {
            return Err(NvError::InvalidParameter(format!(
                "strain_angle must lie in [−π, π], got {}",
                self.strain_angle
            )));
        }
        Ok(())
    }
}
