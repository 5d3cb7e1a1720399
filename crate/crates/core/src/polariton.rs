//! Dispersive spin-light coupling for optically driven transitions.
//!
//! Models a smooth laser pulse interacting with one or more optical
//! transitions in the rotating-wave approximation: the on-resonance Rabi
//! frequency from physical pulse parameters, dressed (polariton)
//! eigenenergies, the adiabatic ground-branch energy shift and accumulated
//! phase, coherent-state back-action on the spin (reduced density matrices),
//! Faraday rotation of the transmitted light, and the optical Stark shift of
//! the spin precession rate.
//!
//! Internal unit conventions: energies and detunings are angular frequencies
//! (rad/s) unless a name says otherwise; photon energy `NvParams::e_ph` is in
//! joules; electric fields are V/m; dipole moments are C·m.

use std::collections::BTreeMap;

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{NvError, Result};
use crate::numerics::{c, cr, C64, OperatorMatrix};
use crate::params::NvParams;
use crate::units::{ghz, mhz};

/// A smooth optical pulse in a single spatial mode.
///
/// `power` is the total laser power across the two polarization modes, of
/// which only one couples to the transitions; `detunings` maps each spin
/// label to the laser detuning Δ_j (rad/s) from that spin state's optical
/// transition.
#[derive(Debug, Clone)]
pub struct OpticalPulse {
    /// Total laser power [W], shared equally by two polarization modes.
    pub power: f64,
    /// Pulse duration τ [s].
    pub duration: f64,
    /// Effective equal-intensity mode area at the emitter [m²].
    pub mode_area: f64,
    /// Angle θ between the optical dipole and the field polarization [rad].
    pub dipole_angle: f64,
    /// Laser detuning Δ_j per spin label [rad/s].
    pub detunings: BTreeMap<String, f64>,
}

impl OpticalPulse {
    /// Validity check for the physical pulse parameters.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("power", self.power),
            ("duration", self.duration),
            ("mode_area", self.mode_area),
        ];
        for (what, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(NvError::InvalidParameter(format!("pulse {what} must be finite and positive, got {v}")));
            }
        }
        if !self.dipole_angle.is_finite() {
            return Err(NvError::InvalidParameter(format!("pulse dipole_angle must be finite, got {}", self.dipole_angle)));
        }
        for (label, d) in &self.detunings {
            if !d.is_finite() {
                return Err(NvError::InvalidParameter(format!("detuning for label {label} must be finite, got {d}")));
            }
        }
        Ok(())
    }

    /// Mean photon number per polarization mode, n = P·τ / (2·E_ph).
    pub fn photons_per_mode(&self, e_ph_joules: f64) -> f64 {
        self.power * self.duration / (2.0 * e_ph_joules)
    }
}

/// One optical absorption line.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    /// Transition energy as an angular frequency [rad/s].
    pub energy: f64,
    /// Absorption linewidth Γ [rad/s].
    pub linewidth: f64,
    /// Faraday amplitude 𝓕 of the odd-Lorentzian lineshape [rad·rad/s].
    pub faraday_amplitude: f64,
}

/// The set of optical transitions addressed by a pulse, keyed by the spin
/// label of the ground state each transition starts from.
#[derive(Debug, Clone)]
pub struct TransitionSet {
    pub transitions: BTreeMap<String, Transition>,
}

impl TransitionSet {
    /// Builds a validated transition set.
    pub fn new(transitions: BTreeMap<String, Transition>) -> Result<Self> {
        for (label, t) in &transitions {
            if !(t.linewidth.is_finite() && t.linewidth > 0.0) {
                return Err(NvError::InvalidParameter(format!(
                        "linewidth for transition {label} must be positive, got {}",
                        t.linewidth
                    )));
            }
            if !t.energy.is_finite() || !t.faraday_amplitude.is_finite() {
                return Err(NvError::InvalidParameter(format!("transition {label} has non-finite parameters")));
            }
        }
        Ok(Self { transitions })
    }

    /// Absorption-line parameters fitted to measured Faraday-rotation
    /// spectra of the two transitions driven from m_s = 0 and m_s = −1:
    /// 𝓕₀ = 2π×6.9 µrad·GHz, Γ₀ = 2π×140 MHz, 𝓕₋₁ = 2π×7.6 µrad·GHz,
    /// Γ₋₁ = 2π×300 MHz. `e_ph` is the m_s = 0 transition energy (rad/s)
    /// and `omega_s` the signed spacing (E₋₁ − E₀)/ħ.
    pub fn fitted(e_ph_angular: f64, omega_s: f64) -> Self {
        let mut transitions = BTreeMap::new();
        transitions.insert(
            "0".to_string(),
            Transition {
                energy: e_ph_angular,
                linewidth: mhz(140.0),
                faraday_amplitude: ghz(6.9e-6),
            },
        );
        transitions.insert(
            "-1".to_string(),
            Transition {
                energy: e_ph_angular + omega_s,
                linewidth: mhz(300.0),
                faraday_amplitude: ghz(7.6e-6),
            },
        );
        Self { transitions }
    }

    fn pair(&self) -> Result<(&Transition, &Transition)> {
        let t0 = self.transitions.get("0").ok_or_else(|| {
            NvError::InvalidParameter("transition set needs a \"0\" entry for the reference line".into())
        })?;
        let tm = self.transitions.get("-1").ok_or_else(|| {
            NvError::InvalidParameter("transition set needs a \"-1\" entry for the shifted line".into())
        })?;
        Ok((t0, tm))
    }

    /// Signed resonance spacing ω_s = (E₋₁ − E₀)/ħ between the shifted and
    /// reference transitions [rad/s].
    pub fn resonance_spacing(&self) -> Result<f64> {
        let (t0, tm) = self.pair()?;
        Ok(tm.energy - t0.energy)
    }
}

/// Joint state of the spin populations and the coherent light field:
/// Σ_j β_j |g_j⟩ ⊗ |α·e^{iφ_j}⟩ with per-photon phases φ_j.
#[derive(Debug, Clone)]
pub struct SpinLightState {
    /// Spin amplitudes β_j, keyed by spin label; Σ|β_j|² = 1.
    pub amplitudes: BTreeMap<String, C64>,
    /// Coherent amplitude α of the driven optical mode.
    pub coherent_alpha: C64,
    /// Accumulated per-photon phase φ_j per spin label [rad].
    pub per_photon_phase: BTreeMap<String, f64>,
}

impl SpinLightState {
    /// Builds a normalized spin-light product state with zero accumulated
    /// phases.
    pub fn new(amplitudes: BTreeMap<String, C64>, coherent_alpha: C64) -> Result<Self> {
        let norm_sq: f64 = amplitudes.values().map(|b| b.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm_sq - 1.0).abs() > 1e-9 {
            return Err(NvError::InvalidState(format!("spin amplitudes must satisfy Σ|β|² = 1, got {norm_sq}")));
        }
        let per_photon_phase = amplitudes.keys().map(|k| (k.clone(), 0.0)).collect();
        Ok(Self {
            amplitudes,
            coherent_alpha,
            per_photon_phase,
        })
    }

    /// Mean photon number ⟨n⟩ = |α|² of the driven mode.
    pub fn mean_photon_number(&self) -> f64 {
        self.coherent_alpha.norm_sqr()
    }

    fn labels(&self) -> Vec<String> {
        self.amplitudes.keys().cloned().collect()
    }
}

/// Squared optical dipole moment |μ|² [C²·m²] from the radiative decay rate:
/// |μ|² = 3π·ε₀·ħ⁴·c³·γ_r / (E_ph³·n_D).
pub fn dipole_moment_sq(p: &NvParams) -> f64 {
    3.0 * std::f64::consts::PI * EPSILON_0 * HBAR.powi(4) * SPEED_OF_LIGHT.powi(3) * p.gamma_r
        / (p.e_ph.powi(3) * p.n_diamond)
}

/// Peak electric-field amplitude |E₀| [V/m] of a pulse carrying `n_photons`
/// in the coupled mode: |E₀| = √(2·n·E_ph / (n_D·ε₀·A_eff·c·τ)).
pub fn field_amplitude(p: &NvParams, pulse: &OpticalPulse, n_photons: f64) -> f64 {
    (2.0 * n_photons * p.e_ph
        / (p.n_diamond * EPSILON_0 * pulse.mode_area * SPEED_OF_LIGHT * pulse.duration))
        .sqrt()
}

/// On-resonance optical Rabi frequency Ω₀ = √F_DW·|μ|·|E₀|·cos θ / ħ [rad/s].
pub fn rabi_frequency(p: &NvParams, pulse: &OpticalPulse, n_photons: f64) -> f64 {
    p.f_dw.sqrt() * dipole_moment_sq(p).sqrt() * field_amplitude(p, pulse, n_photons)
        * pulse.dipole_angle.cos()
        / HBAR
}

/// Dressed-state (polariton) energies for the n-photon manifold, as angular
/// frequencies: E_± = E_ph·(n + ½) ± ½·√(Δ² + Ω₀²). All inputs in rad/s.
pub fn polariton_energies(n: u64, delta: f64, omega0: f64, e_ph_angular: f64) -> (f64, f64) {
    let center = e_ph_angular * (n as f64 + 0.5);
    let half_split = 0.5 * delta.hypot(omega0);
    (center + half_split, center - half_split)
}

/// Adiabatic shift of the ground-like polariton branch,
/// ε_g = (Δ/2)·(√(1 + Ω₀²/Δ²) − 1), as rad/s.
///
/// Evaluated in the cancellation-free form sign(Δ)·Ω₀² / (2(√(Δ²+Ω₀²)+|Δ|)).
/// The shift is discontinuous at Δ = 0 (limits ±Ω₀/2); there the caller must
/// pick a side via `zero_side`, otherwise `AmbiguousBranch` is returned.
pub fn energy_shift(delta: f64, omega0: f64, zero_side: Option<f64>) -> Result<f64> {
    if delta == 0.0 {
        return match zero_side {
            Some(s) => Ok(if s >= 0.0 { 0.5 * omega0 } else { -0.5 * omega0 }),
            None => Err(NvError::AmbiguousBranch),
        };
    }
    let sign = if delta > 0.0 { 1.0 } else { -1.0 };
    Ok(sign * omega0 * omega0 / (2.0 * (delta.hypot(omega0) + delta.abs())))
}

/// Per-photon dispersive coupling constant
/// D = |μ|²·F_DW·E_ph·cos²θ / (2ħ²·c·n_D·ε₀·A_eff) [rad/s per photon].
pub fn coupling_constant_d(p: &NvParams, pulse: &OpticalPulse) -> f64 {
    dipole_moment_sq(p) * p.f_dw * p.e_ph * pulse.dipole_angle.cos().powi(2)
        / (2.0 * HBAR * HBAR * SPEED_OF_LIGHT * p.n_diamond * EPSILON_0 * pulse.mode_area)
}

/// Back-solves the mode area that reproduces a target Rabi frequency at the
/// given photon number (Ω₀ ∝ 1/√A_eff).
pub fn calibrate_mode_area_for_rabi(
    p: &NvParams,
    pulse: &OpticalPulse,
    n_photons: f64,
    target_omega0: f64,
) -> Result<f64> {
    if !(target_omega0.is_finite() && target_omega0 > 0.0) {
        return Err(NvError::InvalidParameter(format!("target Rabi frequency must be positive, got {target_omega0}")));
    }
    let mut reference = pulse.clone();
    reference.mode_area = 1.0;
    let omega_at_unit_area = rabi_frequency(p, &reference, n_photons);
    Ok((omega_at_unit_area / target_omega0).powi(2))
}

/// Back-solves the mode area that reproduces a target per-photon coupling
/// constant (D ∝ 1/A_eff).
pub fn calibrate_mode_area_for_coupling(
    p: &NvParams,
    pulse: &OpticalPulse,
    target_d: f64,
) -> Result<f64> {
    if !(target_d.is_finite() && target_d > 0.0) {
        return Err(NvError::InvalidParameter(format!("target coupling constant must be positive, got {target_d}")));
    }
    let mut reference = pulse.clone();
    reference.mode_area = 1.0;
    Ok(coupling_constant_d(p, &reference) / target_d)
}

/// How to evaluate the phase accumulated over a pulse.
#[derive(Debug, Clone, Copy)]
pub enum PhaseMode {
    /// Far-detuned dispersive limit Φ = D·n/Δ.
    FarDetuned,
    /// Exact adiabatic phase Φ = τ·ε_g(Δ, Ω₀); `omega0` must correspond to
    /// the same photon number `n` passed to [`accumulated_phase`].
    Exact { omega0: f64, duration: f64 },
}

/// Phase accumulated by the ground-like branch over a pulse [rad].
pub fn accumulated_phase(n: f64, delta: f64, d: f64, mode: PhaseMode) -> Result<f64> {
    match mode {
        PhaseMode::FarDetuned => {
            if delta == 0.0 {
                return Err(NvError::DivisionByZeroDetuning);
            }
            Ok(d * n / delta)
        }
        PhaseMode::Exact { omega0, duration } => {
            Ok(duration * energy_shift(delta, omega0, None)?)
        }
    }
}

/// Advances a spin-light state through one pulse in the dispersive limit:
/// each spin label accrues per-photon phase φ_j += D/Δ_j, leaving the spin
/// amplitudes and |α| unchanged.
pub fn evolve_spin_light(
    p: &NvParams,
    state: &SpinLightState,
    pulse: &OpticalPulse,
) -> Result<SpinLightState> {
    pulse.validate()?;
    let d = coupling_constant_d(p, pulse);
    let mut next = state.clone();
    for label in state.amplitudes.keys() {
        let delta = *pulse.detunings.get(label).ok_or_else(|| NvError::InvalidParameter(format!("pulse has no detuning for spin label {label}")))?;
        if delta == 0.0 {
            return Err(NvError::DivisionByZeroDetuning);
        }
        *next.per_photon_phase.get_mut(label).expect("label present") += d / delta;
    }
    Ok(next)
}

/// One coherent-state component of the reduced light field.
#[derive(Debug, Clone)]
pub struct CoherentComponent {
    /// Spin label this component is conditioned on.
    pub label: String,
    /// Classical weight |β_j|².
    pub weight: f64,
    /// Coherent amplitude α·e^{iφ_j}.
    pub amplitude: C64,
}

/// Reduced state of the light field: a classical mixture of coherent states
/// |α·e^{iφ_j}⟩ weighted by the spin populations |β_j|².
pub fn reduced_light(state: &SpinLightState) -> Vec<CoherentComponent> {
    state
        .amplitudes
        .iter()
        .map(|(label, beta)| {
            let phi = state.per_photon_phase[label];
            CoherentComponent {
                label: label.clone(),
                weight: beta.norm_sqr(),
                amplitude: state.coherent_alpha * c(0.0, phi).exp(),
            }
        })
        .collect()
}

/// Reduced spin density matrix by exact partial trace over the light field:
/// ρ_jk = β_j·β_k*·exp[−|α|²(1 − e^{i(φ_j−φ_k)})].
///
/// The coherence magnitude exp[−|α|²(1 − cos(φ_j−φ_k))] encodes the
/// measurement back-action of the scattered light on the spin.
pub fn reduced_spin(state: &SpinLightState) -> OperatorMatrix {
    let labels = state.labels();
    let betas: Vec<C64> = labels.iter().map(|l| state.amplitudes[l]).collect();
    let phases: Vec<f64> = labels.iter().map(|l| state.per_photon_phase[l]).collect();
    let n_mean = state.mean_photon_number();
    OperatorMatrix::from_fn(labels, |j, k| {
        let overlap = (cr(-n_mean) * (cr(1.0) - c(0.0, phases[j] - phases[k]).exp())).exp();
        betas[j] * betas[k].conj() * overlap
    })
}

/// Small-phase approximation of the reduced spin state: the pure state with
/// amplitudes β_j·e^{i⟨n⟩φ_j}, i.e. ρ_jk = β_j·β_k*·e^{i⟨n⟩(φ_j−φ_k)}.
/// Valid to first order in ⟨n⟩·(φ_j−φ_k)².
pub fn reduced_spin_approx(state: &SpinLightState) -> OperatorMatrix {
    let labels = state.labels();
    let betas: Vec<C64> = labels.iter().map(|l| state.amplitudes[l]).collect();
    let phases: Vec<f64> = labels.iter().map(|l| state.per_photon_phase[l]).collect();
    let n_mean = state.mean_photon_number();
    OperatorMatrix::from_fn(labels, |j, k| {
        betas[j] * betas[k].conj() * c(0.0, n_mean * (phases[j] - phases[k])).exp()
    })
}

/// Odd-Lorentzian dispersive lineshape φ(Δ) = 𝓕·Δ / (Δ² + Γ²) [rad].
pub fn odd_lorentzian(delta: f64, amplitude: f64, width: f64) -> f64 {
    amplitude * delta / (delta * delta + width * width)
}

/// How to evaluate the Faraday phase.
#[derive(Debug, Clone, Copy)]
pub enum FaradayMode {
    /// Far-detuned form Φ_F = −D·ω_s/(Δ₀·Δ₋₁) with per-photon coupling `d`.
    FarDetuned { d: f64 },
    /// Odd-Lorentzian lineshapes of both absorption lines.
    Lorentzian,
}

/// Faraday phase Φ_F = φ₀ − φ₋₁ between light conditioned on the two spin
/// states, at laser detuning `delta_0` from the reference ("0") transition.
pub fn faraday_phase(set: &TransitionSet, delta_0: f64, mode: FaradayMode) -> Result<f64> {
    let (t0, tm) = set.pair()?;
    let omega_s = tm.energy - t0.energy;
    let delta_m = delta_0 - omega_s;
    match mode {
        FaradayMode::FarDetuned { d } => {
            if delta_0 == 0.0 || delta_m == 0.0 {
                return Err(NvError::DivisionByZeroDetuning);
            }
            Ok(-d * omega_s / (delta_0 * delta_m))
        }
        FaradayMode::Lorentzian => Ok(odd_lorentzian(delta_0, t0.faraday_amplitude, t0.linewidth)
            - odd_lorentzian(delta_m, tm.faraday_amplitude, tm.linewidth)),
    }
}

/// Optical Stark shift of the precession rate for one spin state,
/// S = (Δ/4π)(√(1 + Ω₀²/Δ²) − 1) = ε_g/(2π), in Hz.
pub fn stark_shift(delta: f64, omega0: f64, zero_side: Option<f64>) -> Result<f64> {
    Ok(energy_shift(delta, omega0, zero_side)? / (2.0 * std::f64::consts::PI))
}

/// Stark precession shift inferred from the Faraday phase and pulse power:
/// Σ_S = P_L·Φ_F / (4π·E_ph), in Hz. `e_ph_joules` is the photon energy.
pub fn stark_from_faraday(power: f64, e_ph_joules: f64, phi_f: f64) -> f64 {
    power * phi_f / (4.0 * std::f64::consts::PI * e_ph_joules)
}
