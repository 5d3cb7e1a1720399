//! Driven five-level Λ-system model of the low-temperature optical spin
//! interface.
//!
//! Two ground spin levels (|+1g⟩, |0g⟩) are coupled by a phase-coherent
//! two-tone optical drive to two nearly degenerate excited levels (|Re⟩,
//! |Le⟩), with a metastable singlet shelf |S⟩ mediating intersystem
//! crossing. The rotating-frame Hamiltonian, the Lindblad dissipator, and
//! the derived quantities (steady states, dark states, Bloch vectors,
//! fidelities) describe coherent population trapping (CPT) and stimulated
//! Raman transitions (SRT).
//!
//! Basis ordering: {|+1g⟩, |0g⟩, |Re⟩, |Le⟩, |S⟩} = indices 0..=4.
//! Energies are angular frequencies [rad/s]; rates are [1/s].

use crate::error::{NvError, Result};
use crate::lindblad::{
    self, evolve_superoperator, superoperator, DensityMatrix, JumpChannel,
};
use crate::numerics::{cr, smallest_singular_triplet, C64, OperatorMatrix};
use nalgebra::DVector;

/// Indices of the five basis levels.
pub const IDX_PLUS1_G: usize = 0;
pub const IDX_ZERO_G: usize = 1;
pub const IDX_R_E: usize = 2;
pub const IDX_L_E: usize = 3;
pub const IDX_SINGLET: usize = 4;

/// Which excited level closes the Λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    R,
    L,
}

impl Branch {
    fn excited_index(self) -> usize {
        match self {
            Branch::R => IDX_R_E,
            Branch::L => IDX_L_E,
        }
    }
}

/// Which levels the model retains.
///
/// `SingleLambda` restricts the dynamics to a genuine three-level system
/// (both grounds plus one excited level). Dissipative channels whose source
/// or destination is a dropped level (intersystem crossing through the
/// singlet) are dropped with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSelection {
    FiveLevel,
    SingleLambda(Branch),
}

impl LevelSelection {
    /// Indices (into the five-level basis) of the retained levels.
    pub fn retained_indices(self) -> Vec<usize> {
        match self {
            LevelSelection::FiveLevel => vec![0, 1, 2, 3, 4],
            LevelSelection::SingleLambda(b) => vec![IDX_PLUS1_G, IDX_ZERO_G, b.excited_index()],
        }
    }
}

/// Incoherent transition rates [1/s].
///
/// `gamma_rad` is the radiative decay rate on each of the four
/// excited→ground channels. `gamma_isc` shelves each excited level into the
/// singlet; `gamma_isc_rev` returns the singlet to the grounds, split as
/// `isc_branching_plus` into |+1g⟩ and the remainder into |0g⟩ (an even
/// split by default; the branching is not separately constrained, so it is
/// configurable). `gamma_1` is the ground-state relaxation rate 1/T₁,
/// applied as gamma_1/2 on each direction between the grounds (the thermal
/// energy far exceeds the level splittings, so up and down rates are
/// equal). `gamma_phi` is pure dephasing 1/T₂, implemented as a jump
/// operator |0g⟩⟨0g|.
#[derive(Debug, Clone, Copy)]
pub struct RateTable {
    pub gamma_rad: f64,
    pub gamma_isc: f64,
    pub gamma_isc_rev: f64,
    pub isc_branching_plus: f64,
    pub gamma_1: f64,
    pub gamma_phi: f64,
}

impl Default for RateTable {
    /// Radiative decay from the 13 ns excited-state lifetime; all other
    /// dissipation off.
    fn default() -> Self {
        Self {
            gamma_rad: 1.0 / 13.0e-9,
            gamma_isc: 0.0,
            gamma_isc_rev: 0.0,
            isc_branching_plus: 0.5,
            gamma_1: 0.0,
            gamma_phi: 0.0,
        }
    }
}

impl RateTable {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_rad", self.gamma_rad),
            ("gamma_isc", self.gamma_isc),
            ("gamma_isc_rev", self.gamma_isc_rev),
            ("gamma_1", self.gamma_1),
            ("gamma_phi", self.gamma_phi),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(NvError::InvalidParameter(format!(
                    "rate {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !(self.isc_branching_plus.is_finite()
            && (0.0..=1.0).contains(&self.isc_branching_plus))
        {
            return Err(NvError::InvalidParameter(format!(
                "isc_branching_plus must lie in [0, 1], got {}",
                self.isc_branching_plus
            )));
        }
        Ok(())
    }
}

/// The driven Λ-system model.
///
/// `delta_l` is the laser detuning from the R-branch two-photon-resonant
/// condition, `delta_e` the splitting between the excited levels,
/// `omega` the optical Rabi frequency, `phi` the relative phase of the two
/// drive tones, and `tan(theta/2)` their relative amplitude; `(theta, phi)`
/// are the polar and azimuthal angles of the dark state on the ground-state
/// Bloch sphere. `epsilon_s` is the singlet energy in the rotating frame.
/// All in rad/s.
#[derive(Debug, Clone)]
pub struct LambdaModel {
    pub delta_l: f64,
    pub delta_e: f64,
    pub omega: f64,
    pub theta: f64,
    pub phi: f64,
    pub epsilon_s: f64,
    pub rates: RateTable,
    pub selection: LevelSelection,
}

/// Basis labels for the five-level model.
pub fn five_level_labels() -> Vec<String> {
    ["+1g", "0g", "Re", "Le", "S"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// |to⟩⟨from| in the given basis.
fn transition_operator(labels: Vec<String>, to: usize, from: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(labels, |r, col| {
        if r == to && col == from {
            cr(1.0)
        } else {
            cr(0.0)
        }
    })
}

impl LambdaModel {
    pub fn new(
        delta_l: f64,
        delta_e: f64,
        omega: f64,
        theta: f64,
        phi: f64,
        epsilon_s: f64,
        rates: RateTable,
        selection: LevelSelection,
    ) -> Result<Self> {
        rates.validate()?;
        for (name, v) in [
            ("delta_l", delta_l),
            ("delta_e", delta_e),
            ("phi", phi),
            ("epsilon_s", epsilon_s),
        ] {
            if !v.is_finite() {
                return Err(NvError::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(NvError::InvalidParameter(format!(
                "omega must be finite and non-negative, got {omega}"
            )));
        }
        if !(theta.is_finite() && (0.0..=std::f64::consts::PI).contains(&theta)) {
            return Err(NvError::InvalidParameter(format!(
                "theta must lie in [0, π], got {theta}"
            )));
        }
        Ok(Self {
            delta_l,
            delta_e,
            omega,
            theta,
            phi,
            epsilon_s,
            rates,
            selection,
        })
    }

    /// The full five-level rotating-frame Hamiltonian, regardless of the
    /// level selection. Both grounds sit at the laser detuning Δ_L, the
    /// R-branch excited level defines zero energy, the L-branch level sits
    /// at −δ_e, and the drive couples each ground to both excited levels
    /// with amplitudes Ω·cos(θ/2) (from |+1g⟩) and ±Ω·sin(θ/2)e^{±iφ}
    /// (from |0g⟩, opposite signs for the two excited levels).
    pub fn build_five_level_hamiltonian(&self) -> OperatorMatrix {
        let cos_half = self.omega * (0.5 * self.theta).cos();
        let sin_half = self.omega * (0.5 * self.theta).sin();
        let phase = C64::from_polar(1.0, self.phi);
        let drive_plus = cr(cos_half);
        let drive_zero = phase * cr(sin_half);
        let z = cr(0.0);
        OperatorMatrix::from_rows(
            five_level_labels(),
            &[
                vec![cr(self.delta_l), z, drive_plus, drive_plus, z],
                vec![z, cr(self.delta_l), drive_zero, -drive_zero, z],
                vec![drive_plus, drive_zero.conj(), z, z, z],
                vec![drive_plus, -drive_zero.conj(), z, cr(-self.delta_e), z],
                vec![z, z, z, z, cr(self.epsilon_s)],
            ],
        )
    }

    /// The Hamiltonian restricted to the retained levels.
    pub fn hamiltonian(&self) -> OperatorMatrix {
        let full = self.build_five_level_hamiltonian();
        match self.selection {
            LevelSelection::FiveLevel => full,
            LevelSelection::SingleLambda(_) => {
                full.submatrix(&self.selection.retained_indices())
            }
        }
    }

    /// Every dissipative channel of the five-level model: radiative decay
    /// from each excited level to each ground, intersystem crossing into
    /// and back out of the singlet, ground-state relaxation in both
    /// directions at gamma_1/2, and pure dephasing on |0g⟩.
    fn five_level_channels(&self) -> Vec<JumpChannel> {
        let labels = five_level_labels();
        let r = &self.rates;
        let mut out = Vec::new();
        let mut push = |rate: f64, to: usize, from: usize| {
            if rate > 0.0 {
                out.push(JumpChannel {
                    rate,
                    operator: transition_operator(labels.clone(), to, from),
                });
            }
        };
        for excited in [IDX_R_E, IDX_L_E] {
            for ground in [IDX_PLUS1_G, IDX_ZERO_G] {
                push(r.gamma_rad, ground, excited);
            }
            push(r.gamma_isc, IDX_SINGLET, excited);
        }
        push(r.gamma_isc_rev * r.isc_branching_plus, IDX_PLUS1_G, IDX_SINGLET);
        push(
            r.gamma_isc_rev * (1.0 - r.isc_branching_plus),
            IDX_ZERO_G,
            IDX_SINGLET,
        );
        push(0.5 * r.gamma_1, IDX_ZERO_G, IDX_PLUS1_G);
        push(0.5 * r.gamma_1, IDX_PLUS1_G, IDX_ZERO_G);
        if r.gamma_phi > 0.0 {
            out.push(JumpChannel {
                rate: r.gamma_phi,
                operator: transition_operator(labels, IDX_ZERO_G, IDX_ZERO_G),
            });
        }
        out
    }

    /// Dissipative channels of the retained levels, expressed in the
    /// selection-sized basis. Channels touching dropped levels are omitted.
    pub fn jump_channels(&self) -> Vec<JumpChannel> {
        let retained = self.selection.retained_indices();
        self.five_level_channels()
            .into_iter()
            .filter_map(|ch| {
                let sub = ch.operator.submatrix(&retained);
                // A channel survives only if its operator has support
                // entirely inside the retained subspace.
                if sub.max_abs() == ch.operator.max_abs() {
                    Some(JumpChannel {
                        rate: ch.rate,
                        operator: sub,
                    })
                } else {
                    None
                }
            })
            .collect()
    }

    /// The 25×25 Lindblad generator of the full five-level model.
    pub fn build_five_level_superoperator(&self) -> Result<OperatorMatrix> {
        let mut full = self.clone();
        full.selection = LevelSelection::FiveLevel;
        superoperator(&full.hamiltonian(), &full.jump_channels())
    }

    /// The Lindblad generator of the retained levels (25×25 for the full
    /// model, 9×9 for a single Λ).
    pub fn superoperator(&self) -> Result<OperatorMatrix> {
        superoperator(&self.hamiltonian(), &self.jump_channels())
    }

    /// Basis labels of the retained levels.
    pub fn labels(&self) -> Vec<String> {
        let all = five_level_labels();
        self.selection
            .retained_indices()
            .into_iter()
            .map(|i| all[i].clone())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.selection.retained_indices().len()
    }

    /// ρ(t) = e^{W·t}·ρ(0) at each requested time.
    pub fn evolve(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        if rho0.dim() != self.dim() {
            return Err(NvError::InvalidState(format!(
                "initial state dimension {} does not match model dimension {}",
                rho0.dim(),
                self.dim()
            )));
        }
        evolve_superoperator(&self.superoperator()?, rho0, times)
    }

    /// The stationary state ρ̄ with W·vec(ρ̄) = 0.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state_of(&self.superoperator()?, self.labels())
    }

    /// The dark state of the chosen Λ branch, embedded in the retained
    /// basis (ground amplitudes at indices 0 and 1, zeros elsewhere).
    pub fn dark_state_vector(&self, branch: Branch) -> Vec<C64> {
        let pair = dark_state(self.theta, self.phi, branch);
        let mut v = vec![cr(0.0); self.dim()];
        v[IDX_PLUS1_G] = pair[0];
        v[IDX_ZERO_G] = pair[1];
        v
    }
}

/// Finds the stationary state of a Lindblad generator as its null vector,
/// Hermitized and trace-normalized.
///
/// Fails with `DegenerateSteadyState` unless the null space is clearly
/// one-dimensional (second-smallest singular value at least 1e3 times the
/// smallest).
pub fn steady_state_of(w: &OperatorMatrix, labels: Vec<String>) -> Result<DensityMatrix> {
    let (sigma_min, sigma_second, null_vec) = smallest_singular_triplet(w);
    let ratio = sigma_second / sigma_min;
    if !(ratio > 1e3) {
        return Err(NvError::DegenerateSteadyState { ratio });
    }
    let rho = lindblad::unvec_density(&null_vec, labels)?.hermitian_part();
    let trace = rho.trace();
    if trace.norm() < 1e-12 {
        return Err(NvError::DegenerateSteadyState { ratio });
    }
    DensityMatrix::new(rho.scaled(cr(1.0) / trace))
}

/// The ground-state superposition decoupled from the optical drive of the
/// given branch: the two-component vector (a, b) with
/// |D⟩ = a|+1g⟩ + b|0g⟩, b = cos(θ/2) and a = ∓e^{−iφ}·sin(θ/2) (upper
/// sign for branch R, lower for L). Annihilated by the corresponding
/// excited-level drive row of the five-level Hamiltonian.
pub fn dark_state(theta: f64, phi: f64, branch: Branch) -> [C64; 2] {
    let sign = match branch {
        Branch::R => -1.0,
        Branch::L => 1.0,
    };
    let a = C64::from_polar(1.0, -phi) * cr(sign * (0.5 * theta).sin());
    let b = cr((0.5 * theta).cos());
    [a, b]
}

/// Bloch vector of the ground-state qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.bx * other.bx + self.by * other.by + self.bz * other.bz
    }
}

/// Bloch vector of the ground-state qubit sub-block (indices 0 and 1),
/// using σx = |+1g⟩⟨0g| + |0g⟩⟨+1g|, σy = i(|+1g⟩⟨0g| − |0g⟩⟨+1g|),
/// σz = |0g⟩⟨0g| − |+1g⟩⟨+1g|. Population outside the qubit shortens the
/// vector: |b| ≤ ρ₀₀ + ρ₁₁.
pub fn bloch_vector(rho: &DensityMatrix) -> BlochVector {
    let coherence = rho.matrix().entry(IDX_PLUS1_G, IDX_ZERO_G);
    BlochVector {
        bx: 2.0 * coherence.re,
        by: 2.0 * coherence.im,
        bz: rho.population(IDX_ZERO_G) - rho.population(IDX_PLUS1_G),
    }
}

/// The Bloch-sphere direction of the dark state: the axis about which SRT
/// rotates the qubit. For branch R this is
/// (−sinθ·cosφ, sinθ·sinφ, cosθ).
pub fn dark_state_axis(theta: f64, phi: f64, branch: Branch) -> BlochVector {
    let pair = dark_state(theta, phi, branch);
    let coherence = pair[0] * pair[1].conj();
    BlochVector {
        bx: 2.0 * coherence.re,
        by: 2.0 * coherence.im,
        bz: pair[1].norm_sqr() - pair[0].norm_sqr(),
    }
}

/// State-preparation fidelity F = ⟨target|ρ|target⟩. The target is
/// normalized internally.
pub fn fidelity(rho: &DensityMatrix, target: &[C64]) -> Result<f64> {
    if target.len() != rho.dim() {
        return Err(NvError::InvalidState(format!(
            "target vector length {} does not match state dimension {}",
            target.len(),
            rho.dim()
        )));
    }
    let v = DVector::from_column_slice(target);
    let norm_sq = v.norm_squared();
    if norm_sq < 1e-24 {
        return Err(NvError::InvalidState(
            "fidelity target vector has zero norm".into(),
        ));
    }
    let image = rho.matrix().apply(&v);
    Ok(v.dotc(&image).re / norm_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, mhz};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(selection: LevelSelection) -> LambdaModel {
        LambdaModel::new(
            ghz(0.5),
            mhz(180.0),
            mhz(50.0),
            1.1,
            0.7,
            ghz(2.0),
            RateTable::default(),
            selection,
        )
        .unwrap()
    }

    #[test]
    fn five_level_hamiltonian_matches_expected_structure() {
        let m = model(LevelSelection::FiveLevel);
        let h = m.build_five_level_hamiltonian();
        let cos_half = m.omega * (0.5 * m.theta).cos();
        let sin_half = m.omega * (0.5 * m.theta).sin();
        let phase = C64::from_polar(1.0, m.phi);
        // Grounds at the laser detuning, excited levels split by δ_e,
        // singlet at ε_S.
        assert_eq!(h.entry(0, 0), cr(m.delta_l));
        assert_eq!(h.entry(1, 1), cr(m.delta_l));
        assert_eq!(h.entry(2, 2), cr(0.0));
        assert_eq!(h.entry(3, 3), cr(-m.delta_e));
        assert_eq!(h.entry(4, 4), cr(m.epsilon_s));
        // |+1g⟩ couples identically to both excited levels.
        assert_eq!(h.entry(0, 2), cr(cos_half));
        assert_eq!(h.entry(0, 3), cr(cos_half));
        // |0g⟩ couples with opposite signs and the drive phase.
        assert!((h.entry(1, 2) - phase * cr(sin_half)).norm() < 1e-15);
        assert!((h.entry(1, 3) + phase * cr(sin_half)).norm() < 1e-15);
        // Singlet is fully decoupled.
        for i in 0..4 {
            assert_eq!(h.entry(i, 4), cr(0.0));
            assert_eq!(h.entry(4, i), cr(0.0));
        }
        assert!(h.is_hermitian(1e-15));
        // φ enters only as a phase: shifting by 2π changes nothing.
        let mut shifted = m.clone();
        shifted.phi += 2.0 * std::f64::consts::PI;
        assert!(
            (&shifted.build_five_level_hamiltonian() - &h).max_abs() < 1e-9 * h.max_abs()
        );
    }

    #[test]
    fn theta_zero_drives_only_the_plus_one_ground() {
        let mut m = model(LevelSelection::FiveLevel);
        m.theta = 0.0;
        let h = m.build_five_level_hamiltonian();
        assert_eq!(h.entry(1, 2), cr(0.0));
        assert_eq!(h.entry(1, 3), cr(0.0));
        assert_eq!(h.entry(0, 2), cr(m.omega));
        assert_eq!(h.entry(0, 3), cr(m.omega));
    }

    #[test]
    fn single_lambda_reduces_to_three_levels() {
        let m_r = model(LevelSelection::SingleLambda(Branch::R));
        let h_r = m_r.hamiltonian();
        assert_eq!(h_r.dim(), 3);
        assert_eq!(h_r.labels(), &["+1g", "0g", "Re"]);
        assert_eq!(h_r.entry(2, 2), cr(0.0));
        let m_l = model(LevelSelection::SingleLambda(Branch::L));
        let h_l = m_l.hamiltonian();
        assert_eq!(h_l.labels(), &["+1g", "0g", "Le"]);
        assert_eq!(h_l.entry(2, 2), cr(-m_l.delta_e));
        // The retained drive elements agree with the five-level matrix.
        let full = m_r.build_five_level_hamiltonian();
        assert_eq!(h_r.entry(0, 2), full.entry(0, 2));
        assert_eq!(h_l.entry(1, 2), full.entry(1, 3));
        // Superoperator is selection-sized.
        assert_eq!(m_r.superoperator().unwrap().dim(), 9);
        assert_eq!(
            model(LevelSelection::FiveLevel).superoperator().unwrap().dim(),
            25
        );
    }

    #[test]
    fn jump_channels_cover_the_documented_processes() {
        let mut m = model(LevelSelection::FiveLevel);
        m.rates = RateTable {
            gamma_rad: 1.0 / 13.0e-9,
            gamma_isc: 1.0e7,
            gamma_isc_rev: 3.0e6,
            isc_branching_plus: 0.25,
            gamma_1: 1.0e4,
            gamma_phi: 2.0e5,
        };
        let channels = m.jump_channels();
        // 4 radiative + 2 shelving + 2 deshelving + 2 relaxation + dephasing.
        assert_eq!(channels.len(), 11);
        let total_rate: f64 = channels.iter().map(|ch| ch.rate).sum();
        let expected = 4.0 / 13.0e-9 + 2.0e7 + 3.0e6 + 1.0e4 + 2.0e5;
        assert!((total_rate - expected).abs() < 1e-3 * expected);
        // Deshelving splits by the branching ratio.
        let deshelf: Vec<f64> = channels
            .iter()
            .filter(|ch| ch.operator.entry(IDX_PLUS1_G, IDX_SINGLET).norm() > 0.0
                || ch.operator.entry(IDX_ZERO_G, IDX_SINGLET).norm() > 0.0)
            .map(|ch| ch.rate)
            .collect();
        assert_eq!(deshelf.len(), 2);
        assert!((deshelf[0] - 0.25 * 3.0e6).abs() < 1.0);
        assert!((deshelf[1] - 0.75 * 3.0e6).abs() < 1.0);

        // The single-Λ reduction keeps only channels inside the retained
        // subspace: 2 radiative + 2 relaxation + dephasing.
        m.selection = LevelSelection::SingleLambda(Branch::R);
        let reduced = m.jump_channels();
        assert_eq!(reduced.len(), 5);
        for ch in &reduced {
            assert_eq!(ch.operator.dim(), 3);
        }
    }

    #[test]
    fn five_level_generator_has_rank_twenty_four() {
        let mut m = model(LevelSelection::FiveLevel);
        m.rates = RateTable {
            gamma_rad: 1.0 / 13.0e-9,
            gamma_isc: 1.0e7,
            gamma_isc_rev: 3.0e6,
            isc_branching_plus: 0.5,
            gamma_1: 1.0e5,
            gamma_phi: 1.0e6,
        };
        let w = m.build_five_level_superoperator().unwrap();
        assert_eq!(w.dim(), 25);
        let sv = crate::numerics::singular_values(&w);
        let rank = sv.iter().filter(|s| **s > 1e-10 * sv[0]).count();
        assert_eq!(rank, 24);
        // Trace preservation: the trace functional is a left null vector.
        let t = lindblad::trace_functional(5);
        assert!(w.matrix().ad_mul(&t).norm() < 1e-12 * w.frobenius_norm());
    }

    #[test]
    fn dark_state_is_annihilated_by_its_drive_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut m = model(LevelSelection::FiveLevel);
        for _ in 0..50 {
            m.theta = rng.random_range(0.0..std::f64::consts::PI);
            m.phi = rng.random_range(-3.0..3.0);
            let h = m.build_five_level_hamiltonian();
            for branch in [Branch::R, Branch::L] {
                let d = dark_state(m.theta, m.phi, branch);
                let row = branch.excited_index();
                let coupling = h.entry(row, IDX_PLUS1_G) * d[0] + h.entry(row, IDX_ZERO_G) * d[1];
                assert!(
                    coupling.norm() < 1e-12 * m.omega,
                    "branch {branch:?} dark state couples to the drive: {coupling}"
                );
                // And the orthogonal bright state couples maximally.
                let bright = [d[1].conj(), -d[0].conj()];
                let bright_coupling =
                    h.entry(row, IDX_PLUS1_G) * bright[0] + h.entry(row, IDX_ZERO_G) * bright[1];
                assert!((bright_coupling.norm() - m.omega).abs() < 1e-9 * m.omega);
            }
        }
    }

    #[test]
    fn dark_state_limits_and_branch_orthogonality() {
        // θ=0: dark state is |0g⟩ exactly.
        let d = dark_state(0.0, 1.3, Branch::R);
        assert_eq!(d[0], cr(0.0));
        assert_eq!(d[1], cr(1.0));
        // θ=π: dark state is |+1g⟩ up to a phase.
        let d = dark_state(std::f64::consts::PI, 0.4, Branch::L);
        assert!((d[0].norm() - 1.0).abs() < 1e-12);
        assert!(d[1].norm() < 1e-12);
        // On the Bloch equator the two branch dark states are orthogonal
        // for every drive phase.
        for phi in [-2.0, -0.3, 0.0, 0.9, 2.8] {
            let dr = dark_state(std::f64::consts::FRAC_PI_2, phi, Branch::R);
            let dl = dark_state(std::f64::consts::FRAC_PI_2, phi, Branch::L);
            let overlap = dr[0].conj() * dl[0] + dr[1].conj() * dl[1];
            assert!(overlap.norm() < 1e-12, "overlap {overlap} at phi {phi}");
        }
    }

    #[test]
    fn ideal_lambda_dark_state_is_exactly_stationary() {
        let mut m = model(LevelSelection::SingleLambda(Branch::R));
        m.rates = RateTable::default(); // radiative decay only
        let w = m.superoperator().unwrap();
        let d = m.dark_state_vector(Branch::R);
        let rho_d = DensityMatrix::from_pure(m.labels(), &d).unwrap();
        let residual = w.apply(&lindblad::vec_density(rho_d.matrix())).norm();
        assert!(residual < 1e-10 * w.frobenius_norm());

        let mut ml = model(LevelSelection::SingleLambda(Branch::L));
        ml.rates = RateTable::default();
        let w = ml.superoperator().unwrap();
        let d = ml.dark_state_vector(Branch::L);
        let rho_d = DensityMatrix::from_pure(ml.labels(), &d).unwrap();
        let residual = w.apply(&lindblad::vec_density(rho_d.matrix())).norm();
        assert!(residual < 1e-10 * w.frobenius_norm());
    }

    #[test]
    fn ideal_lambda_steady_state_is_the_dark_state() {
        for branch in [Branch::R, Branch::L] {
            for (theta, phi) in [(0.9, 0.0), (1.8, -1.1), (2.4, 2.0)] {
                let m = LambdaModel::new(
                    ghz(0.2),
                    mhz(180.0),
                    mhz(30.0),
                    theta,
                    phi,
                    ghz(2.0),
                    RateTable::default(),
                    LevelSelection::SingleLambda(branch),
                )
                .unwrap();
                let rho = m.steady_state().unwrap();
                let f = fidelity(&rho, &m.dark_state_vector(branch)).unwrap();
                assert!(
                    f >= 0.999,
                    "branch {branch:?} θ={theta} φ={phi}: fidelity {f}"
                );
            }
        }
    }

    #[test]
    fn steady_state_special_cases() {
        // θ=0: only |+1g⟩ is driven, so everything pumps into |0g⟩.
        let mut m = model(LevelSelection::SingleLambda(Branch::R));
        m.theta = 0.0;
        let rho = m.steady_state().unwrap();
        assert!((rho.population(IDX_ZERO_G) - 1.0).abs() < 1e-9);

        // No drive, with ground relaxation: maximally mixed ground qubit.
        let mut m = model(LevelSelection::SingleLambda(Branch::R));
        m.omega = 0.0;
        m.rates.gamma_1 = 1.0e5;
        let rho = m.steady_state().unwrap();
        assert!((rho.population(IDX_PLUS1_G) - 0.5).abs() < 1e-9);
        assert!((rho.population(IDX_ZERO_G) - 0.5).abs() < 1e-9);
        let b = bloch_vector(&rho);
        assert!(b.norm() < 1e-9);
    }

    #[test]
    fn degenerate_cases_are_reported() {
        // No drive and no ground relaxation: both grounds are separately
        // stationary, so the null space is degenerate.
        let mut m = model(LevelSelection::SingleLambda(Branch::R));
        m.omega = 0.0;
        assert!(matches!(
            m.steady_state(),
            Err(NvError::DegenerateSteadyState { .. })
        ));
        // Five-level model with a fully decoupled singlet (no shelving in
        // or out): singlet population is conserved, degenerate again.
        let m = model(LevelSelection::FiveLevel);
        assert_eq!(m.rates.gamma_isc, 0.0);
        assert!(matches!(
            m.steady_state(),
            Err(NvError::DegenerateSteadyState { .. })
        ));
    }

    #[test]
    fn detuning_offset_between_grounds_leaves_excited_population() {
        // On two-photon resonance the steady state is dark (no excited
        // population). Breaking the resonance by offsetting one ground
        // level leaves the drive scattering in steady state.
        let m = LambdaModel::new(
            0.0,
            mhz(180.0),
            mhz(30.0),
            1.2,
            0.3,
            ghz(2.0),
            RateTable::default(),
            LevelSelection::SingleLambda(Branch::R),
        )
        .unwrap();
        let resonant = m.steady_state().unwrap();
        assert!(resonant.population(2) < 1e-9);

        let mut h = m.hamiltonian();
        h.set_entry(0, 0, h.entry(0, 0) + cr(mhz(5.0)));
        let w = superoperator(&h, &m.jump_channels()).unwrap();
        let off_resonant = steady_state_of(&w, m.labels()).unwrap();
        assert!(off_resonant.population(2) > 1e-4);
    }

    #[test]
    fn bloch_vector_examples() {
        let labels = model(LevelSelection::FiveLevel).labels();
        let rho0 = DensityMatrix::basis_state(labels.clone(), IDX_ZERO_G).unwrap();
        let b = bloch_vector(&rho0);
        assert_eq!((b.bx, b.by, b.bz), (0.0, 0.0, 1.0));

        let d = dark_state(std::f64::consts::FRAC_PI_2, 0.0, Branch::R);
        let mut amps = vec![cr(0.0); 5];
        amps[0] = d[0];
        amps[1] = d[1];
        let rho_d = DensityMatrix::from_pure(labels.clone(), &amps).unwrap();
        let b = bloch_vector(&rho_d);
        assert!((b.bx + 1.0).abs() < 1e-12);
        assert!(b.by.abs() < 1e-12);
        assert!(b.bz.abs() < 1e-12);

        // Fully excited state: no ground population, zero-length vector.
        let excited = DensityMatrix::basis_state(labels, IDX_R_E).unwrap();
        assert!(bloch_vector(&excited).norm() == 0.0);

        // The dark-state axis matches the Bloch vector of the dark state.
        let axis = dark_state_axis(std::f64::consts::FRAC_PI_2, 0.0, Branch::R);
        assert!((axis.bx + 1.0).abs() < 1e-12 && axis.by.abs() < 1e-12);
        let axis = dark_state_axis(0.7, 1.9, Branch::R);
        assert!((axis.bx + 0.7f64.sin() * 1.9f64.cos()).abs() < 1e-12);
        assert!((axis.by - 0.7f64.sin() * 1.9f64.sin()).abs() < 1e-12);
        assert!((axis.bz - 0.7f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let m = model(LevelSelection::SingleLambda(Branch::R));
        let d = m.dark_state_vector(Branch::R);
        let rho_d = DensityMatrix::from_pure(m.labels(), &d).unwrap();
        assert!((fidelity(&rho_d, &d).unwrap() - 1.0).abs() < 1e-12);

        // Maximally mixed qubit: fidelity 1/2 with any ground target.
        let half = OperatorMatrix::from_rows(
            m.labels(),
            &[
                vec![cr(0.5), cr(0.0), cr(0.0)],
                vec![cr(0.0), cr(0.5), cr(0.0)],
                vec![cr(0.0), cr(0.0), cr(0.0)],
            ],
        );
        let mixed = DensityMatrix::new(half).unwrap();
        assert!((fidelity(&mixed, &d).unwrap() - 0.5).abs() < 1e-12);

        // Unnormalized targets are normalized internally.
        let doubled: Vec<C64> = d.iter().map(|a| a * cr(2.0)).collect();
        assert!((fidelity(&rho_d, &doubled).unwrap() - 1.0).abs() < 1e-12);

        assert!(fidelity(&rho_d, &[cr(1.0)]).is_err());
        assert!(fidelity(&rho_d, &[cr(0.0); 3]).is_err());
    }

    #[test]
    fn srt_precession_conserves_the_dark_axis_component() {
        // Far-detuned drive with no dissipation: the qubit precesses about
        // the dark-bright axis, so b·n_D stays constant while the
        // transverse component rotates through a full turn per Raman
        // period T = 2π·Δ_L/Ω².
        let theta = std::f64::consts::FRAC_PI_3;
        let phi = 0.7;
        let m = LambdaModel::new(
            ghz(1.0),
            mhz(180.0),
            mhz(50.0),
            theta,
            phi,
            ghz(2.0),
            RateTable {
                gamma_rad: 0.0,
                ..RateTable::default()
            },
            LevelSelection::SingleLambda(Branch::R),
        )
        .unwrap();
        let period = 2.0 * std::f64::consts::PI * m.delta_l / (m.omega * m.omega);
        let rho0 = DensityMatrix::basis_state(m.labels(), IDX_ZERO_G).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0 * period).collect();
        let states = m.evolve(&rho0, &times).unwrap();
        let axis = dark_state_axis(theta, phi, Branch::R);
        let reference = bloch_vector(&states[0]).dot(&axis);
        let mut max_transverse_change = 0.0f64;
        for rho in &states {
            let b = bloch_vector(rho);
            assert!(
                (b.dot(&axis) - reference).abs() <= 0.02,
                "axis component drifted: {} vs {}",
                b.dot(&axis),
                reference
            );
            let b0 = bloch_vector(&states[0]);
            let diff = ((b.bx - b0.bx).powi(2)
                + (b.by - b0.by).powi(2)
                + (b.bz - b0.bz).powi(2))
            .sqrt();
            max_transverse_change = max_transverse_change.max(diff);
        }
        // The rotation is genuine: the vector moves far from its start.
        assert!(max_transverse_change > 0.5);
    }

    #[test]
    fn competing_excited_level_shrinks_the_bloch_vector() {
        // With both excited levels retained, the dark state of the driven
        // Λ is bright for the other, so radiative scattering shrinks the
        // qubit Bloch vector compared to the single-Λ case.
        let make = |selection| {
            LambdaModel::new(
                ghz(1.0),
                mhz(180.0),
                mhz(50.0),
                std::f64::consts::FRAC_PI_2,
                0.0,
                ghz(2.0),
                RateTable::default(),
                selection,
            )
            .unwrap()
        };
        let single = make(LevelSelection::SingleLambda(Branch::R));
        let five = make(LevelSelection::FiveLevel);
        let period = 2.0 * std::f64::consts::PI * single.delta_l
            / (single.omega * single.omega);

        let norm_after = |m: &LambdaModel| {
            let rho0 = DensityMatrix::basis_state(m.labels(), IDX_ZERO_G).unwrap();
            let rho = m.evolve(&rho0, &[period]).unwrap().pop().unwrap();
            bloch_vector(&rho).norm()
        };
        let n_single = norm_after(&single);
        let n_five = norm_after(&five);
        assert!(
            n_five < n_single,
            "five-level norm {n_five} should be below single-Λ norm {n_single}"
        );
    }

    #[test]
    fn cpt_fidelity_rises_to_a_plateau_below_one() {
        // Resonant CPT with intersystem crossing: fidelity with the dark
        // state climbs monotonically to a plateau below 1.
        let m = LambdaModel::new(
            0.0,
            mhz(180.0),
            mhz(10.0),
            std::f64::consts::FRAC_PI_2,
            0.0,
            ghz(2.0),
            RateTable {
                gamma_rad: 1.0 / 13.0e-9,
                gamma_isc: 8.0e6,
                gamma_isc_rev: 3.3e6,
                isc_branching_plus: 0.5,
                gamma_1: 1.0e4,
                gamma_phi: 1.0e5,
            },
            LevelSelection::FiveLevel,
        )
        .unwrap();
        let rho0 = DensityMatrix::basis_state(m.labels(), IDX_ZERO_G).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 50.0e-9).collect();
        let states = m.evolve(&rho0, &times).unwrap();
        let d = m.dark_state_vector(Branch::R);
        let fids: Vec<f64> = states.iter().map(|r| fidelity(r, &d).unwrap()).collect();
        for pair in fids.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-6, "fidelity dipped: {pair:?}");
        }
        let plateau = *fids.last().unwrap();
        assert!(plateau < 1.0);
        // Regression baseline for these exact parameters.
        assert!(
            (plateau - 0.969709).abs() < 1e-4,
            "plateau moved: {plateau}"
        );
    }

    #[test]
    fn model_validation_rejects_bad_parameters() {
        let bad_rate = RateTable {
            gamma_rad: -1.0,
            ..RateTable::default()
        };
        assert!(bad_rate.validate().is_err());
        let bad_branching = RateTable {
            isc_branching_plus: 1.5,
            ..RateTable::default()
        };
        assert!(bad_branching.validate().is_err());
        assert!(LambdaModel::new(
            0.0,
            0.0,
            -1.0,
            1.0,
            0.0,
            0.0,
            RateTable::default(),
            LevelSelection::FiveLevel
        )
        .is_err());
        assert!(LambdaModel::new(
            0.0,
            0.0,
            1.0,
            4.0,
            0.0,
            0.0,
            RateTable::default(),
            LevelSelection::FiveLevel
        )
        .is_err());
    }
}
