//! Fine-structure Hamiltonians of the NV center ground and excited states.
//!
//! The excited-state orbital doublet ⊗ spin-triplet lives in the six-level
//! product basis (|X,−1⟩, |X,0⟩, |X,+1⟩, |Y,−1⟩, |Y,0⟩, |Y,+1⟩), built as
//! kron(orbital, spin) with orbital-major ordering. Every builder returns the
//! operator in that fixed basis with labels attached; energies are angular
//! frequencies (rad/s).

use crate::constants::MU_B_RAD_PER_S_PER_GAUSS;
use crate::error::{NvError, Result};
use crate::numerics::{
    anticommutator, c, cr, eigh, kron, orbital_labels, orbital_pauli, spin_labels, spin_one,
    OperatorMatrix, C64, I,
};
use crate::params::{FieldConfig, NvParams};

/// Labels of the six-level product basis, orbital-major.
pub fn product_labels() -> Vec<String> {
    let mut labels = Vec::with_capacity(6);
    for orb in orbital_labels() {
        for spin in spin_labels() {
            labels.push(format!("{orb}⊗{spin}"));
        }
    }
    labels
}

/// Labels of the spin-orbit eigenbasis at zero strain and field.
pub fn spin_orbit_labels() -> Vec<String> {
    vec![
        "A1".into(),
        "A2".into(),
        "E1".into(),
        "E2".into(),
        "Ex".into(),
        "Ey".into(),
    ]
}

/// Ground-state triplet Hamiltonian: zero-field splitting plus isotropic
/// Zeeman coupling, 3×3 over (|−1⟩, |0⟩, |+1⟩).
pub fn h_gs(p: &NvParams, f: &FieldConfig) -> OperatorMatrix {
    let s = spin_one();
    let sz2 = &s.sz * &s.sz;
    let id = OperatorMatrix::identity(spin_labels());
    let zfs = (&sz2 - &id.scaled_re(2.0 / 3.0)).scaled_re(p.d_gs);
    let mu = p.g_gs * MU_B_RAD_PER_S_PER_GAUSS;
    let zeeman = &(&s.sx.scaled_re(mu * f.b_field[0]) + &s.sy.scaled_re(mu * f.b_field[1]))
        + &s.sz.scaled_re(mu * f.b_field[2]);
    &zfs + &zeeman
}

/// Excited-state axial spin-orbit interaction, −λ·(orbital σ_y)⊗S_z.
pub fn h_so(p: &NvParams) -> OperatorMatrix {
    let op = orbital_pauli();
    let s = spin_one();
    kron(&op.py, &s.sz).scaled_re(-p.lambda_so)
}

/// Excited-state spin-spin interaction: axial D_es part plus the two
/// transverse couplings Δ1 (Δm_s = ±2, orbital-flipping) and Δ2
/// (Δm_s = ±1, orbital-mixing).
pub fn h_ss(p: &NvParams) -> OperatorMatrix {
    let op = orbital_pauli();
    let s = spin_one();
    let i2 = OperatorMatrix::identity(orbital_labels());
    let id3 = OperatorMatrix::identity(spin_labels());

    let sz2_shifted = &(&s.sz * &s.sz) - &id3.scaled_re(2.0 / 3.0);
    let axial = kron(&i2, &sz2_shifted).scaled_re(p.d_es);

    let s_plus_sq = &s.s_plus * &s.s_plus;
    let s_minus_sq = &s.s_minus * &s.s_minus;
    let delta1_term = (&kron(&op.p_minus, &s_plus_sq) + &kron(&op.p_plus, &s_minus_sq))
        .scaled_re(-p.delta1 / 4.0);

    let acp = anticommutator(&s.s_plus, &s.sz);
    let acm = anticommutator(&s.s_minus, &s.sz);
    let delta2_term = (&kron(&op.p_plus, &acp) + &kron(&op.p_minus, &acm))
        .scaled_re(p.delta2 / (2.0 * std::f64::consts::SQRT_2));

    &(&axial + &delta1_term) + &delta2_term
}

/// Excited-state Zeeman interaction with anisotropic g-factors, identical in
/// both orbital branches.
pub fn h_zeeman(p: &NvParams, f: &FieldConfig) -> OperatorMatrix {
    let mu = MU_B_RAD_PER_S_PER_GAUSS;
    let par = p.g_es_par * mu * f.b_field[2];
    let perp = p.g_es_perp * mu;
    let b_plus = c(perp * f.b_field[0], perp * f.b_field[1]);
    let m = OperatorMatrix::from_rows(
        spin_labels(),
        &[
            vec![cr(-par), b_plus, cr(0.0)],
            vec![b_plus.conj(), cr(0.0), b_plus],
            vec![cr(0.0), b_plus.conj(), cr(par)],
        ],
    );
    let i2 = OperatorMatrix::identity(orbital_labels());
    kron(&i2, &m)
}

/// Orbital Zeeman (diamagnetic-like) interaction μ_B·L_z·B_z·(orbital σ_y)⊗I₃.
pub fn h_diamagnetic(p: &NvParams, f: &FieldConfig) -> OperatorMatrix {
    let op = orbital_pauli();
    let i3 = OperatorMatrix::identity(spin_labels());
    kron(&op.py, &i3).scaled_re(MU_B_RAD_PER_S_PER_GAUSS * p.l_z * f.b_field[2])
}

/// Transverse strain / electric-field perturbation on the orbital doublet;
/// the two branches split by the full 2δ.
pub fn h_strain(f: &FieldConfig) -> OperatorMatrix {
    let (sin_a, cos_a) = f.strain_angle.sin_cos();
    let d = f.strain_delta;
    let orb = OperatorMatrix::from_rows(
        orbital_labels(),
        &[
            vec![cr(-d * cos_a), cr(d * sin_a)],
            vec![cr(d * sin_a), cr(d * cos_a)],
        ],
    );
    let i3 = OperatorMatrix::identity(spin_labels());
    kron(&orb, &i3)
}

/// Full six-level excited-state Hamiltonian: spin-orbit + spin-spin +
/// Zeeman + orbital-Zeeman + strain.
pub fn h_es_total(p: &NvParams, f: &FieldConfig) -> OperatorMatrix {
    h_es_with_options(p, f, true)
}

/// Excited-state Hamiltonian with the orbital-Zeeman term optionally
/// excluded (it shifts levels by ≪ the other scales and is often dropped
/// in scans).
pub fn h_es_with_options(
    p: &NvParams,
    f: &FieldConfig,
    include_diamagnetic: bool,
) -> OperatorMatrix {
    let mut h = &(&h_so(p) + &h_ss(p)) + &(&h_zeeman(p, f) + &h_strain(f));
    if include_diamagnetic {
        h = &h + &h_diamagnetic(p, f);
    }
    h
}

/// Unitary whose columns are the six spin-orbit eigenstates
/// (|A₁⟩, |A₂⟩, |E₁⟩, |E₂⟩, |E_x⟩, |E_y⟩) expressed in the product basis.
pub fn spin_orbit_basis() -> OperatorMatrix {
    let h = cr(0.5);
    let ih = I.scale(0.5);
    // Columns in product-basis coordinates (|X,−1⟩..|Y,+1⟩).
    let cols: [[C64; 6]; 6] = [
        // |A₁⟩ = (|E₋⟩|+1⟩ − |E₊⟩|−1⟩)/√2 expanded over X/Y
        [-ih, cr(0.0), -ih, h, cr(0.0), -h],
        // |A₂⟩
        [h, cr(0.0), -h, ih, cr(0.0), ih],
        // |E₁⟩
        [-ih, cr(0.0), -ih, -h, cr(0.0), h],
        // |E₂⟩
        [-h, cr(0.0), h, ih, cr(0.0), ih],
        // |E_x⟩ = −|Y,0⟩
        [cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(-1.0), cr(0.0)],
        // |E_y⟩ = |X,0⟩
        [cr(0.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0)],
    ];
    OperatorMatrix::from_fn(product_labels(), |r, c| cols[c][r])
}

/// Express a product-basis operator in the spin-orbit eigenbasis, U†·m·U.
///
/// Self-checks that the internal basis matrix is unitary to 1e-12 and
/// returns [`NvError::NotUnitary`] otherwise.
pub fn to_spin_orbit_basis(m: &OperatorMatrix) -> Result<OperatorMatrix> {
    let u = spin_orbit_basis();
    let gram = &u.adjoint() * &u;
    let dev = (&gram - &OperatorMatrix::identity(product_labels())).max_abs();
    if dev > 1e-12 {
        return Err(NvError::NotUnitary { max_dev: dev });
    }
    Ok(m.conjugated_by(&u, spin_orbit_labels()))
}

/// Which external parameter a fine-structure scan sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanAxis {
    /// Strain half-splitting δ (rad/s).
    Strain,
    /// Axial magnetic field B_z (gauss).
    Bz,
}

/// Eigenvalue table from sweeping strain or axial field.
#[derive(Clone, Debug)]
pub struct FineStructureScan {
    pub axis: ScanAxis,
    /// Swept parameter values (rad/s for strain, gauss for B_z).
    pub values: Vec<f64>,
    /// Eigenvalues sorted ascending at each point (rad/s).
    pub sorted: Vec<Vec<f64>>,
    /// Eigenvalues continued adiabatically: column k follows, by maximum
    /// eigenvector overlap, the state that started as the k-th lowest.
    pub tracked: Vec<Vec<f64>>,
}

/// Diagonalize the excited-state Hamiltonian along a parameter sweep.
pub fn fine_structure_scan(
    p: &NvParams,
    f_template: &FieldConfig,
    axis: ScanAxis,
    values: &[f64],
    include_diamagnetic: bool,
) -> Result<FineStructureScan> {
    if values.is_empty() {
        return Err(NvError::EmptyScan);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(NvError::InvalidParameter(
            "scan values must be finite".into(),
        ));
    }
    let mut sorted = Vec::with_capacity(values.len());
    let mut tracked = Vec::with_capacity(values.len());
    let mut prev_vectors: Option<OperatorMatrix> = None;
    // Permutation from tracked slot to current sorted index.
    let mut slot_of: Vec<usize> = (0..6).collect();

    for &v in values {
        let mut f = f_template.clone();
        match axis {
            ScanAxis::Strain => f.strain_delta = v,
            ScanAxis::Bz => f.b_field[2] = v,
        }
        let h = h_es_with_options(p, &f, include_diamagnetic);
        let (vals, vecs) = eigh(&h)?;
        sorted.push(vals.clone());

        if let Some(prev) = &prev_vectors {
            // Max-overlap assignment between previous tracked vectors and
            // the new eigenvectors, greedy on the largest overlap first;
            // ties resolved by (previous slot, new index) order.
            let overlap = prev.matrix().adjoint() * vecs.matrix();
            let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(36);
            for j in 0..6 {
                for k in 0..6 {
                    pairs.push((j, k, overlap[(j, k)].norm()));
                }
            }
            pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
            let mut new_slot_of = vec![usize::MAX; 6];
            let mut used_new = [false; 6];
            let mut used_prev = [false; 6];
            for (j, k, _) in pairs {
                if !used_prev[j] && !used_new[k] {
                    used_prev[j] = true;
                    used_new[k] = true;
                    new_slot_of[j] = k;
                }
            }
            slot_of = new_slot_of;
        }
        tracked.push(slot_of.iter().map(|&k| vals[k]).collect());

        // The tracked vectors, in slot order, become the reference.
        let mut reordered = OperatorMatrix::zeros(h.labels().to_vec());
        for (slot, &k) in slot_of.iter().enumerate() {
            for r in 0..6 {
                reordered.set_entry(r, slot, vecs.entry(r, k));
            }
        }
        prev_vectors = Some(reordered);
    }

    Ok(FineStructureScan {
        axis,
        values: values.to_vec(),
        sorted,
        tracked,
    })
}
