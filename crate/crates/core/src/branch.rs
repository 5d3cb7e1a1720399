//! Strain-resolved effective branch Hamiltonians.
//!
//! At large transverse strain the six excited-state levels split into a
//! lower and an upper orbital branch. This module rotates the orbital basis
//! so the strain term becomes −δσ_z, treats the residual inter-branch
//! coupling as a perturbation, and eliminates it to second order with a
//! Schrieffer-Wolff transformation — both numerically (exact generator,
//! H_eff = H₀ + ½[G,V]) and via the printed closed-form O(1/δ) branch
//! matrices with the f_± strain-angle factor.

use crate::constants::MU_B_RAD_PER_S_PER_GAUSS;
use crate::error::{NvError, Result};
use crate::hamiltonian::{h_es_with_options, product_labels};
use crate::numerics::{
    c, commutator, cr, eigh, kron, orbital_labels, orbital_pauli, spin_labels, spin_one,
    OperatorMatrix, C64,
};
use crate::params::{FieldConfig, NvParams};

/// Effective 3×3 spin Hamiltonians of the two orbital branches, with the
/// spin-independent / branch-independent part kept separate.
#[derive(Clone, Debug)]
pub struct BranchHamiltonians {
    /// Perturbative corrections in the lower (−δ) branch, basis (|−1⟩,|0⟩,|+1⟩).
    pub lower: OperatorMatrix,
    /// Perturbative corrections in the upper (+δ) branch, same basis.
    pub upper: OperatorMatrix,
    /// Common part: axial spin-spin splitting, axial Zeeman, and the ∓δ
    /// branch offsets (6×6 diagonal in the rotated frame).
    pub common_shift: OperatorMatrix,
}

fn require_axial_field(f: &FieldConfig) -> Result<()> {
    if f.b_field[0] != 0.0 || f.b_field[1] != 0.0 {
        return Err(NvError::TransverseFieldNotSupported);
    }
    Ok(())
}

/// Orbital rotation that diagonalizes the strain term: the half-angle
/// rotation U = e^{−i(α_s/2)σ_y} maps the strain direction onto −σ_z.
///
/// Returns U† so that `conjugated_by` (which computes V†·M·V) yields
/// U·M·U†.
fn strain_rotation(f: &FieldConfig) -> OperatorMatrix {
    let half = 0.5 * f.strain_angle;
    let (s, c_) = half.sin_cos();
    OperatorMatrix::from_rows(
        orbital_labels(),
        &[vec![cr(c_), cr(s)], vec![cr(-s), cr(c_)]],
    )
}

/// Excited-state Hamiltonian in the strain-aligned orbital frame.
///
/// Conjugates the axial-field Hamiltonian (orbital-Zeeman term excluded, as
/// in the branch derivation) so the strain contribution becomes exactly
/// −δσ_z⊗I₃. Requires a purely axial magnetic field.
pub fn rotated_hamiltonian(p: &NvParams, f: &FieldConfig) -> Result<OperatorMatrix> {
    require_axial_field(f)?;
    let h = h_es_with_options(p, f, false);
    let u = kron(&strain_rotation(f), &OperatorMatrix::identity(spin_labels()));
    Ok(h.conjugated_by(&u, product_labels()))
}

fn block_diagonal_part(m: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix::from_fn(m.labels().to_vec(), |r, col| {
        if (r < 3) == (col < 3) {
            m.entry(r, col)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn block_off_diagonal_part(m: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix::from_fn(m.labels().to_vec(), |r, col| {
        if (r < 3) != (col < 3) {
            m.entry(r, col)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Residual inter-branch coupling in the rotated frame (the block
/// off-diagonal part of the rotated Hamiltonian).
///
/// Valid as a perturbation only when the branch splitting dominates the
/// spin-orbit scale, 2δ > λ.
pub fn coupling_v(p: &NvParams, f: &FieldConfig) -> Result<OperatorMatrix> {
    if 2.0 * f.strain_delta <= p.lambda_so {
        return Err(NvError::StrainTooWeak {
            two_delta: 2.0 * f.strain_delta,
            lambda: p.lambda_so,
        });
    }
    let h = rotated_hamiltonian(p, f)?;
    Ok(block_off_diagonal_part(&h))
}

/// Anti-Hermitian generator G of the block-decoupling transformation,
/// solving [G, H₀] = −V.
///
/// Solved exactly in H₀'s eigenbasis, where the Sylvester equation is
/// elementwise: G_ab = Ṽ_ab/(E_a − E_b). Fails with
/// [`NvError::DegenerateDenominator`] if a coupled pair is (near-)degenerate.
pub fn sw_generator(h0: &OperatorMatrix, v: &OperatorMatrix) -> Result<OperatorMatrix> {
    let (energies, basis) = eigh(h0)?;
    let n = h0.dim();
    let v_tilde = basis.matrix().adjoint() * v.matrix() * basis.matrix();
    let vmax = v_tilde.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let emax = energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let mut g_tilde = nalgebra::DMatrix::<C64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let coupling = v_tilde[(a, b)];
            if coupling.norm() <= 1e-12 * vmax {
                continue;
            }
            let gap = energies[a] - energies[b];
            if gap.abs() < 1e-6 * emax.max(f64::MIN_POSITIVE) {
                return Err(NvError::DegenerateDenominator {
                    a,
                    b,
                    gap: gap.abs(),
                });
            }
            g_tilde[(a, b)] = coupling / cr(gap);
        }
    }
    let g = basis.matrix() * g_tilde * basis.matrix().adjoint();
    Ok(OperatorMatrix::from_matrix(g, h0.labels().to_vec()))
}

/// Branch-basis labels (|−1⟩, |0⟩, |+1⟩) reused for both branches.
fn branch_labels() -> Vec<String> {
    spin_labels()
}

/// Common diagonal part shared by both branches in the rotated frame:
/// D_es(S_z² − 2/3) + g∥μ_B B_z S_z − δσ_z.
fn common_shift(p: &NvParams, f: &FieldConfig) -> OperatorMatrix {
    let s = spin_one();
    let op = orbital_pauli();
    let i2 = OperatorMatrix::identity(orbital_labels());
    let i3 = OperatorMatrix::identity(spin_labels());
    let sz2 = &(&s.sz * &s.sz) - &i3.scaled_re(2.0 / 3.0);
    let spin_part = &sz2.scaled_re(p.d_es)
        + &s.sz
            .scaled_re(p.g_es_par * MU_B_RAD_PER_S_PER_GAUSS * f.b_field[2]);
    &kron(&i2, &spin_part) - &kron(&op.pz, &i3).scaled_re(f.strain_delta)
}

/// The printed O(1/δ) closed-form branch Hamiltonians with the f_± factor.
pub fn h_eff_closed_form(p: &NvParams, f: &FieldConfig) -> Result<BranchHamiltonians> {
    require_axial_field(f)?;
    if f.strain_delta == 0.0 {
        return Err(NvError::ZeroStrain);
    }
    let delta = f.strain_delta;
    let lam = p.lambda_so;
    let d1 = p.delta1;
    let d2 = p.delta2;
    let alpha = f.strain_angle;

    let f_factor = |sign: f64| -> C64 {
        cr(d1 / delta) + c(0.0, 3.0 * alpha).exp().scale(2.0 * (2.0 + sign * lam / delta))
    };
    let phase2 = c(0.0, -2.0 * alpha).exp();
    let phase1 = c(0.0, -alpha).exp();

    let build = |sign: f64| -> OperatorMatrix {
        // sign = −1 for the lower branch, +1 for the upper branch.
        let diag = cr(sign * (lam * lam / (2.0 * delta) + d1 * d1 / (8.0 * delta)));
        let coupling_02 = phase2 * f_factor(-sign) * cr(sign * d2 / 8.0);
        let coupling_12 = -coupling_02;
        let spin_flip = phase1.scale(0.5 * d1 * (lam / delta + sign));
        OperatorMatrix::from_rows(
            branch_labels(),
            &[
                vec![diag, coupling_02, spin_flip],
                vec![coupling_02.conj(), cr(0.0), coupling_12],
                vec![spin_flip.conj(), coupling_12.conj(), diag],
            ],
        )
    };

    Ok(BranchHamiltonians {
        lower: build(-1.0),
        upper: build(1.0),
        common_shift: common_shift(p, f),
    })
}

/// Second-order branch Hamiltonians from the numerically solved generator:
/// H_eff = H₀ + ½[G, V], with the common shift removed from the blocks.
pub fn h_eff_numeric(p: &NvParams, f: &FieldConfig) -> Result<BranchHamiltonians> {
    let h = rotated_hamiltonian(p, f)?;
    if 2.0 * f.strain_delta <= p.lambda_so {
        return Err(NvError::StrainTooWeak {
            two_delta: 2.0 * f.strain_delta,
            lambda: p.lambda_so,
        });
    }
    let h0 = block_diagonal_part(&h);
    let v = block_off_diagonal_part(&h);
    let g = sw_generator(&h0, &v)?;
    let correction = commutator(&g, &v).scaled_re(0.5);
    let h_eff = &h0 + &correction;
    let without_shift = &h_eff - &common_shift(p, f);
    let lower = without_shift
        .submatrix(&[0, 1, 2])
        .relabeled(branch_labels());
    let upper = without_shift
        .submatrix(&[3, 4, 5])
        .relabeled(branch_labels());
    Ok(BranchHamiltonians {
        lower,
        upper,
        common_shift: common_shift(p, f),
    })
}

/// The strain-angle factor f_±(α_s) = Δ1/δ + 2e^{3iα_s}(2 ± λ/δ) governing
/// the Δ2 spin-mixing elements.
pub fn f_pm(p: &NvParams, f: &FieldConfig, sign: f64) -> C64 {
    cr(p.delta1 / f.strain_delta)
        + c(0.0, 3.0 * f.strain_angle)
            .exp()
            .scale(2.0 * (2.0 + sign * p.lambda_so / f.strain_delta))
}
