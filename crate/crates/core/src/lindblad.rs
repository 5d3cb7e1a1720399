//! Lindblad master-equation machinery.
//!
//! Implements the open-system pieces shared by the dissipative models in
//! this crate: column-stacking vectorization of density matrices, assembly
//! of the Lindblad superoperator W from a Hamiltonian and a list of jump
//! channels, a validated [`DensityMatrix`] type, and exact propagation
//! ρ(t) = e^{W·t}·ρ(0).
//!
//! Vectorization convention: **column stacking**, vec(ρ)[col·n + row] =
//! ρ[row, col], so vec(A·ρ·B) = (Bᵀ ⊗ A)·vec(ρ). This makes superoperator
//! matrices bit-comparable across implementations that document the same
//! convention.

use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;

use crate::error::{NvError, Result};
use crate::numerics::{self, cr, C64, OperatorMatrix};

/// Column-stacks a density (or any square) matrix into a length-n² vector.
pub fn vec_density(m: &OperatorMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.matrix().as_slice())
}

/// Inverse of [`vec_density`]: reshapes a length-n² vector into an n×n
/// matrix carrying the given basis labels.
pub fn unvec_density(v: &DVector<C64>, labels: Vec<String>) -> Result<OperatorMatrix> {
    let n = labels.len();
    if v.len() != n * n {
        return Err(NvError::InvalidState(format!(
            "vectorized state has length {}, expected {}",
            v.len(),
            n * n
        )));
    }
    Ok(OperatorMatrix::from_matrix(
        DMatrix::from_column_slice(n, n, v.as_slice()),
        labels,
    ))
}

/// One dissipative channel: jump operator L acting at the given rate, i.e.
/// the term rate·(L ρ L† − ½{L†L, ρ}) of the master equation.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    /// Transition rate [1/s]; must be ≥ 0.
    pub rate: f64,
    /// Jump operator L (same basis and dimension as the Hamiltonian).
    pub operator: OperatorMatrix,
}

/// Deterministic labels for the n²-dimensional vectorized space.
fn vectorized_labels(labels: &[String]) -> Vec<String> {
    let n = labels.len();
    let mut out = Vec::with_capacity(n * n);
    for col in 0..n {
        for row in 0..n {
            out.push(format!("{}|{}", labels[row], labels[col]));
        }
    }
    out
}

/// Assembles the vectorized Lindblad generator
/// W = i(Hᵀ⊗I − I⊗H) + Σ_k rate_k·[conj(L_k)⊗L_k − ½I⊗(L_k†L_k) − ½(L_k†L_k)ᵀ⊗I],
/// so that vec(ρ̇) = W·vec(ρ) reproduces ρ̇ = i[ρ,H] + Σ_k rate_k·𝒟[L_k]ρ.
pub fn superoperator(h: &OperatorMatrix, channels: &[JumpChannel]) -> Result<OperatorMatrix> {
    let labels = h.labels().to_vec();
    let eye = OperatorMatrix::identity(labels.clone());
    let big_labels = vectorized_labels(&labels);

    let mut w = (&numerics::kron(&h.transpose(), &eye) - &numerics::kron(&eye, h))
        .scaled(crate::numerics::c(0.0, 1.0));
    for ch in channels {
        if !(ch.rate.is_finite() && ch.rate >= 0.0) {
            return Err(NvError::InvalidParameter(format!(
                "jump rate must be finite and non-negative, got {}",
                ch.rate
            )));
        }
        if ch.operator.dim() != h.dim() {
            return Err(NvError::InvalidParameter(format!(
                "jump operator dimension {} does not match Hamiltonian dimension {}",
                ch.operator.dim(),
                h.dim()
            )));
        }
        if ch.rate == 0.0 {
            continue;
        }
        // Jump operators are interpreted in the Hamiltonian's basis.
        let l = &ch.operator.clone().relabeled(labels.clone());
        let ldl = &l.adjoint() * l;
        let gain = numerics::kron(&l.conjugate(), l);
        let loss = &numerics::kron(&eye, &ldl).scaled_re(0.5)
            + &numerics::kron(&ldl.transpose(), &eye).scaled_re(0.5);
        w = &w + &(&gain - &loss).scaled_re(ch.rate);
    }
    Ok(w.relabeled(big_labels))
}

/// The trace functional as a row vector on the vectorized space:
/// t†·vec(ρ) = Tr(ρ). Every trace-preserving generator satisfies t†·W = 0.
pub fn trace_functional(dim: usize) -> DVector<C64> {
    let mut t = DVector::zeros(dim * dim);
    for i in 0..dim {
        t[i * dim + i] = cr(1.0);
    }
    t
}

/// A validated quantum state: Hermitian to 1e-10, unit trace to 1e-10, and
/// no eigenvalue below −1e-9.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: OperatorMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a density matrix.
    pub fn new(matrix: OperatorMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_deviation();
        if herm > 1e-10 {
            return Err(NvError::InvalidState(format!(
                "density matrix is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(NvError::InvalidState(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let (evals, _) = numerics::eigh(&matrix.hermitian_part())?;
        if let Some(min) = evals.first() {
            if *min < -1e-9 {
                return Err(NvError::InvalidState(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// Pure state |ψ⟩⟨ψ| from normalized amplitudes in the given basis.
    pub fn from_pure(labels: Vec<String>, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != labels.len() {
            return Err(NvError::InvalidState(format!(
                "{} amplitudes for {} basis labels",
                amplitudes.len(),
                labels.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(NvError::InvalidState(format!(
                "state vector norm² is {norm_sq}, expected 1"
            )));
        }
        let m = OperatorMatrix::from_fn(labels, |r, c_| {
            amplitudes[r] * amplitudes[c_].conj() / cr(norm_sq)
        });
        Self::new(m)
    }

    /// The basis-state projector |i⟩⟨i|.
    pub fn basis_state(labels: Vec<String>, index: usize) -> Result<Self> {
        let n = labels.len();
        if index >= n {
            return Err(NvError::InvalidState(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut amplitudes = vec![cr(0.0); n];
        amplitudes[index] = cr(1.0);
        Self::from_pure(labels, &amplitudes)
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> OperatorMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Population of basis state `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.matrix.entry(i, i).re
    }

    /// Purity Tr(ρ²).
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Exact propagation of a density matrix under a fixed generator W:
/// returns ρ(t_k) = e^{W·t_k}·ρ(0) for every requested time.
///
/// `times` must be finite, non-negative, and non-decreasing. Propagators for
/// repeated step sizes are computed once and reused, so uniform grids cost a
/// single matrix exponential.
pub fn evolve_superoperator(
    w: &OperatorMatrix,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let n = rho0.dim();
    if w.dim() != n * n {
        return Err(NvError::InvalidState(format!(
            "superoperator dimension {} does not match state dimension {}²",
            w.dim(),
            n
        )));
    }
    let mut previous = 0.0f64;
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(NvError::InvalidParameter(format!(
                "evolution times must be finite and non-negative, got {t}"
            )));
        }
        if t < previous {
            return Err(NvError::InvalidParameter(
                "evolution times must be non-decreasing".into(),
            ));
        }
        previous = t;
    }

    let labels = rho0.matrix().labels().to_vec();
    let mut propagator_cache: HashMap<u64, OperatorMatrix> = HashMap::new();
    let mut state = vec_density(rho0.matrix());
    let mut now = 0.0f64;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            let step = propagator_cache
                .entry(dt.to_bits())
                .or_insert_with(|| numerics::expm(&w.scaled_re(dt)));
            state = step.apply(&state);
            now = t;
        }
        let rho = unvec_density(&state, labels.clone())?;
        // Scrub round-off so long evolutions keep satisfying the validated
        // invariants exactly as stated.
        out.push(DensityMatrix::new(rho.hermitian_part())?);
    }
    Ok(out)
}
