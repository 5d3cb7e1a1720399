//! Python bindings for the NV-center simulation library.
//!
//! The extension module `nvsim_py._native` mirrors the Rust API: labeled
//! complex operators, fine-structure Hamiltonians, effective orbital-branch
//! reductions, dispersive spin-light coupling, Λ-system Lindblad dynamics,
//! and ultrafast pulse-pair control. All frequencies are angular (rad/s)
//! unless a name says otherwise; magnetic fields are in gauss.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nvsim::lambda::{self, Branch, LevelSelection, RateTable};
use nvsim::lindblad::{self, JumpChannel};
use nvsim::numerics::{self, OperatorMatrix};
use nvsim::polariton::{self, FaradayMode, PhaseMode, Transition};
use nvsim::ultrafast::{self, PulseKind, TdqtBackend, TdqtPoint};
use nvsim::{branch, constants as core_constants, hamiltonian, units, FieldConfig, NvError, NvParams};

fn pyerr(e: NvError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_branch(name: &str) -> PyResult<Branch> {
    match name {
        "r" | "R" => Ok(Branch::R),
        "l" | "L" => Ok(Branch::L),
        other => Err(PyValueError::new_err(format!(
            "unknown branch {other:?} (expected \"r\" or \"l\")"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Labeled operators
// ---------------------------------------------------------------------------

/// A square complex matrix over a labeled basis.
#[pyclass(module = "nvsim_py", name = "Operator", from_py_object)]
#[derive(Clone)]
struct PyOperator {
    inner: OperatorMatrix,
}

fn rows_of(m: &OperatorMatrix) -> Vec<Vec<Complex64>> {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| m.entry(i, j)).collect())
        .collect()
}

fn check_same_basis(a: &OperatorMatrix, b: &OperatorMatrix) -> PyResult<()> {
    if a.labels() != b.labels() {
        return Err(PyValueError::new_err(format!(
            "operator bases differ: {:?} vs {:?}",
            a.labels(),
            b.labels()
        )));
    }
    Ok(())
}

#[pymethods]
impl PyOperator {
    /// Builds an operator from basis labels and a nested list of complex
    /// entries (row-major, square, one row per label).
    #[new]
    fn new(labels: Vec<String>, rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(PyValueError::new_err("at least one basis label required"));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err(format!(
                "matrix must be {n}×{n} to match the {n} labels"
            )));
        }
        Ok(Self {
            inner: OperatorMatrix::from_rows(labels, &rows),
        })
    }

    /// Identity operator on the given basis.
    #[staticmethod]
    fn identity(labels: Vec<String>) -> PyResult<Self> {
        if labels.is_empty() {
            return Err(PyValueError::new_err("at least one basis label required"));
        }
        Ok(Self {
            inner: OperatorMatrix::identity(labels),
        })
    }

    /// Zero operator on the given basis.
    #[staticmethod]
    fn zeros(labels: Vec<String>) -> PyResult<Self> {
        if labels.is_empty() {
            return Err(PyValueError::new_err("at least one basis label required"));
        }
        Ok(Self {
            inner: OperatorMatrix::zeros(labels),
        })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Entries as a nested list of complex numbers (row-major).
    fn to_list(&self) -> Vec<Vec<Complex64>> {
        rows_of(&self.inner)
    }

    /// Single entry by (row, column) index.
    fn entry(&self, row: usize, col: usize) -> PyResult<Complex64> {
        let n = self.inner.dim();
        if row >= n || col >= n {
            return Err(PyValueError::new_err(format!(
                "index ({row}, {col}) out of range for dimension {n}"
            )));
        }
        Ok(self.inner.entry(row, col))
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    fn hermiticity_deviation(&self) -> f64 {
        self.inner.hermiticity_deviation()
    }

    /// Copy with the same entries over new basis labels.
    fn relabeled(&self, labels: Vec<String>) -> PyResult<Self> {
        if labels.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} labels, got {}",
                self.inner.dim(),
                labels.len()
            )));
        }
        Ok(Self {
            inner: self.inner.relabeled(labels),
        })
    }

    /// Principal submatrix over the given basis indices.
    fn submatrix(&self, indices: Vec<usize>) -> PyResult<Self> {
        let n = self.inner.dim();
        if indices.is_empty() || indices.iter().any(|&i| i >= n) {
            return Err(PyValueError::new_err(format!(
                "indices must be non-empty and < {n}"
            )));
        }
        Ok(Self {
            inner: self.inner.submatrix(&indices),
        })
    }

    /// Scales every entry by a complex factor.
    fn scaled(&self, factor: Complex64) -> Self {
        Self {
            inner: self.inner.scaled(factor),
        }
    }

    /// Eigendecomposition of a Hermitian operator: ascending eigenvalues and
    /// the unitary whose columns are the matching eigenvectors.
    fn eigh(&self) -> PyResult<(Vec<f64>, Self)> {
        let (vals, vecs) = numerics::eigh(&self.inner).map_err(pyerr)?;
        Ok((vals, Self { inner: vecs }))
    }

    /// Matrix exponential.
    fn expm(&self) -> Self {
        Self {
            inner: numerics::expm(&self.inner),
        }
    }

    /// Singular values, descending.
    fn singular_values(&self) -> Vec<f64> {
        numerics::singular_values(&self.inner)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        check_same_basis(&self.inner, &other.inner)?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        check_same_basis(&self.inner, &other.inner)?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    /// Matrix product.
    fn __matmul__(&self, other: &Self) -> PyResult<Self> {
        check_same_basis(&self.inner, &other.inner)?;
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Operator(dim={}, labels={:?})",
            self.inner.dim(),
            self.inner.labels()
        )
    }
}

/// Kronecker product; basis labels combine as "a⊗b".
#[pyfunction]
fn kron(a: &PyOperator, b: &PyOperator) -> PyOperator {
    PyOperator {
        inner: numerics::kron(&a.inner, &b.inner),
    }
}

/// Commutator [a, b] on a shared basis.
#[pyfunction]
fn commutator(a: &PyOperator, b: &PyOperator) -> PyResult<PyOperator> {
    check_same_basis(&a.inner, &b.inner)?;
    Ok(PyOperator {
        inner: numerics::commutator(&a.inner, &b.inner),
    })
}

// ---------------------------------------------------------------------------
// Model parameters and static conditions
// ---------------------------------------------------------------------------

/// Fine-structure and optical parameters of a single NV center.
///
/// Constructed with measured defaults; pass keywords to override. All
/// splittings are angular frequencies (rad/s); `gamma_r` is a plain rate
/// (1/s) and `e_ph` an energy (J).
#[pyclass(module = "nvsim_py", name = "Params", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: NvParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (*, lambda_so=None, d_es=None, delta1=None, delta2=None, d_gs=None,
                        g_gs=None, g_es_par=None, g_es_perp=None, l_z=None, gamma_r=None,
                        e_ph=None, n_diamond=None, f_dw=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        lambda_so: Option<f64>,
        d_es: Option<f64>,
        delta1: Option<f64>,
        delta2: Option<f64>,
        d_gs: Option<f64>,
        g_gs: Option<f64>,
        g_es_par: Option<f64>,
        g_es_perp: Option<f64>,
        l_z: Option<f64>,
        gamma_r: Option<f64>,
        e_ph: Option<f64>,
        n_diamond: Option<f64>,
        f_dw: Option<f64>,
    ) -> PyResult<Self> {
        let mut p = NvParams::default();
        if let Some(v) = lambda_so {
            p.lambda_so = v;
        }
        if let Some(v) = d_es {
            p.d_es = v;
        }
        if let Some(v) = delta1 {
            p.delta1 = v;
        }
        if let Some(v) = delta2 {
            p.delta2 = v;
        }
        if let Some(v) = d_gs {
            p.d_gs = v;
        }
        if let Some(v) = g_gs {
            p.g_gs = v;
        }
        if let Some(v) = g_es_par {
            p.g_es_par = v;
        }
        if let Some(v) = g_es_perp {
            p.g_es_perp = v;
        }
        if let Some(v) = l_z {
            p.l_z = v;
        }
        if let Some(v) = gamma_r {
            p.gamma_r = v;
        }
        if let Some(v) = e_ph {
            p.e_ph = v;
        }
        if let Some(v) = n_diamond {
            p.n_diamond = v;
        }
        if let Some(v) = f_dw {
            p.f_dw = v;
        }
        p.validate().map_err(pyerr)?;
        Ok(Self { inner: p })
    }

    #[getter]
    fn lambda_so(&self) -> f64 {
        self.inner.lambda_so
    }
    #[setter]
    fn set_lambda_so(&mut self, v: f64) {
        self.inner.lambda_so = v;
    }
    #[getter]
    fn d_es(&self) -> f64 {
        self.inner.d_es
    }
    #[setter]
    fn set_d_es(&mut self, v: f64) {
        self.inner.d_es = v;
    }
    #[getter]
    fn delta1(&self) -> f64 {
        self.inner.delta1
    }
    #[setter]
    fn set_delta1(&mut self, v: f64) {
        self.inner.delta1 = v;
    }
    #[getter]
    fn delta2(&self) -> f64 {
        self.inner.delta2
    }
    #[setter]
    fn set_delta2(&mut self, v: f64) {
        self.inner.delta2 = v;
    }
    #[getter]
    fn d_gs(&self) -> f64 {
        self.inner.d_gs
    }
    #[setter]
    fn set_d_gs(&mut self, v: f64) {
        self.inner.d_gs = v;
    }
    #[getter]
    fn g_gs(&self) -> f64 {
        self.inner.g_gs
    }
    #[setter]
    fn set_g_gs(&mut self, v: f64) {
        self.inner.g_gs = v;
    }
    #[getter]
    fn g_es_par(&self) -> f64 {
        self.inner.g_es_par
    }
    #[setter]
    fn set_g_es_par(&mut self, v: f64) {
        self.inner.g_es_par = v;
    }
    #[getter]
    fn g_es_perp(&self) -> f64 {
        self.inner.g_es_perp
    }
    #[setter]
    fn set_g_es_perp(&mut self, v: f64) {
        self.inner.g_es_perp = v;
    }
    #[getter]
    fn l_z(&self) -> f64 {
        self.inner.l_z
    }
    #[setter]
    fn set_l_z(&mut self, v: f64) {
        self.inner.l_z = v;
    }
    #[getter]
    fn gamma_r(&self) -> f64 {
        self.inner.gamma_r
    }
    #[setter]
    fn set_gamma_r(&mut self, v: f64) {
        self.inner.gamma_r = v;
    }
    #[getter]
    fn e_ph(&self) -> f64 {
        self.inner.e_ph
    }
    #[setter]
    fn set_e_ph(&mut self, v: f64) {
        self.inner.e_ph = v;
    }
    #[getter]
    fn n_diamond(&self) -> f64 {
        self.inner.n_diamond
    }
    #[setter]
    fn set_n_diamond(&mut self, v: f64) {
        self.inner.n_diamond = v;
    }
    #[getter]
    fn f_dw(&self) -> f64 {
        self.inner.f_dw
    }
    #[setter]
    fn set_f_dw(&mut self, v: f64) {
        self.inner.f_dw = v;
    }

    /// Checks the physical-range invariants, raising ValueError on failure.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Static magnetic field (gauss) and crystal strain.
///
/// `strain_delta` is half the orbital-branch splitting (rad/s); the branches
/// separate by 2δ. `strain_angle` is the in-plane strain direction (rad).
#[pyclass(module = "nvsim_py", name = "Field", from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: FieldConfig,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (b_field=(0.0, 0.0, 0.0), strain_delta=0.0, strain_angle=0.0))]
    fn new(b_field: (f64, f64, f64), strain_delta: f64, strain_angle: f64) -> Self {
        Self {
            inner: FieldConfig {
                b_field: [b_field.0, b_field.1, b_field.2],
                strain_delta,
                strain_angle,
            },
        }
    }

    /// Purely axial magnetic field (gauss), no strain.
    #[staticmethod]
    fn axial_b(bz: f64) -> Self {
        Self {
            inner: FieldConfig::axial_b(bz),
        }
    }

    /// Strain of half-splitting δ (rad/s) at angle α_s, no magnetic field.
    #[staticmethod]
    fn strain(delta: f64, angle: f64) -> Self {
        Self {
            inner: FieldConfig::strain(delta, angle),
        }
    }

    #[getter]
    fn b_field(&self) -> (f64, f64, f64) {
        let b = self.inner.b_field;
        (b[0], b[1], b[2])
    }
    #[setter]
    fn set_b_field(&mut self, b: (f64, f64, f64)) {
        self.inner.b_field = [b.0, b.1, b.2];
    }
    #[getter]
    fn strain_delta(&self) -> f64 {
        self.inner.strain_delta
    }
    #[setter]
    fn set_strain_delta(&mut self, v: f64) {
        self.inner.strain_delta = v;
    }
    #[getter]
    fn strain_angle(&self) -> f64 {
        self.inner.strain_angle
    }
    #[setter]
    fn set_strain_angle(&mut self, v: f64) {
        self.inner.strain_angle = v;
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

// ---------------------------------------------------------------------------
// Fine-structure Hamiltonians
// ---------------------------------------------------------------------------

/// Basis labels of the six-level orbital ⊗ spin product space.
#[pyfunction]
fn product_labels() -> Vec<String> {
    hamiltonian::product_labels()
}

/// Labels of the zero-strain/zero-field symmetry eigenbasis.
#[pyfunction]
fn spin_orbit_labels() -> Vec<String> {
    hamiltonian::spin_orbit_labels()
}

/// Ground-state spin Hamiltonian (3×3): zero-field splitting plus Zeeman.
#[pyfunction]
fn h_gs(p: &PyParams, f: &PyField) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_gs(&p.inner, &f.inner),
    }
}

/// Excited-state axial spin-orbit interaction (6×6).
#[pyfunction]
fn h_so(p: &PyParams) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_so(&p.inner),
    }
}

/// Excited-state spin-spin interaction (6×6).
#[pyfunction]
fn h_ss(p: &PyParams) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_ss(&p.inner),
    }
}

/// Excited-state Zeeman interaction (6×6).
#[pyfunction]
fn h_zeeman(p: &PyParams, f: &PyField) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_zeeman(&p.inner, &f.inner),
    }
}

/// Orbital diamagnetic response to an axial field (6×6).
#[pyfunction]
fn h_diamagnetic(p: &PyParams, f: &PyField) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_diamagnetic(&p.inner, &f.inner),
    }
}

/// Crystal-strain coupling in the orbital doublet (6×6).
#[pyfunction]
fn h_strain(f: &PyField) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_strain(&f.inner),
    }
}

/// Full excited-state fine-structure Hamiltonian (6×6).
#[pyfunction]
#[pyo3(signature = (p, f, include_diamagnetic=true))]
fn h_es_total(p: &PyParams, f: &PyField, include_diamagnetic: bool) -> PyOperator {
    PyOperator {
        inner: hamiltonian::h_es_with_options(&p.inner, &f.inner, include_diamagnetic),
    }
}

/// Unitary whose columns are the zero-strain/zero-field symmetry eigenstates.
#[pyfunction]
fn spin_orbit_basis() -> PyOperator {
    PyOperator {
        inner: hamiltonian::spin_orbit_basis(),
    }
}

/// Conjugates a product-basis operator into the symmetry eigenbasis.
#[pyfunction]
fn to_spin_orbit_basis(m: &PyOperator) -> PyResult<PyOperator> {
    Ok(PyOperator {
        inner: hamiltonian::to_spin_orbit_basis(&m.inner).map_err(pyerr)?,
    })
}

/// Sweeps strain or axial field and returns `(values, sorted, tracked)`:
/// eigenvalues sorted ascending at each point, and continued adiabatically
/// by eigenvector overlap. `axis` is "strain" (values in rad/s) or "bz"
/// (values in gauss).
#[pyfunction]
#[pyo3(signature = (p, f, axis, values, include_diamagnetic=true))]
fn fine_structure_scan(
    p: &PyParams,
    f: &PyField,
    axis: &str,
    values: Vec<f64>,
    include_diamagnetic: bool,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let axis = match axis {
        "strain" => hamiltonian::ScanAxis::Strain,
        "bz" => hamiltonian::ScanAxis::Bz,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown scan axis {other:?} (expected \"strain\" or \"bz\")"
            )))
        }
    };
    let scan =
        hamiltonian::fine_structure_scan(&p.inner, &f.inner, axis, &values, include_diamagnetic)
            .map_err(pyerr)?;
    Ok((scan.values, scan.sorted, scan.tracked))
}

// ---------------------------------------------------------------------------
// Effective orbital-branch Hamiltonians
// ---------------------------------------------------------------------------

/// Effective 3×3 spin Hamiltonians of the two strain-split orbital branches.
///
/// `lower`/`upper` are the branch-specific corrections over the spin basis;
/// `common_shift` is the diagonal part shared by both branches over the full
/// six-level space. `full(...)` assembles shift + correction per branch.
#[pyclass(module = "nvsim_py", name = "BranchHamiltonians", from_py_object)]
#[derive(Clone)]
struct PyBranches {
    lower: PyOperator,
    upper: PyOperator,
    common_shift: PyOperator,
}

#[pymethods]
impl PyBranches {
    #[getter]
    fn lower(&self) -> PyOperator {
        self.lower.clone()
    }
    #[getter]
    fn upper(&self) -> PyOperator {
        self.upper.clone()
    }
    #[getter]
    fn common_shift(&self) -> PyOperator {
        self.common_shift.clone()
    }

    /// Full 3×3 branch Hamiltonian: common shift restricted to the branch
    /// plus the branch correction. `lower=True` selects the lower branch.
    #[pyo3(signature = (lower=true))]
    fn full(&self, lower: bool) -> PyOperator {
        let (correction, indices): (&OperatorMatrix, &[usize]) = if lower {
            (&self.lower.inner, &[0, 1, 2])
        } else {
            (&self.upper.inner, &[3, 4, 5])
        };
        let shift = self
            .common_shift
            .inner
            .submatrix(indices)
            .relabeled(correction.labels().to_vec());
        PyOperator {
            inner: &shift + correction,
        }
    }

    fn __repr__(&self) -> String {
        "BranchHamiltonians(lower, upper, common_shift)".to_string()
    }
}

/// Block-diagonalizing reduction of the excited-state Hamiltonian onto the
/// two orbital branches. `method` is "numeric" (exact-denominator generator)
/// or "closed-form" (printed first-order expressions). Requires an axial
/// field and strain 2δ > λ.
#[pyfunction]
#[pyo3(signature = (p, f, method="numeric"))]
fn branch_hamiltonians(p: &PyParams, f: &PyField, method: &str) -> PyResult<PyBranches> {
    let b = match method {
        "numeric" => branch::h_eff_numeric(&p.inner, &f.inner),
        "closed-form" => branch::h_eff_closed_form(&p.inner, &f.inner),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?} (expected \"numeric\" or \"closed-form\")"
            )))
        }
    }
    .map_err(pyerr)?;
    Ok(PyBranches {
        lower: PyOperator { inner: b.lower },
        upper: PyOperator { inner: b.upper },
        common_shift: PyOperator {
            inner: b.common_shift,
        },
    })
}

// ---------------------------------------------------------------------------
// Dispersive spin-light coupling
// ---------------------------------------------------------------------------

/// A resonant optical pulse: power (W), duration (s), mode area (m²),
/// dipole angle (rad), and per-spin-label detunings (rad/s).
#[pyclass(module = "nvsim_py", name = "OpticalPulse", from_py_object)]
#[derive(Clone)]
struct PyOpticalPulse {
    inner: polariton::OpticalPulse,
}

#[pymethods]
impl PyOpticalPulse {
    #[new]
    #[pyo3(signature = (power, duration, mode_area, dipole_angle=0.0, detunings=None))]
    fn new(
        power: f64,
        duration: f64,
        mode_area: f64,
        dipole_angle: f64,
        detunings: Option<BTreeMap<String, f64>>,
    ) -> PyResult<Self> {
        let pulse = polariton::OpticalPulse {
            power,
            duration,
            mode_area,
            dipole_angle,
            detunings: detunings.unwrap_or_default(),
        };
        pulse.validate().map_err(pyerr)?;
        Ok(Self { inner: pulse })
    }

    #[getter]
    fn power(&self) -> f64 {
        self.inner.power
    }
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }
    #[getter]
    fn mode_area(&self) -> f64 {
        self.inner.mode_area
    }
    #[setter]
    fn set_mode_area(&mut self, v: f64) {
        self.inner.mode_area = v;
    }
    #[getter]
    fn dipole_angle(&self) -> f64 {
        self.inner.dipole_angle
    }
    #[getter]
    fn detunings(&self) -> BTreeMap<String, f64> {
        self.inner.detunings.clone()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// On-resonance optical Rabi frequency Ω₀ (rad/s) at a given photon number.
#[pyfunction]
fn rabi_frequency(p: &PyParams, pulse: &PyOpticalPulse, n_photons: f64) -> f64 {
    polariton::rabi_frequency(&p.inner, &pulse.inner, n_photons)
}

/// Per-photon dispersive coupling D (rad) of the pulse.
#[pyfunction]
fn coupling_constant_d(p: &PyParams, pulse: &PyOpticalPulse) -> f64 {
    polariton::coupling_constant_d(&p.inner, &pulse.inner)
}

/// Dressed-doublet energies (E₊, E₋) of the n-th photon manifold at
/// detuning Δ, bare coupling Ω₀, and photon energy E_ph (all rad/s).
#[pyfunction]
fn polariton_energies(n: u64, delta: f64, omega0: f64, e_ph_angular: f64) -> (f64, f64) {
    polariton::polariton_energies(n, delta, omega0, e_ph_angular)
}

/// Dispersive energy shift of the driven ground state (rad/s), computed in
/// a cancellation-free form. At Δ = 0 the branch is ambiguous; disambiguate
/// with `zero_side` (the sign of Δ → 0).
#[pyfunction]
#[pyo3(signature = (delta, omega0, zero_side=None))]
fn energy_shift(delta: f64, omega0: f64, zero_side: Option<f64>) -> PyResult<f64> {
    polariton::energy_shift(delta, omega0, zero_side).map_err(pyerr)
}

/// Optical Stark shift in ordinary frequency (Hz).
#[pyfunction]
#[pyo3(signature = (delta, omega0, zero_side=None))]
fn stark_shift(delta: f64, omega0: f64, zero_side: Option<f64>) -> PyResult<f64> {
    polariton::stark_shift(delta, omega0, zero_side).map_err(pyerr)
}

/// Phase accumulated by the spin from n photons at detuning Δ (rad).
/// `mode="far-detuned"` uses D·n/Δ; `mode="exact"` needs `omega0` and
/// `duration` for the adiabatic dressed-state phase.
#[pyfunction]
#[pyo3(signature = (n, delta, d, mode="far-detuned", omega0=None, duration=None))]
fn accumulated_phase(
    n: f64,
    delta: f64,
    d: f64,
    mode: &str,
    omega0: Option<f64>,
    duration: Option<f64>,
) -> PyResult<f64> {
    let mode = match mode {
        "far-detuned" => PhaseMode::FarDetuned,
        "exact" => match (omega0, duration) {
            (Some(omega0), Some(duration)) => PhaseMode::Exact { omega0, duration },
            _ => {
                return Err(PyValueError::new_err(
                    "mode \"exact\" requires omega0 and duration",
                ))
            }
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown phase mode {other:?} (expected \"far-detuned\" or \"exact\")"
            )))
        }
    };
    polariton::accumulated_phase(n, delta, d, mode).map_err(pyerr)
}

/// Mode area that yields a target Rabi frequency at fixed pulse parameters.
#[pyfunction]
fn calibrate_mode_area_for_rabi(
    p: &PyParams,
    pulse: &PyOpticalPulse,
    n_photons: f64,
    target_omega0: f64,
) -> PyResult<f64> {
    polariton::calibrate_mode_area_for_rabi(&p.inner, &pulse.inner, n_photons, target_omega0)
        .map_err(pyerr)
}

/// Mode area that yields a target per-photon coupling D.
#[pyfunction]
fn calibrate_mode_area_for_coupling(
    p: &PyParams,
    pulse: &PyOpticalPulse,
    target_d: f64,
) -> PyResult<f64> {
    polariton::calibrate_mode_area_for_coupling(&p.inner, &pulse.inner, target_d).map_err(pyerr)
}

/// Odd-Lorentzian dispersive lineshape 𝓕·Δ/(Δ² + Γ²).
#[pyfunction]
fn odd_lorentzian(delta: f64, amplitude: f64, width: f64) -> f64 {
    polariton::odd_lorentzian(delta, amplitude, width)
}

/// Stark precession (Hz) inferred from pulse power, photon energy (J), and
/// the spin-differential Faraday phase (rad).
#[pyfunction]
fn stark_from_faraday(power: f64, e_ph_joules: f64, phi_f: f64) -> f64 {
    polariton::stark_from_faraday(power, e_ph_joules, phi_f)
}

/// The two spin-preserving optical absorption lines, keyed "0" and "-1",
/// each with (energy, linewidth, faraday_amplitude), all angular.
#[pyclass(module = "nvsim_py", name = "TransitionTable", from_py_object)]
#[derive(Clone)]
struct PyTransitionTable {
    inner: polariton::TransitionSet,
}

#[pymethods]
impl PyTransitionTable {
    /// Builds a table from {label: (energy, linewidth, faraday_amplitude)}.
    #[new]
    fn new(lines: BTreeMap<String, (f64, f64, f64)>) -> PyResult<Self> {
        let map = lines
            .into_iter()
            .map(|(k, (energy, linewidth, faraday_amplitude))| {
                (
                    k,
                    Transition {
                        energy,
                        linewidth,
                        faraday_amplitude,
                    },
                )
            })
            .collect();
        Ok(Self {
            inner: polariton::TransitionSet::new(map).map_err(pyerr)?,
        })
    }

    /// Reference table fitted around a line energy and spin splitting
    /// (both rad/s).
    #[staticmethod]
    fn fitted(e_ph_angular: f64, omega_s: f64) -> Self {
        Self {
            inner: polariton::TransitionSet::fitted(e_ph_angular, omega_s),
        }
    }

    /// Copy with one line replaced.
    fn with_line(
        &self,
        label: String,
        energy: f64,
        linewidth: f64,
        faraday_amplitude: f64,
    ) -> PyResult<Self> {
        let mut map = self.inner.transitions.clone();
        map.insert(
            label,
            Transition {
                energy,
                linewidth,
                faraday_amplitude,
            },
        );
        Ok(Self {
            inner: polariton::TransitionSet::new(map).map_err(pyerr)?,
        })
    }

    /// Lines as {label: (energy, linewidth, faraday_amplitude)}.
    fn lines(&self) -> BTreeMap<String, (f64, f64, f64)> {
        self.inner
            .transitions
            .iter()
            .map(|(k, t)| (k.clone(), (t.energy, t.linewidth, t.faraday_amplitude)))
            .collect()
    }

    /// Energy spacing between the two lines (rad/s).
    fn resonance_spacing(&self) -> PyResult<f64> {
        self.inner.resonance_spacing().map_err(pyerr)
    }

    /// Spin-differential Faraday phase (rad) at laser detuning Δ₀ from the
    /// reference line. `mode="lorentzian"` uses both odd-Lorentzian
    /// lineshapes; `mode="far-detuned"` needs the per-photon coupling `d`.
    #[pyo3(signature = (delta0, mode="lorentzian", d=None))]
    fn faraday_phase(&self, delta0: f64, mode: &str, d: Option<f64>) -> PyResult<f64> {
        let mode = match mode {
            "lorentzian" => FaradayMode::Lorentzian,
            "far-detuned" => FaradayMode::FarDetuned {
                d: d.ok_or_else(|| {
                    PyValueError::new_err("mode \"far-detuned\" requires the coupling d")
                })?,
            },
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown Faraday mode {other:?} (expected \"lorentzian\" or \"far-detuned\")"
                )))
            }
        };
        polariton::faraday_phase(&self.inner, delta0, mode).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!("TransitionTable({:?})", self.lines())
    }
}

/// A spin entangled with a coherent optical mode: spin amplitudes β_j,
/// coherent amplitude α, and the per-photon phase each spin level has
/// imprinted on the light.
#[pyclass(module = "nvsim_py", name = "SpinLightState", from_py_object)]
#[derive(Clone)]
struct PySpinLightState {
    inner: polariton::SpinLightState,
}

#[pymethods]
impl PySpinLightState {
    /// Builds a normalized spin ⊗ coherent-state product with zero
    /// accumulated phases.
    #[new]
    fn new(amplitudes: BTreeMap<String, Complex64>, coherent_alpha: Complex64) -> PyResult<Self> {
        Ok(Self {
            inner: polariton::SpinLightState::new(amplitudes, coherent_alpha).map_err(pyerr)?,
        })
    }

    #[getter]
    fn amplitudes(&self) -> BTreeMap<String, Complex64> {
        self.inner.amplitudes.clone()
    }
    #[getter]
    fn coherent_alpha(&self) -> Complex64 {
        self.inner.coherent_alpha
    }
    #[getter]
    fn per_photon_phase(&self) -> BTreeMap<String, f64> {
        self.inner.per_photon_phase.clone()
    }

    /// Mean photon number |α|².
    fn mean_photon_number(&self) -> f64 {
        self.inner.mean_photon_number()
    }

    /// Spin density matrix after exactly tracing out the light, including
    /// the coherence loss from which-path information in the phases.
    fn reduced_spin(&self) -> PyOperator {
        PyOperator {
            inner: polariton::reduced_spin(&self.inner),
        }
    }

    /// Reduced spin state in the large-|α| phase-only approximation.
    fn reduced_spin_approx(&self) -> PyOperator {
        PyOperator {
            inner: polariton::reduced_spin_approx(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SpinLightState(amplitudes={:?}, alpha={}, phases={:?})",
            self.inner.amplitudes, self.inner.coherent_alpha, self.inner.per_photon_phase
        )
    }
}

/// Dispersively scatters one pulse off the spin: each spin level imprints
/// its per-photon phase D/Δ_j onto the coherent mode.
#[pyfunction]
fn evolve_spin_light(
    p: &PyParams,
    state: &PySpinLightState,
    pulse: &PyOpticalPulse,
) -> PyResult<PySpinLightState> {
    Ok(PySpinLightState {
        inner: polariton::evolve_spin_light(&p.inner, &state.inner, &pulse.inner).map_err(pyerr)?,
    })
}

// ---------------------------------------------------------------------------
// Density matrices and Lindblad dynamics
// ---------------------------------------------------------------------------

/// A validated density matrix: Hermitian, unit trace, positive within
/// numerical tolerance.
#[pyclass(module = "nvsim_py", name = "DensityMatrix", from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: lindblad::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validates an operator as a density matrix.
    #[new]
    fn new(matrix: &PyOperator) -> PyResult<Self> {
        Ok(Self {
            inner: lindblad::DensityMatrix::new(matrix.inner.clone()).map_err(pyerr)?,
        })
    }

    /// Pure state |ψ⟩⟨ψ| from amplitudes over the labeled basis.
    #[staticmethod]
    fn from_pure(labels: Vec<String>, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: lindblad::DensityMatrix::from_pure(labels, &amplitudes).map_err(pyerr)?,
        })
    }

    /// Basis projector |i⟩⟨i|.
    #[staticmethod]
    fn basis_state(labels: Vec<String>, index: usize) -> PyResult<Self> {
        Ok(Self {
            inner: lindblad::DensityMatrix::basis_state(labels, index).map_err(pyerr)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.matrix().labels().to_vec()
    }

    /// Entries as a nested list of complex numbers.
    fn to_list(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.matrix())
    }

    /// The underlying operator.
    fn matrix(&self) -> PyOperator {
        PyOperator {
            inner: self.inner.matrix().clone(),
        }
    }

    /// Population of the i-th basis state.
    fn population(&self, i: usize) -> PyResult<f64> {
        if i >= self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "index {i} out of range for dimension {}",
                self.inner.dim()
            )));
        }
        Ok(self.inner.population(i))
    }

    /// Purity tr(ρ²).
    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(dim={}, labels={:?})",
            self.inner.dim(),
            self.inner.matrix().labels()
        )
    }
}

/// Lindblad generator W acting on column-stacked density matrices,
/// from a Hamiltonian and (rate, jump-operator) channels.
#[pyfunction]
fn lindblad_superoperator(
    h: &PyOperator,
    channels: Vec<(f64, PyOperator)>,
) -> PyResult<PyOperator> {
    let channels: Vec<JumpChannel> = channels
        .into_iter()
        .map(|(rate, op)| JumpChannel {
            rate,
            operator: op.inner,
        })
        .collect();
    Ok(PyOperator {
        inner: lindblad::superoperator(&h.inner, &channels).map_err(pyerr)?,
    })
}

/// Evolves ρ₀ under a Lindblad generator, returning one density matrix per
/// requested time (finite, non-negative, non-decreasing).
#[pyfunction]
fn evolve_lindblad(
    w: &PyOperator,
    rho0: &PyDensityMatrix,
    times: Vec<f64>,
) -> PyResult<Vec<PyDensityMatrix>> {
    let states = lindblad::evolve_superoperator(&w.inner, &rho0.inner, &times).map_err(pyerr)?;
    Ok(states
        .into_iter()
        .map(|s| PyDensityMatrix { inner: s })
        .collect())
}

// ---------------------------------------------------------------------------
// Λ-system dynamics
// ---------------------------------------------------------------------------

/// Incoherent rates (1/s) of the five-level optical model: radiative decay,
/// intersystem crossing (in/out of the singlet with a branching fraction),
/// ground relaxation 1/T₁, and pure dephasing.
#[pyclass(module = "nvsim_py", name = "Rates", from_py_object)]
#[derive(Clone)]
struct PyRates {
    inner: RateTable,
}

#[pymethods]
impl PyRates {
    #[new]
    #[pyo3(signature = (*, gamma_rad=None, gamma_isc=None, gamma_isc_rev=None,
                        isc_branching_plus=None, gamma_1=None, gamma_phi=None))]
    fn new(
        gamma_rad: Option<f64>,
        gamma_isc: Option<f64>,
        gamma_isc_rev: Option<f64>,
        isc_branching_plus: Option<f64>,
        gamma_1: Option<f64>,
        gamma_phi: Option<f64>,
    ) -> PyResult<Self> {
        let mut r = RateTable::default();
        if let Some(v) = gamma_rad {
            r.gamma_rad = v;
        }
        if let Some(v) = gamma_isc {
            r.gamma_isc = v;
        }
        if let Some(v) = gamma_isc_rev {
            r.gamma_isc_rev = v;
        }
        if let Some(v) = isc_branching_plus {
            r.isc_branching_plus = v;
        }
        if let Some(v) = gamma_1 {
            r.gamma_1 = v;
        }
        if let Some(v) = gamma_phi {
            r.gamma_phi = v;
        }
        r.validate().map_err(pyerr)?;
        Ok(Self { inner: r })
    }

    #[getter]
    fn gamma_rad(&self) -> f64 {
        self.inner.gamma_rad
    }
    #[getter]
    fn gamma_isc(&self) -> f64 {
        self.inner.gamma_isc
    }
    #[getter]
    fn gamma_isc_rev(&self) -> f64 {
        self.inner.gamma_isc_rev
    }
    #[getter]
    fn isc_branching_plus(&self) -> f64 {
        self.inner.isc_branching_plus
    }
    #[getter]
    fn gamma_1(&self) -> f64 {
        self.inner.gamma_1
    }
    #[getter]
    fn gamma_phi(&self) -> f64 {
        self.inner.gamma_phi
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

fn parse_selection(name: &str) -> PyResult<LevelSelection> {
    match name {
        "five-level" => Ok(LevelSelection::FiveLevel),
        "single-lambda-r" => Ok(LevelSelection::SingleLambda(Branch::R)),
        "single-lambda-l" => Ok(LevelSelection::SingleLambda(Branch::L)),
        other => Err(PyValueError::new_err(format!(
            "unknown level selection {other:?} (expected \"five-level\", \
             \"single-lambda-r\", or \"single-lambda-l\")"
        ))),
    }
}

/// Two ground spin states optically coupled to one or two excited orbital
/// levels, with dissipation. Drive strength Ω and mixing angles (θ, φ) set
/// the bright/dark decomposition; δ_L is the two-photon (Raman) detuning,
/// δ_e the excited-level splitting, and ε_s a bright-dark coupling asymmetry.
#[pyclass(module = "nvsim_py", name = "LambdaModel")]
struct PyLambdaModel {
    inner: lambda::LambdaModel,
}

#[pymethods]
impl PyLambdaModel {
    #[new]
    #[pyo3(signature = (omega, theta, *, phi=0.0, delta_l=0.0, delta_e=0.0, epsilon_s=0.0,
                        rates=None, selection="five-level"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        omega: f64,
        theta: f64,
        phi: f64,
        delta_l: f64,
        delta_e: f64,
        epsilon_s: f64,
        rates: Option<PyRates>,
        selection: &str,
    ) -> PyResult<Self> {
        let rates = rates.map(|r| r.inner).unwrap_or_default();
        let selection = parse_selection(selection)?;
        Ok(Self {
            inner: lambda::LambdaModel::new(
                delta_l, delta_e, omega, theta, phi, epsilon_s, rates, selection,
            )
            .map_err(pyerr)?,
        })
    }

    /// Labels of the retained levels.
    fn labels(&self) -> Vec<String> {
        self.inner.labels()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Coherent part of the generator (rotating frame).
    fn hamiltonian(&self) -> PyOperator {
        PyOperator {
            inner: self.inner.hamiltonian(),
        }
    }

    /// Full Lindblad generator over column-stacked density matrices.
    fn superoperator(&self) -> PyResult<PyOperator> {
        Ok(PyOperator {
            inner: self.inner.superoperator().map_err(pyerr)?,
        })
    }

    /// Evolves an initial state, returning one density matrix per time.
    fn evolve(&self, rho0: &PyDensityMatrix, times: Vec<f64>) -> PyResult<Vec<PyDensityMatrix>> {
        let states = self.inner.evolve(&rho0.inner, &times).map_err(pyerr)?;
        Ok(states
            .into_iter()
            .map(|s| PyDensityMatrix { inner: s })
            .collect())
    }

    /// Null vector of the generator, normalized to a steady density matrix.
    fn steady_state(&self) -> PyResult<PyDensityMatrix> {
        Ok(PyDensityMatrix {
            inner: self.inner.steady_state().map_err(pyerr)?,
        })
    }

    /// Amplitudes of the dark state over the retained levels for the given
    /// excited branch ("r" or "l").
    #[pyo3(signature = (branch="r"))]
    fn dark_state_vector(&self, branch: &str) -> PyResult<Vec<Complex64>> {
        Ok(self.inner.dark_state_vector(parse_branch(branch)?))
    }

    fn __repr__(&self) -> String {
        format!("LambdaModel(dim={})", self.inner.dim())
    }
}

/// Labels of the five-level optical model.
#[pyfunction]
fn five_level_labels() -> Vec<String> {
    lambda::five_level_labels()
}

/// Ground-qubit amplitudes of the dark state at drive angles (θ, φ).
#[pyfunction]
#[pyo3(signature = (theta, phi, branch="r"))]
fn dark_state(theta: f64, phi: f64, branch: &str) -> PyResult<Vec<Complex64>> {
    Ok(lambda::dark_state(theta, phi, parse_branch(branch)?).to_vec())
}

/// Bloch vector (x, y, z) of the dark state's ground-qubit axis.
#[pyfunction]
#[pyo3(signature = (theta, phi, branch="r"))]
fn dark_state_axis(theta: f64, phi: f64, branch: &str) -> PyResult<(f64, f64, f64)> {
    let v = lambda::dark_state_axis(theta, phi, parse_branch(branch)?);
    Ok((v.bx, v.by, v.bz))
}

/// Ground-qubit Bloch vector (x, y, z) of a density matrix whose first two
/// levels are the qubit.
#[pyfunction]
fn bloch_vector(rho: &PyDensityMatrix) -> PyResult<(f64, f64, f64)> {
    if rho.inner.dim() < 2 {
        return Err(PyValueError::new_err(
            "density matrix must contain the two ground-qubit levels",
        ));
    }
    let v = lambda::bloch_vector(&rho.inner);
    Ok((v.bx, v.by, v.bz))
}

/// Fidelity ⟨ψ|ρ|ψ⟩ against a (normalized) target pure state over the
/// leading basis states.
#[pyfunction]
fn fidelity(rho: &PyDensityMatrix, target: Vec<Complex64>) -> PyResult<f64> {
    lambda::fidelity(&rho.inner, &target).map_err(pyerr)
}

// ---------------------------------------------------------------------------
// Ultrafast pulse-pair control
// ---------------------------------------------------------------------------

/// Geometry of one ultrafast optical π-pulse: polarization angles
/// (α_e, β_e) and the spin rotation (θ, φ) it implements.
#[pyclass(module = "nvsim_py", name = "PulseSpec", from_py_object)]
#[derive(Clone)]
struct PyPulseSpec {
    inner: ultrafast::PulseSpec,
}

#[pymethods]
impl PyPulseSpec {
    #[new]
    #[pyo3(signature = (theta, phi=0.0, alpha_e=0.0, beta_e=0.0))]
    fn new(theta: f64, phi: f64, alpha_e: f64, beta_e: f64) -> PyResult<Self> {
        let spec = ultrafast::PulseSpec {
            alpha_e,
            beta_e,
            theta,
            phi,
        };
        spec.validate().map_err(pyerr)?;
        Ok(Self { inner: spec })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }
    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }
    #[getter]
    fn alpha_e(&self) -> f64 {
        self.inner.alpha_e
    }
    #[getter]
    fn beta_e(&self) -> f64 {
        self.inner.beta_e
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Analytic four-level parameters: ground and excited qubit splittings
/// ω_gs/ω_es, excited-state axis tilt η, and the optical carrier ω_opt
/// (all rad/s).
#[pyclass(module = "nvsim_py", name = "FourLevelParams", from_py_object)]
#[derive(Clone)]
struct PyFourLevel {
    inner: ultrafast::EffectiveFourLevel,
}

#[pymethods]
impl PyFourLevel {
    #[new]
    #[pyo3(signature = (omega_gs, omega_es, eta, omega_opt=0.0))]
    fn new(omega_gs: f64, omega_es: f64, eta: f64, omega_opt: f64) -> PyResult<Self> {
        let e = ultrafast::EffectiveFourLevel {
            omega_gs,
            omega_es,
            eta,
            omega_opt,
        };
        e.validate().map_err(pyerr)?;
        Ok(Self { inner: e })
    }

    #[getter]
    fn omega_gs(&self) -> f64 {
        self.inner.omega_gs
    }
    #[getter]
    fn omega_es(&self) -> f64 {
        self.inner.omega_es
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn omega_opt(&self) -> f64 {
        self.inner.omega_opt
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Labels of the ground spin-qubit subspace.
#[pyfunction]
fn ground_qubit_labels() -> Vec<String> {
    ultrafast::ground_qubit_labels()
}

/// Labels of the orbital ⊗ spin-qubit four-level space.
#[pyfunction]
fn four_level_labels() -> Vec<String> {
    ultrafast::four_level_labels()
}

/// Duration of an orbital π rotation at excited splitting ω_es (rad/s).
#[pyfunction]
fn pi_rotation_time(omega_es: f64) -> PyResult<f64> {
    ultrafast::pi_rotation_time(omega_es).map_err(pyerr)
}

/// Four-level unitary of one ultrafast pulse; `which` is "first" (ground →
/// excited transfer) or "second" (return pulse).
#[pyfunction]
#[pyo3(signature = (spec, which="first"))]
fn pulse_unitary(spec: &PyPulseSpec, which: &str) -> PyResult<PyOperator> {
    let kind = match which {
        "first" => PulseKind::First,
        "second" => PulseKind::Second,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown pulse kind {other:?} (expected \"first\" or \"second\")"
            )))
        }
    };
    Ok(PyOperator {
        inner: ultrafast::pulse_unitary(&spec.inner, kind).map_err(pyerr)?,
    })
}

/// Idealized four-level pulse unitary for a rotation (θ, φ).
#[pyfunction]
fn pulse_unitary_4level(theta: f64, phi: f64) -> PyOperator {
    PyOperator {
        inner: ultrafast::pulse_unitary_4level(theta, phi),
    }
}

/// Pulse-pair trajectory scan: sends the qubit to the excited orbital with
/// `pulse1`, lets it precess for each inter-pulse delay in `times`, returns
/// it with `pulse2`, and records the ground-qubit Bloch vector.
///
/// Exactly one backend must be given: `effective=FourLevelParams(...)` for
/// the analytic model, or `params=`/`field=` for the microscopic
/// lower-branch Hamiltonian at a field point. `rho0` defaults to |0⟩;
/// `gamma_rad` adds radiative decay during the excited-state interval.
/// Returns a list of (t, bx, by, bz).
#[pyfunction]
#[pyo3(signature = (pulse1, pulse2, times, *, effective=None, params=None, field=None,
                    rho0=None, gamma_rad=None))]
#[allow(clippy::too_many_arguments)]
fn tdqt_scan(
    pulse1: &PyPulseSpec,
    pulse2: &PyPulseSpec,
    times: Vec<f64>,
    effective: Option<PyFourLevel>,
    params: Option<PyParams>,
    field: Option<PyField>,
    rho0: Option<PyDensityMatrix>,
    gamma_rad: Option<f64>,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let backend = match (effective, params, field) {
        (Some(e), None, None) => TdqtBackend::Effective(e.inner),
        (None, Some(p), Some(f)) => TdqtBackend::LowerBranch {
            params: p.inner,
            field: f.inner,
        },
        _ => {
            return Err(PyValueError::new_err(
                "give either effective=FourLevelParams(...) or both params= and field=",
            ))
        }
    };
    let rho0 = match rho0 {
        Some(r) => r.inner,
        None => lindblad::DensityMatrix::basis_state(ultrafast::ground_qubit_labels(), 0)
            .map_err(pyerr)?,
    };
    let points = ultrafast::tdqt_scan(
        &backend,
        (&pulse1.inner, &pulse2.inner),
        &times,
        &rho0,
        gamma_rad,
    )
    .map_err(pyerr)?;
    Ok(points
        .into_iter()
        .map(|pt| (pt.t, pt.bloch.bx, pt.bloch.by, pt.bloch.bz))
        .collect())
}

/// Precession parameters fitted from a pulse-pair trajectory.
#[pyclass(module = "nvsim_py", name = "PrecessionFit")]
struct PyPrecessionFit {
    #[pyo3(get)]
    omega_es: f64,
    #[pyo3(get)]
    eta: f64,
    #[pyo3(get)]
    axis: (f64, f64, f64),
    #[pyo3(get)]
    residual: f64,
}

#[pymethods]
impl PyPrecessionFit {
    fn __repr__(&self) -> String {
        format!(
            "PrecessionFit(omega_es={:.6e}, eta={:.6}, axis=({:.4}, {:.4}, {:.4}), residual={:.3e})",
            self.omega_es, self.eta, self.axis.0, self.axis.1, self.axis.2, self.residual
        )
    }
}

/// Extracts the excited-state precession frequency and axis tilt from a
/// trajectory of (t, bx, by, bz) points (≥ 8 points spanning a period).
#[pyfunction]
fn extract_precession(points: Vec<(f64, f64, f64, f64)>) -> PyResult<PyPrecessionFit> {
    let trajectory: Vec<TdqtPoint> = points
        .into_iter()
        .map(|(t, bx, by, bz)| TdqtPoint {
            t,
            bloch: lambda::BlochVector { bx, by, bz },
        })
        .collect();
    let fit = ultrafast::extract_precession(&trajectory).map_err(pyerr)?;
    Ok(PyPrecessionFit {
        omega_es: fit.omega_es,
        eta: fit.eta,
        axis: (fit.axis[0], fit.axis[1], fit.axis[2]),
        residual: fit.residual,
    })
}

// ---------------------------------------------------------------------------
// Constants and unit helpers
// ---------------------------------------------------------------------------

/// Pinned physical constants as {symbol: (value, unit, name)}.
#[pyfunction]
fn constants() -> BTreeMap<String, (f64, String, String)> {
    core_constants::constants_table()
        .into_iter()
        .map(|e| {
            (
                e.symbol.to_string(),
                (e.value, e.unit.to_string(), e.name.to_string()),
            )
        })
        .collect()
}

/// GHz (ordinary frequency) to rad/s.
#[pyfunction]
fn ghz(f: f64) -> f64 {
    units::ghz(f)
}

/// MHz (ordinary frequency) to rad/s.
#[pyfunction]
fn mhz(f: f64) -> f64 {
    units::mhz(f)
}

/// kHz (ordinary frequency) to rad/s.
#[pyfunction]
fn khz(f: f64) -> f64 {
    units::khz(f)
}

/// Hz (ordinary frequency) to rad/s.
#[pyfunction]
fn hz_to_angular(f: f64) -> f64 {
    units::hz_to_angular(f)
}

/// rad/s to ordinary frequency in Hz.
#[pyfunction]
fn angular_to_hz(omega: f64) -> f64 {
    units::angular_to_hz(omega)
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CONSTANTS_VERSION", core_constants::CONSTANTS_VERSION)?;

    m.add_class::<PyOperator>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyBranches>()?;
    m.add_class::<PyOpticalPulse>()?;
    m.add_class::<PyTransitionTable>()?;
    m.add_class::<PySpinLightState>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyRates>()?;
    m.add_class::<PyLambdaModel>()?;
    m.add_class::<PyPulseSpec>()?;
    m.add_class::<PyFourLevel>()?;
    m.add_class::<PyPrecessionFit>()?;

    m.add_function(wrap_pyfunction!(kron, m)?)?;
    m.add_function(wrap_pyfunction!(commutator, m)?)?;
    m.add_function(wrap_pyfunction!(product_labels, m)?)?;
    m.add_function(wrap_pyfunction!(spin_orbit_labels, m)?)?;
    m.add_function(wrap_pyfunction!(h_gs, m)?)?;
    m.add_function(wrap_pyfunction!(h_so, m)?)?;
    m.add_function(wrap_pyfunction!(h_ss, m)?)?;
    m.add_function(wrap_pyfunction!(h_zeeman, m)?)?;
    m.add_function(wrap_pyfunction!(h_diamagnetic, m)?)?;
    m.add_function(wrap_pyfunction!(h_strain, m)?)?;
    m.add_function(wrap_pyfunction!(h_es_total, m)?)?;
    m.add_function(wrap_pyfunction!(spin_orbit_basis, m)?)?;
    m.add_function(wrap_pyfunction!(to_spin_orbit_basis, m)?)?;
    m.add_function(wrap_pyfunction!(fine_structure_scan, m)?)?;
    m.add_function(wrap_pyfunction!(branch_hamiltonians, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_constant_d, m)?)?;
    m.add_function(wrap_pyfunction!(polariton_energies, m)?)?;
    m.add_function(wrap_pyfunction!(energy_shift, m)?)?;
    m.add_function(wrap_pyfunction!(stark_shift, m)?)?;
    m.add_function(wrap_pyfunction!(accumulated_phase, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_mode_area_for_rabi, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_mode_area_for_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(odd_lorentzian, m)?)?;
    m.add_function(wrap_pyfunction!(stark_from_faraday, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_spin_light, m)?)?;
    m.add_function(wrap_pyfunction!(lindblad_superoperator, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_lindblad, m)?)?;
    m.add_function(wrap_pyfunction!(five_level_labels, m)?)?;
    m.add_function(wrap_pyfunction!(dark_state, m)?)?;
    m.add_function(wrap_pyfunction!(dark_state_axis, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_vector, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(ground_qubit_labels, m)?)?;
    m.add_function(wrap_pyfunction!(four_level_labels, m)?)?;
    m.add_function(wrap_pyfunction!(pi_rotation_time, m)?)?;
    m.add_function(wrap_pyfunction!(pulse_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(pulse_unitary_4level, m)?)?;
    m.add_function(wrap_pyfunction!(tdqt_scan, m)?)?;
    m.add_function(wrap_pyfunction!(extract_precession, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(ghz, m)?)?;
    m.add_function(wrap_pyfunction!(mhz, m)?)?;
    m.add_function(wrap_pyfunction!(khz, m)?)?;
    m.add_function(wrap_pyfunction!(hz_to_angular, m)?)?;
    m.add_function(wrap_pyfunction!(angular_to_hz, m)?)?;
    Ok(())
}
