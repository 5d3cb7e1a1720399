//! Dense complex linear algebra over labeled bases.
//!
//! [`OperatorMatrix`] is the universal carrier for Hamiltonians, unitaries,
//! density matrices, and superoperators in this crate: a dense complex square
//! matrix together with an ordered list of basis labels. All physics modules
//! build on the constructors and solvers here.
//!
//! Internal unit convention: every energy-like matrix is stored in angular
//! frequency units (rad/s).

use crate::error::{NvError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Complex one-liners used throughout the crate.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex square matrix over a labeled, ordered basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    mat: DMatrix<C64>,
    labels: Vec<String>,
}

impl OperatorMatrix {
    /// Wrap an existing matrix. Panics if the matrix is not square or the
    /// label count does not match (programming error, not a runtime input).
    pub fn from_matrix(mat: DMatrix<C64>, labels: Vec<String>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrix must be square");
        assert_eq!(
            mat.nrows(),
            labels.len(),
            "label count must match matrix dimension"
        );
        Self { mat, labels }
    }

    /// Zero matrix over the given basis.
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self::from_matrix(DMatrix::zeros(n, n), labels)
    }

    /// Identity over the given basis.
    pub fn identity(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self::from_matrix(DMatrix::identity(n, n), labels)
    }

    /// Build entrywise from a closure over (row, col).
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let n = labels.len();
        Self::from_matrix(DMatrix::from_fn(n, n, |r, c| f(r, c)), labels)
    }

    /// Build from row-major entry slices (each row must have `dim` entries).
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<C64>]) -> Self {
        let n = labels.len();
        assert_eq!(rows.len(), n, "row count must match label count");
        for row in rows {
            assert_eq!(row.len(), n, "each row must have dim entries");
        }
        Self::from_fn(labels, |r, c| rows[r][c])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: C64) {
        self.mat[(row, col)] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            labels: self.labels.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
            labels: self.labels.clone(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            mat: self.mat.map(|z| z.conj()),
            labels: self.labels.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity, max |M − M†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.mat[(r, c)] - self.mat[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian within `tol_rel` relative to the largest entry magnitude.
    pub fn is_hermitian(&self, tol_rel: f64) -> bool {
        self.hermiticity_deviation() <= tol_rel * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Exactly symmetrized Hermitian part, (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.mat.adjoint();
        Self {
            mat: (&self.mat + adj).map(|z| z * 0.5),
            labels: self.labels.clone(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            mat: self.mat.map(|z| z * factor),
            labels: self.labels.clone(),
        }
    }

    pub fn scaled_re(&self, factor: f64) -> Self {
        self.scaled(cr(factor))
    }

    /// Same entries over a new set of labels (dimension must match).
    pub fn relabeled(&self, labels: Vec<String>) -> Self {
        Self::from_matrix(self.mat.clone(), labels)
    }

    /// Extract the square submatrix on the given basis indices, carrying
    /// their labels along.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let mat = DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.mat[(indices[r], indices[c])]
        });
        Self::from_matrix(mat, labels)
    }

    /// Basis change U†·M·U where U's columns express the new basis vectors
    /// in the current basis. `new_labels` names the new basis.
    pub fn conjugated_by(&self, u: &OperatorMatrix, new_labels: Vec<String>) -> Self {
        assert_eq!(self.dim(), u.dim(), "basis-change dimension mismatch");
        let mat = u.mat.adjoint() * &self.mat * &u.mat;
        Self::from_matrix(mat, new_labels)
    }

    /// Apply the operator to a column vector.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.mat * v
    }
}

fn assert_same_basis(a: &OperatorMatrix, b: &OperatorMatrix) {
    assert_eq!(
        a.labels, b.labels,
        "operator basis labels must match for arithmetic"
    );
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self, rhs);
        OperatorMatrix {
            mat: &self.mat + &rhs.mat,
            labels: self.labels.clone(),
        }
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self, rhs);
        OperatorMatrix {
            mat: &self.mat - &rhs.mat,
            labels: self.labels.clone(),
        }
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self, rhs);
        OperatorMatrix {
            mat: &self.mat * &rhs.mat,
            labels: self.labels.clone(),
        }
    }
}

/// Commutator [a, b] = ab − ba.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    &(a * b) - &(b * a)
}

/// Anticommutator {a, b} = ab + ba.
pub fn anticommutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    &(a * b) + &(b * a)
}

/// Tensor product with concatenated basis labels `"a⊗b"`.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let mat = a.mat.kronecker(&b.mat);
    let mut labels = Vec::with_capacity(a.dim() * b.dim());
    for la in &a.labels {
        for lb in &b.labels {
            labels.push(format!("{la}⊗{lb}"));
        }
    }
    OperatorMatrix::from_matrix(mat, labels)
}

/// Spin-1 operators in the basis (|−1⟩, |0⟩, |+1⟩).
///
/// `sz = diag(−1, 0, +1)`; the ladder combinations satisfy
/// `s_plus = sx + i·sy`, `s_minus = sx − i·sy`.
#[derive(Clone, Debug)]
pub struct SpinOneOperators {
    pub sx: OperatorMatrix,
    pub sy: OperatorMatrix,
    pub sz: OperatorMatrix,
    pub s_plus: OperatorMatrix,
    pub s_minus: OperatorMatrix,
}

/// Basis labels for the spin-1 subspace, ordered (|−1⟩, |0⟩, |+1⟩).
pub fn spin_labels() -> Vec<String> {
    vec!["-1".into(), "0".into(), "+1".into()]
}

/// Basis labels for the orbital doublet, ordered (|X⟩, |Y⟩).
pub fn orbital_labels() -> Vec<String> {
    vec!["X".into(), "Y".into()]
}

pub fn spin_one() -> SpinOneOperators {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let sx = OperatorMatrix::from_rows(
        spin_labels(),
        &[
            vec![cr(0.0), cr(inv_sqrt2), cr(0.0)],
            vec![cr(inv_sqrt2), cr(0.0), cr(inv_sqrt2)],
            vec![cr(0.0), cr(inv_sqrt2), cr(0.0)],
        ],
    );
    let sy = OperatorMatrix::from_rows(
        spin_labels(),
        &[
            vec![cr(0.0), I.scale(inv_sqrt2), cr(0.0)],
            vec![-I.scale(inv_sqrt2), cr(0.0), I.scale(inv_sqrt2)],
            vec![cr(0.0), -I.scale(inv_sqrt2), cr(0.0)],
        ],
    );
    let sz = OperatorMatrix::from_rows(
        spin_labels(),
        &[
            vec![cr(-1.0), cr(0.0), cr(0.0)],
            vec![cr(0.0), cr(0.0), cr(0.0)],
            vec![cr(0.0), cr(0.0), cr(1.0)],
        ],
    );
    let s_plus = &sx + &sy.scaled(I);
    let s_minus = &sx - &sy.scaled(I);
    SpinOneOperators {
        sx,
        sy,
        sz,
        s_plus,
        s_minus,
    }
}

/// Orbital pseudo-spin operators in the basis (|X⟩, |Y⟩).
///
/// `pz|X⟩ = |X⟩`, `pz|Y⟩ = −|Y⟩`. The combinations `p_plus = pz + i·px` and
/// `p_minus = pz − i·px` follow the excited-state orbital convention used by
/// the spin-spin Hamiltonian; they are *not* the standard raising/lowering
/// operators.
#[derive(Clone, Debug)]
pub struct OrbitalPauli {
    pub px: OperatorMatrix,
    pub py: OperatorMatrix,
    pub pz: OperatorMatrix,
    pub p_plus: OperatorMatrix,
    pub p_minus: OperatorMatrix,
}

pub fn orbital_pauli() -> OrbitalPauli {
    let px = OperatorMatrix::from_rows(
        orbital_labels(),
        &[vec![cr(0.0), cr(1.0)], vec![cr(1.0), cr(0.0)]],
    );
    let py = OperatorMatrix::from_rows(
        orbital_labels(),
        &[vec![cr(0.0), -I], vec![I, cr(0.0)]],
    );
    let pz = OperatorMatrix::from_rows(
        orbital_labels(),
        &[vec![cr(1.0), cr(0.0)], vec![cr(0.0), cr(-1.0)]],
    );
    let p_plus = &pz + &px.scaled(I);
    let p_minus = &pz - &px.scaled(I);
    OrbitalPauli {
        px,
        py,
        pz,
        p_plus,
        p_minus,
    }
}

/// Hermitian eigendecomposition with deterministic ordering and phases.
///
/// Returns eigenvalues ascending and the eigenvector matrix whose k-th
/// column belongs to the k-th eigenvalue. Within degenerate clusters the
/// basis is canonicalized (greedy projection of canonical basis vectors,
/// lowest index first) and every eigenvector's first non-negligible
/// component is made real-positive, so results are reproducible.
pub fn eigh(h: &OperatorMatrix) -> Result<(Vec<f64>, OperatorMatrix)> {
    let scale = h.max_abs();
    let dev = h.hermiticity_deviation();
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    if dev > tol {
        return Err(NvError::NotHermitian { max_dev: dev, tol });
    }
    let hs = h.hermitian_part();
    let se = hs.mat.symmetric_eigen();
    let n = h.dim();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        vectors.set_column(new_col, &se.eigenvectors.column(old_col));
    }

    canonicalize_degenerate_clusters(&eigenvalues, &mut vectors);
    for col in 0..n {
        fix_column_phase(&mut vectors, col);
    }

    Ok((
        eigenvalues,
        OperatorMatrix::from_matrix(vectors, h.labels.clone()),
    ))
}

/// Replace the eigenvector basis of each degenerate cluster with a
/// deterministic one: orthonormalized projections of the canonical basis
/// vectors (lowest index first) onto the cluster subspace.
fn canonicalize_degenerate_clusters(eigenvalues: &[f64], vectors: &mut DMatrix<C64>) {
    let n = eigenvalues.len();
    let scale = eigenvalues.iter().fold(1.0_f64, |m, &e| m.max(e.abs()));
    let cluster_tol = 1e-8 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end] - eigenvalues[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let basis = vectors.columns(start, k).into_owned();
            let mut chosen: Vec<DVector<C64>> = Vec::with_capacity(k);
            for i in 0..n {
                if chosen.len() == k {
                    break;
                }
                // Projection of canonical basis vector e_i onto the subspace.
                let coeffs = basis.adjoint().column(i).into_owned();
                let mut w = &basis * coeffs;
                for u in &chosen {
                    let overlap = u.dotc(&w);
                    w -= u.map(|z| z * overlap);
                }
                let norm = w.norm();
                if norm > 1e-6 {
                    w /= cr(norm);
                    chosen.push(w);
                }
            }
            if chosen.len() == k {
                for (j, v) in chosen.iter().enumerate() {
                    vectors.set_column(start + j, v);
                }
            }
        }
        start = end;
    }
}

/// Multiply a column by a phase so its first non-negligible component is
/// real-positive.
fn fix_column_phase(vectors: &mut DMatrix<C64>, col: usize) {
    let n = vectors.nrows();
    let vmax = (0..n)
        .map(|r| vectors[(r, col)].norm())
        .fold(0.0_f64, f64::max);
    if vmax == 0.0 {
        return;
    }
    for r in 0..n {
        let z = vectors[(r, col)];
        if z.norm() > 1e-12 * vmax {
            let phase = z.conj() / z.norm();
            for rr in 0..n {
                vectors[(rr, col)] *= phase;
            }
            return;
        }
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential of a general complex square matrix via Padé-13
/// scaling and squaring.
pub fn expm(m: &OperatorMatrix) -> OperatorMatrix {
    let n = m.dim();
    let norm = one_norm(&m.mat);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = m.mat.map(|z| z / cr(2.0_f64.powi(s as i32)));
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &PADE13;
    let u_inner = &a6 * (&a6.map(|z| z * b[13]) + &a4.map(|z| z * b[11]) + &a2.map(|z| z * b[9]))
        + &a6.map(|z| z * b[7])
        + &a4.map(|z| z * b[5])
        + &a2.map(|z| z * b[3])
        + &id.map(|z| z * b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6.map(|z| z * b[12]) + &a4.map(|z| z * b[10]) + &a2.map(|z| z * b[8]))
        + &a6.map(|z| z * b[6])
        + &a4.map(|z| z * b[4])
        + &a2.map(|z| z * b[2])
        + &id.map(|z| z * b[0]);
    let numer = &v + &u;
    let denom = &v - &u;
    let mut x = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        x = &x * &x;
    }
    OperatorMatrix::from_matrix(x, m.labels.clone())
}

/// Singular values in descending order.
pub fn singular_values(m: &OperatorMatrix) -> Vec<f64> {
    let svd = m.mat.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Right singular vector of the smallest singular value, together with the
/// two smallest singular values (smallest, second smallest).
pub fn smallest_singular_triplet(m: &OperatorMatrix) -> (f64, f64, DVector<C64>) {
    let svd = m.mat.clone().svd(false, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let smallest = sv[order[0]];
    let second = if order.len() > 1 { sv[order[1]] } else { f64::INFINITY };
    // Rows of Vᴴ are conjugated right singular vectors.
    let null_vec = v_t.row(order[0]).adjoint();
    (smallest, second, null_vec)
}
