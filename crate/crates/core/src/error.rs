//! Crate-wide error type for model construction and numerical routines.

use thiserror::Error;

/// Errors surfaced by the physics and numerics layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum NvError {
    /// A matrix expected to be Hermitian deviates beyond tolerance.
    #[error("matrix is not Hermitian: max deviation {max_dev:.3e} exceeds {tol:.3e}")]
    NotHermitian { max_dev: f64, tol: f64 },

    /// An internal basis-change matrix failed its unitarity self-check.
    #[error("basis matrix is not unitary: max deviation {max_dev:.3e}")]
    NotUnitary { max_dev: f64 },

    /// Two coupled levels are (near-)degenerate, so the generator's
    /// energy denominator is ill-conditioned.
    #[error("degenerate denominator between levels {a} and {b}: gap {gap:.3e} rad/s")]
    DegenerateDenominator { a: usize, b: usize, gap: f64 },

    /// The perturbative branch separation condition 2δ > λ is violated.
    #[error("strain too weak for branch separation: 2δ = {two_delta:.3e} ≤ λ = {lambda:.3e} (rad/s)")]
    StrainTooWeak { two_delta: f64, lambda: f64 },

    /// The branch reduction assumes a purely axial magnetic field.
    #[error("transverse magnetic field components are not supported by the branch reduction")]
    TransverseFieldNotSupported,

    /// The closed-form branch Hamiltonians require δ > 0.
    #[error("strain δ must be positive for the closed-form branch Hamiltonians")]
    ZeroStrain,

    /// A branch-dependent quantity was requested exactly at zero detuning
    /// without specifying which side to take.
    #[error("detuning is zero: the ground-like polariton branch is ambiguous without a sign")]
    AmbiguousBranch,

    /// The far-detuned phase formula divides by the detuning.
    #[error("detuning is zero: far-detuned phase is undefined")]
    DivisionByZeroDetuning,

    /// A density matrix failed its validity checks.
    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    /// The superoperator null space is not one-dimensional.
    #[error("steady state is degenerate: singular-value ratio σ₂/σ₁ = {ratio:.3e} below threshold")]
    DegenerateSteadyState { ratio: f64 },

    /// A scan was requested over an empty list of points.
    #[error("scan requires at least one point")]
    EmptyScan,

    /// An argument fell outside its documented range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// A trajectory fit failed to converge.
    #[error("fit did not converge: {0}")]
    FitDidNotConverge(String),

    /// A trajectory has too few points or spans too little of a period to fit.
    #[error("insufficient trajectory span: {0}")]
    InsufficientSpan(String),

    /// A physical parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A quantity string could not be parsed into the expected unit.
    #[error("unit parse error: {0}")]
    UnitParse(String),
}

pub type Result<T> = std::result::Result<T, NvError>;
