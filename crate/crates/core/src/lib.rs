//! Numerical model of the diamond nitrogen-vacancy center's orbital–spin
//! fine structure and its optical control.
//!
//! The crate covers five layers:
//!
//! - ground- and excited-state fine-structure Hamiltonians over the six-level
//!   orbital ⊗ spin product basis ([`hamiltonian`]),
//! - strain-resolved effective branch Hamiltonians from a Schrieffer–Wolff
//!   reduction ([`branch`]),
//! - dispersive spin–photon coupling: polariton energies, optical Stark
//!   shifts, and Faraday rotation ([`polariton`]),
//! - open-system dynamics of the five-level Λ configuration under optical
//!   driving ([`lindblad`], [`lambda`]),
//! - ultrafast pulse-pair control of the ground-spin qubit ([`ultrafast`]).
//!
//! All frequencies and energies are handled internally in angular units
//! (rad/s); [`units`] parses human-readable quantities such as `"2.87 GHz"`
//! at the configuration boundary.

pub mod branch;
pub mod constants;
pub mod error;
pub mod hamiltonian;
pub mod lambda;
pub mod lindblad;
pub mod numerics;
pub mod params;
pub mod polariton;
pub mod scenario;
pub mod ultrafast;
pub mod units;

pub use error::{NvError, Result};
pub use numerics::{C64, OperatorMatrix};
pub use params::{FieldConfig, NvParams};
