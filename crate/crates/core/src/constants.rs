//! Pinned physical constants.
//!
//! All code in this crate reads constants from here so that numerical
//! outputs are reproducible and the `nvsim constants` subcommand can print
//! exactly what a run used. The table carries a version string that is
//! embedded in run manifests.

use std::f64::consts::PI;

/// Version of the pinned constants table (recorded in run manifests).
pub const CONSTANTS_VERSION: &str = "1";

/// Reduced Planck constant ħ [J·s] (2019 SI exact h / 2π, rounded).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity ε₀ [F/m] (CODATA 2018).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Speed of light in vacuum c [m/s] (exact).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Electron-volt [J] (exact).
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Bohr magneton in frequency units [MHz/G].
pub const MU_B_MHZ_PER_GAUSS: f64 = 1.3996;

/// Bohr magneton in angular frequency units [rad/s per G].
pub const MU_B_RAD_PER_S_PER_GAUSS: f64 = 2.0 * PI * MU_B_MHZ_PER_GAUSS * 1.0e6;

/// One row of the printable constants table.
#[derive(Debug, Clone, Copy)]
pub struct ConstantEntry {
    pub name: &'static str,
    pub symbol: &'static str,
    pub value: f64,
    pub unit: &'static str,
}

/// The full pinned table, in print order.
pub fn constants_table() -> Vec<ConstantEntry> {
    vec![
        ConstantEntry {
            name: "reduced Planck constant",
            symbol: "hbar",
            value: HBAR,
            unit: "J s",
        },
        ConstantEntry {
            name: "vacuum permittivity",
            symbol: "epsilon_0",
            value: EPSILON_0,
            unit: "F/m",
        },
        ConstantEntry {
            name: "speed of light",
            symbol: "c",
            value: SPEED_OF_LIGHT,
            unit: "m/s",
        },
        ConstantEntry {
            name: "electron volt",
            symbol: "eV",
            value: ELECTRON_VOLT,
            unit: "J",
        },
        ConstantEntry {
            name: "Bohr magneton (frequency units)",
            symbol: "mu_B",
            value: MU_B_MHZ_PER_GAUSS,
            unit: "MHz/G",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bohr_magneton_angular_matches_frequency_form() {
        let hz_per_gauss = MU_B_MHZ_PER_GAUSS * 1.0e6;
        assert!((MU_B_RAD_PER_S_PER_GAUSS / (2.0 * PI) - hz_per_gauss).abs() < 1e-6);
    }

    #[test]
    fn table_contains_all_pinned_constants() {
        let table = constants_table();
        assert_eq!(table.len(), 5);
        assert!(table.iter().any(|e| e.symbol == "hbar"));
        assert!(table.iter().any(|e| e.symbol == "mu_B"));
    }
}
