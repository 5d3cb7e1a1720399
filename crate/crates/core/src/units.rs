//! Unit-suffixed quantity parsing and conversion.
//!
//! Config files carry every physical quantity as a string with an explicit
//! unit suffix (e.g. `"5.33 GHz"`, `"110 G"`, `"-0.08 rad"`). This module
//! converts those strings to the crate's internal canonical units:
//!
//! - energies and frequencies: angular frequency in rad/s (`1 GHz` ⇒ `2π×10⁹ rad/s`)
//! - photon energies: joules
//! - times: seconds; powers: watts; areas: m²
//! - magnetic fields: gauss; angles: radians

use crate::error::{NvError, Result};
use std::f64::consts::PI;

fn split_quantity<'a>(s: &'a str, kind: &str) -> Result<(f64, &'a str)> {
    let trimmed = s.trim();
    // Whitespace-separated form: "<number> <unit>".
    if let Some(pos) = trimmed.find(char::is_whitespace) {
        let (num_part, unit_part) = trimmed.split_at(pos);
        let value: f64 = num_part.parse().map_err(|_| {
            NvError::UnitParse(format!("cannot parse number in {kind} quantity {s:?}"))
        })?;
        if !value.is_finite() {
            return Err(NvError::UnitParse(format!(
                "non-finite value in {kind} quantity {s:?}"
            )));
        }
        return Ok((value, unit_part.trim()));
    }
    // Attached form ("110G", "1e-6s"): take the longest numeric prefix.
    for i in (1..=trimmed.len()).rev() {
        if !trimmed.is_char_boundary(i) {
            continue;
        }
        if let Ok(value) = trimmed[..i].parse::<f64>() {
            if value.is_finite() {
                return Ok((value, trimmed[i..].trim()));
            }
        }
    }
    Err(NvError::UnitParse(format!(
        "cannot parse number in {kind} quantity {s:?}"
    )))
}

/// Parse a frequency- or energy-like quantity into angular frequency [rad/s].
///
/// Accepts `Hz`, `kHz`, `MHz`, `GHz`, `THz` (multiplied by 2π) and `rad/s`
/// (taken verbatim).
pub fn parse_angular_frequency(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "frequency")?;
    let factor = match unit {
        "Hz" => 2.0 * PI,
        "kHz" => 2.0 * PI * 1e3,
        "MHz" => 2.0 * PI * 1e6,
        "GHz" => 2.0 * PI * 1e9,
        "THz" => 2.0 * PI * 1e12,
        "rad/s" => 1.0,
        "" => {
            return Err(NvError::UnitParse(format!(
                "frequency quantity {s:?} is missing a unit (expected Hz/kHz/MHz/GHz/THz/rad/s)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown frequency unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse a rate quantity into 1/s. Accepts `1/s`, `1/ns`, `1/us`, `1/ms`, `Hz`.
pub fn parse_rate(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "rate")?;
    let factor = match unit {
        "1/s" | "Hz" => 1.0,
        "1/ms" => 1e3,
        "1/us" | "1/µs" => 1e6,
        "1/ns" => 1e9,
        "" => {
            return Err(NvError::UnitParse(format!(
                "rate quantity {s:?} is missing a unit (expected 1/s, 1/ns, ...)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown rate unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse an energy quantity into joules. Accepts `eV`, `meV`, `J`.
pub fn parse_energy(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "energy")?;
    let factor = match unit {
        "eV" => crate::constants::ELECTRON_VOLT,
        "meV" => crate::constants::ELECTRON_VOLT * 1e-3,
        "J" => 1.0,
        "" => {
            return Err(NvError::UnitParse(format!(
                "energy quantity {s:?} is missing a unit (expected eV/meV/J)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown energy unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse a time quantity into seconds. Accepts `s`, `ms`, `us`/`µs`, `ns`, `ps`, `fs`.
pub fn parse_time(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "time")?;
    let factor = match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        "fs" => 1e-15,
        "" => {
            return Err(NvError::UnitParse(format!(
                "time quantity {s:?} is missing a unit (expected s/ms/us/ns/ps/fs)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown time unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse a power quantity into watts. Accepts `W`, `mW`, `uW`/`µW`, `nW`.
pub fn parse_power(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "power")?;
    let factor = match unit {
        "W" => 1.0,
        "mW" => 1e-3,
        "uW" | "µW" => 1e-6,
        "nW" => 1e-9,
        "" => {
            return Err(NvError::UnitParse(format!(
                "power quantity {s:?} is missing a unit (expected W/mW/uW/nW)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown power unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse an area quantity into m². Accepts `m^2`, `um^2`/`µm^2`, `nm^2`.
pub fn parse_area(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "area")?;
    let factor = match unit {
        "m^2" | "m2" => 1.0,
        "um^2" | "µm^2" | "um2" => 1e-12,
        "nm^2" | "nm2" => 1e-18,
        "" => {
            return Err(NvError::UnitParse(format!(
                "area quantity {s:?} is missing a unit (expected m^2/um^2/nm^2)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown area unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse a magnetic-field quantity into gauss. Accepts `G`, `mT`, `T`.
pub fn parse_field_gauss(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "magnetic field")?;
    let factor = match unit {
        "G" => 1.0,
        "mT" => 10.0,
        "T" => 1e4,
        "" => {
            return Err(NvError::UnitParse(format!(
                "field quantity {s:?} is missing a unit (expected G/mT/T)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown field unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse an angle quantity into radians. Accepts `rad`, `mrad`, `deg`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let (value, unit) = split_quantity(s, "angle")?;
    let factor = match unit {
        "rad" => 1.0,
        "mrad" => 1e-3,
        "deg" => PI / 180.0,
        "" => {
            return Err(NvError::UnitParse(format!(
                "angle quantity {s:?} is missing a unit (expected rad/mrad/deg)"
            )))
        }
        other => {
            return Err(NvError::UnitParse(format!(
                "unknown angle unit {other:?} in {s:?}"
            )))
        }
    };
    Ok(value * factor)
}

/// Convert an internal angular frequency [rad/s] to an ordinary frequency [Hz].
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Convert an ordinary frequency [Hz] to an internal angular frequency [rad/s].
pub fn hz_to_angular(hz: f64) -> f64 {
    hz * 2.0 * PI
}

/// Angular frequency (rad/s) of `f` gigahertz.
pub fn ghz(f: f64) -> f64 {
    hz_to_angular(f * 1e9)
}

/// Angular frequency (rad/s) of `f` megahertz.
pub fn mhz(f: f64) -> f64 {
    hz_to_angular(f * 1e6)
}

/// Angular frequency (rad/s) of `f` kilohertz.
pub fn khz(f: f64) -> f64 {
    hz_to_angular(f * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_gigahertz_is_two_pi_e9() {
        let w = parse_angular_frequency("1 GHz").unwrap();
        assert_eq!(w, 2.0 * PI * 1e9);
    }

    #[test]
    fn frequency_units_scale_correctly() {
        let close = |got: f64, want: f64| (got - want).abs() <= 1e-12 * want.abs();
        assert!(close(
            parse_angular_frequency("5.33 GHz").unwrap(),
            2.0 * PI * 5.33e9
        ));
        assert!(close(
            parse_angular_frequency("150 MHz").unwrap(),
            2.0 * PI * 150e6
        ));
        assert!(close(
            parse_angular_frequency("10 kHz").unwrap(),
            2.0 * PI * 1e4
        ));
        assert_eq!(parse_angular_frequency("3.5 rad/s").unwrap(), 3.5);
    }

    #[test]
    fn negative_and_spaceless_quantities_parse() {
        assert_eq!(parse_angle("-0.08 rad").unwrap(), -0.08);
        assert_eq!(parse_angle("-0.08rad").unwrap(), -0.08);
        assert_eq!(parse_field_gauss("110G").unwrap(), 110.0);
    }

    #[test]
    fn scientific_notation_parses() {
        assert_eq!(parse_time("1e-6 s").unwrap(), 1e-6);
        assert_eq!(parse_power("2.5E-3 W").unwrap(), 2.5e-3);
    }

    #[test]
    fn missing_unit_is_rejected() {
        assert!(matches!(
            parse_angular_frequency("5.33"),
            Err(NvError::UnitParse(_))
        ));
        assert!(matches!(parse_field_gauss("110"), Err(NvError::UnitParse(_))));
    }

    #[test]
    fn unknown_unit_is_rejected() {
        assert!(matches!(
            parse_angular_frequency("5.33 parsec"),
            Err(NvError::UnitParse(_))
        ));
    }

    #[test]
    fn derived_units_convert() {
        assert_eq!(parse_energy("1.945 eV").unwrap(), 1.945 * crate::constants::ELECTRON_VOLT);
        assert_eq!(parse_time("13 ns").unwrap(), 13e-9);
        assert_eq!(parse_power("1 uW").unwrap(), 1e-6);
        assert_eq!(parse_field_gauss("0.1 T").unwrap(), 1000.0);
        assert!((parse_angle("180 deg").unwrap() - PI).abs() < 1e-15);
        assert_eq!(parse_rate("13 1/ns").unwrap(), 13e9);
    }

    #[test]
    fn round_trip_hz_conversion() {
        let w = hz_to_angular(2.87e9);
        assert!((angular_to_hz(w) - 2.87e9).abs() < 1e-3);
    }
}
