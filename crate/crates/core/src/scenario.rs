//! Scenario runner: binds the physics modules to strictly-parsed TOML
//! configs and deterministic dataset files.
//!
//! A config names one scenario, an output file, optional parameter/field
//! overrides, and one scenario-specific block. Every physical quantity in a
//! config is a string with an explicit unit suffix (see [`crate::units`]);
//! bare numbers are reserved for dimensionless quantities and counts.
//! Outputs contain no timestamps, so re-running a config reproduces them
//! byte for byte; the run manifest (on standard output) holds the clock.

use crate::branch::{h_eff_closed_form, h_eff_numeric, BranchHamiltonians};
use crate::constants::{constants_table, CONSTANTS_VERSION};
use crate::error::NvError;
use crate::hamiltonian::{fine_structure_scan, h_es_total, ScanAxis};
use crate::lambda::{
    bloch_vector, fidelity, Branch, LambdaModel, LevelSelection, RateTable,
};
use crate::lindblad::DensityMatrix;
use crate::numerics::{cr, eigh, C64};
use crate::params::{FieldConfig, NvParams};
use crate::polariton::{
    coupling_constant_d, faraday_phase, stark_from_faraday, FaradayMode, OpticalPulse,
    Transition, TransitionSet,
};
use crate::ultrafast::{
    extract_precession, ground_qubit_labels, tdqt_scan, EffectiveFourLevel, PulseSpec,
    TdqtBackend,
};
use crate::units::{
    angular_to_hz, parse_angle, parse_angular_frequency, parse_area, parse_energy,
    parse_field_gauss, parse_power, parse_rate, parse_time,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Errors from loading, validating, or executing a scenario, split by exit
/// code: config problems exit 2, physics/numerics problems exit 3.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Model(NvError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Model(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config error: {msg}"),
            RunError::Model(e) => write!(f, "model error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

type RunResult<T> = std::result::Result<T, RunError>;

/// Wrap a unit/validation error with the config key it came from.
fn keyed<T>(r: crate::error::Result<T>, key: &str) -> RunResult<T> {
    r.map_err(|e| RunError::Config(format!("key `{key}`: {e}")))
}

// ---------------------------------------------------------------------------
// Raw config schema (strict: unknown keys are rejected everywhere).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ScenarioKind {
    Levels,
    SwCompare,
    StarkFaraday,
    Cpt,
    Srt,
    Tdqt,
}

impl ScenarioKind {
    fn name(self) -> &'static str {
        match self {
            ScenarioKind::Levels => "levels",
            ScenarioKind::SwCompare => "sw-compare",
            ScenarioKind::StarkFaraday => "stark-faraday",
            ScenarioKind::Cpt => "cpt",
            ScenarioKind::Srt => "srt",
            ScenarioKind::Tdqt => "tdqt",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioKind,
    output: RawOutput,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    field: RawField,
    levels: Option<RawLevels>,
    sw_compare: Option<RawSwCompare>,
    stark_faraday: Option<RawStarkFaraday>,
    cpt: Option<RawLambda>,
    srt: Option<RawLambda>,
    tdqt: Option<RawTdqt>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: String,
    format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    lambda_so: Option<String>,
    d_es: Option<String>,
    delta1: Option<String>,
    delta2: Option<String>,
    d_gs: Option<String>,
    g_gs: Option<f64>,
    g_es_par: Option<f64>,
    g_es_perp: Option<f64>,
    l_z: Option<f64>,
    gamma_r: Option<String>,
    e_ph: Option<String>,
    n_diamond: Option<f64>,
    f_dw: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    b_field: Option<[String; 3]>,
    strain_delta: Option<String>,
    strain_angle: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    axis: String,
    min: String,
    max: String,
    points: usize,
    include_diamagnetic: Option<bool>,
    adiabatic: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwCompare {
    delta_min: String,
    delta_max: String,
    points: usize,
    log_spacing: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStarkFaraday {
    omega_s: String,
    power: String,
    detuning_min: String,
    detuning_max: String,
    points: usize,
    mode: Option<String>,
    pulse: Option<RawFarDetunedPulse>,
    line_0: Option<RawLine>,
    line_minus1: Option<RawLine>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFarDetunedPulse {
    duration: String,
    mode_area: String,
    dipole_angle: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    linewidth: Option<String>,
    faraday_amplitude: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLambda {
    selection: Option<String>,
    delta_l: String,
    delta_e: String,
    omega: String,
    theta: String,
    phi: Option<String>,
    epsilon_s: Option<String>,
    t_max: String,
    points: usize,
    initial: Option<String>,
    fidelity_branch: Option<String>,
    rates: Option<RawRates>,
    snapshots_path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRates {
    gamma_rad: Option<String>,
    gamma_isc: Option<String>,
    gamma_isc_rev: Option<String>,
    isc_branching_plus: Option<f64>,
    gamma_1: Option<String>,
    gamma_phi: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTdqt {
    backend: String,
    omega_gs: Option<String>,
    omega_es: Option<String>,
    eta: Option<String>,
    omega_opt: Option<String>,
    bz_points: Option<Vec<String>>,
    t_min: Option<String>,
    t_max: String,
    points: usize,
    pulse: Option<RawTdqtPulse>,
    initial: Option<String>,
    gamma_rad: Option<String>,
    fit_path: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTdqtPulse {
    alpha_e: Option<String>,
    beta_e: Option<String>,
    theta: Option<String>,
    phi2: Option<String>,
}

// ---------------------------------------------------------------------------
// Output tables.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

/// One table cell; numbers are written with full double precision.
#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format!("{v:.16e}"),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let columns: Vec<serde_json::Value> = self
            .columns
            .iter()
            .map(|c| serde_json::Value::String((*c).to_string()))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                serde_json::Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(v) => serde_json::json!(v),
                            Cell::Int(v) => serde_json::json!(v),
                            Cell::Text(s) => serde_json::Value::String(s.clone()),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({ "columns": columns, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("JSON table serialization cannot fail")
    }
}

/// A file the scenario wants written.
struct OutputFile {
    path: PathBuf,
    contents: String,
}

/// Run summary printed to standard output as JSON. Data files never contain
/// timestamps; the wall time lives here.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub constants_version: &'static str,
    pub scenario: String,
    pub config_path: String,
    pub config_sha256: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

// ---------------------------------------------------------------------------
// Entry points.
// ---------------------------------------------------------------------------

/// Load, validate, and execute a scenario config; write its data files and
/// return the manifest.
pub fn run(config_path: &Path) -> RunResult<RunManifest> {
    let started = Instant::now();
    let bytes = std::fs::read(config_path).map_err(|e| {
        RunError::Config(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let sha = sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|e| RunError::Config(format!("config is not UTF-8: {e}")))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| RunError::Config(e.to_string()))?;

    let format = match raw.output.format.as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            return Err(RunError::Config(format!(
                "key `output.format`: unknown format {other:?} (expected \"csv\" or \"json\")"
            )))
        }
    };
    let out_path = PathBuf::from(&raw.output.path);

    let params = resolve_params(&raw.params)?;
    keyed(params.validate(), "params")?;
    let field = resolve_field(&raw.field)?;
    keyed(field.validate(), "field")?;
    require_matching_block(&raw)?;

    let files = match raw.scenario {
        ScenarioKind::Levels => {
            run_levels(raw.levels.as_ref().unwrap(), &params, &field, format, &out_path)?
        }
        ScenarioKind::SwCompare => run_sw_compare(
            raw.sw_compare.as_ref().unwrap(),
            &params,
            &field,
            format,
            &out_path,
        )?,
        ScenarioKind::StarkFaraday => run_stark_faraday(
            raw.stark_faraday.as_ref().unwrap(),
            &params,
            format,
            &out_path,
        )?,
        ScenarioKind::Cpt => {
            run_lambda(raw.cpt.as_ref().unwrap(), "cpt", format, &out_path)?
        }
        ScenarioKind::Srt => {
            run_lambda(raw.srt.as_ref().unwrap(), "srt", format, &out_path)?
        }
        ScenarioKind::Tdqt => {
            run_tdqt(raw.tdqt.as_ref().unwrap(), &params, &field, format, &out_path)?
        }
    };

    let mut outputs = Vec::with_capacity(files.len());
    for f in &files {
        if let Some(parent) = f.path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| {
                    RunError::Config(format!(
                        "cannot create output directory {}: {e}",
                        parent.display()
                    ))
                })?;
            }
        }
        std::fs::write(&f.path, &f.contents).map_err(|e| {
            RunError::Config(format!("cannot write {}: {e}", f.path.display()))
        })?;
        outputs.push(f.path.display().to_string());
    }

    Ok(RunManifest {
        tool: "nvsim",
        tool_version: env!("CARGO_PKG_VERSION"),
        constants_version: CONSTANTS_VERSION,
        scenario: raw.scenario.name().to_string(),
        config_path: config_path.display().to_string(),
        config_sha256: sha,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
    })
}

/// Human-readable scenario table for `nvsim list`.
pub fn list_text() -> String {
    let entries: [(&str, &str, &str); 6] = [
        (
            "levels",
            "Excited-state fine structure vs axial field or strain: diagonalizes the 6-level orbital+spin Hamiltonian along a sweep with adiabatic branch tracking.",
            "[levels] axis=\"bz\"|\"strain\", min, max, points, include_diamagnetic?, adiabatic?",
        ),
        (
            "sw-compare",
            "Orbital-branch reduction accuracy: compares closed-form and numerically generated effective branch Hamiltonians against exact 6-level eigenvalues over a strain sweep.",
            "[sw_compare] delta_min, delta_max, points, log_spacing?",
        ),
        (
            "stark-faraday",
            "Dispersive spin-light interface: sweeps laser detuning and emits the spin-dependent Faraday rotation (odd-Lorentzian or far-detuned form) and the optical Stark shift inferred from it.",
            "[stark_faraday] omega_s, power, detuning_min, detuning_max, points, mode?, pulse?, line_0?, line_minus1?",
        ),
        (
            "cpt",
            "Coherent population trapping: drives the 5-level (or reduced 3-level) Λ-system on two-photon resonance and records the ground-qubit Bloch vector and dark-state fidelity as it is pumped dark.",
            "[cpt] selection?, delta_l, delta_e, omega, theta, phi?, epsilon_s?, t_max, points, initial?, fidelity_branch?, rates?, snapshots_path?",
        ),
        (
            "srt",
            "Stimulated Raman rotations: same Λ-system run far detuned, where the drive rotates the ground qubit about the dark-state axis; output schema identical to cpt.",
            "[srt] (same keys as [cpt])",
        ),
        (
            "tdqt",
            "Ultrafast pulse-pair tomography: scans the delay between two full-transfer optical pulses, records the resulting ground-spin Bloch trajectory, and fits the excited-state precession rate and axis tilt.",
            "[tdqt] backend=\"effective\"|\"lower-branch\", model keys, t_min?, t_max, points, pulse?, initial?, gamma_rad?, fit_path",
        ),
    ];
    let mut out = String::from("available scenarios:\n\n");
    for (name, what, schema) in entries {
        out.push_str(&format!("  {name}\n      {what}\n      config: {schema}\n\n"));
    }
    out.push_str("run one with: nvsim run <config.toml>\n");
    out
}

/// Pinned-constants table for `nvsim constants`.
pub fn constants_text() -> String {
    let mut out = format!("pinned physical constants (table version {CONSTANTS_VERSION}):\n\n");
    for e in constants_table() {
        out.push_str(&format!(
            "  {:<10} = {:.10e} {:<6} ({})\n",
            e.symbol, e.value, e.unit, e.name
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Config resolution helpers.
// ---------------------------------------------------------------------------

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn resolve_params(raw: &RawParams) -> RunResult<NvParams> {
    let mut p = NvParams::default();
    if let Some(s) = &raw.lambda_so {
        p.lambda_so = keyed(parse_angular_frequency(s), "params.lambda_so")?;
    }
    if let Some(s) = &raw.d_es {
        p.d_es = keyed(parse_angular_frequency(s), "params.d_es")?;
    }
    if let Some(s) = &raw.delta1 {
        p.delta1 = keyed(parse_angular_frequency(s), "params.delta1")?;
    }
    if let Some(s) = &raw.delta2 {
        p.delta2 = keyed(parse_angular_frequency(s), "params.delta2")?;
    }
    if let Some(s) = &raw.d_gs {
        p.d_gs = keyed(parse_angular_frequency(s), "params.d_gs")?;
    }
    if let Some(v) = raw.g_gs {
        p.g_gs = v;
    }
    if let Some(v) = raw.g_es_par {
        p.g_es_par = v;
    }
    if let Some(v) = raw.g_es_perp {
        p.g_es_perp = v;
    }
    if let Some(v) = raw.l_z {
        p.l_z = v;
    }
    if let Some(s) = &raw.gamma_r {
        p.gamma_r = keyed(parse_rate(s), "params.gamma_r")?;
    }
    if let Some(s) = &raw.e_ph {
        p.e_ph = keyed(parse_energy(s), "params.e_ph")?;
    }
    if let Some(v) = raw.n_diamond {
        p.n_diamond = v;
    }
    if let Some(v) = raw.f_dw {
        p.f_dw = v;
    }
    Ok(p)
}

fn resolve_field(raw: &RawField) -> RunResult<FieldConfig> {
    let mut f = FieldConfig::default();
    if let Some(b) = &raw.b_field {
        for (i, s) in b.iter().enumerate() {
            f.b_field[i] = keyed(parse_field_gauss(s), &format!("field.b_field[{i}]"))?;
        }
    }
    if let Some(s) = &raw.strain_delta {
        f.strain_delta = keyed(parse_angular_frequency(s), "field.strain_delta")?;
    }
    if let Some(s) = &raw.strain_angle {
        f.strain_angle = keyed(parse_angle(s), "field.strain_angle")?;
    }
    Ok(f)
}

/// Exactly the block matching `scenario` must be present.
fn require_matching_block(raw: &RawConfig) -> RunResult<()> {
    let blocks: [(&str, bool); 6] = [
        ("levels", raw.levels.is_some()),
        ("sw_compare", raw.sw_compare.is_some()),
        ("stark_faraday", raw.stark_faraday.is_some()),
        ("cpt", raw.cpt.is_some()),
        ("srt", raw.srt.is_some()),
        ("tdqt", raw.tdqt.is_some()),
    ];
    let wanted = match raw.scenario {
        ScenarioKind::Levels => "levels",
        ScenarioKind::SwCompare => "sw_compare",
        ScenarioKind::StarkFaraday => "stark_faraday",
        ScenarioKind::Cpt => "cpt",
        ScenarioKind::Srt => "srt",
        ScenarioKind::Tdqt => "tdqt",
    };
    for (name, present) in blocks {
        if name == wanted && !present {
            return Err(RunError::Config(format!(
                "scenario \"{}\" requires a [{name}] block",
                raw.scenario.name()
            )));
        }
        if name != wanted && present {
            return Err(RunError::Config(format!(
                "config has a [{name}] block but scenario is \"{}\"",
                raw.scenario.name()
            )));
        }
    }
    Ok(())
}

/// Inclusive linear grid with `points` entries (a single point sits at `min`).
fn linspace(min: f64, max: f64, points: usize, key: &str) -> RunResult<Vec<f64>> {
    if points == 0 {
        return Err(RunError::Config(format!("key `{key}`: points must be ≥ 1")));
    }
    if !(min.is_finite() && max.is_finite()) {
        return Err(RunError::Config(format!("key `{key}`: bounds must be finite")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    if max < min {
        return Err(RunError::Config(format!("key `{key}`: max must be ≥ min")));
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points).map(|i| min + step * i as f64).collect())
}

fn logspace(min: f64, max: f64, points: usize, key: &str) -> RunResult<Vec<f64>> {
    if !(min > 0.0 && max > 0.0) {
        return Err(RunError::Config(format!(
            "key `{key}`: log spacing requires positive bounds"
        )));
    }
    Ok(linspace(min.ln(), max.ln(), points, key)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

fn render(table: &Table, format: OutputFormat, path: &Path) -> OutputFile {
    OutputFile {
        path: path.to_path_buf(),
        contents: match format {
            OutputFormat::Csv => table.to_csv(),
            OutputFormat::Json => table.to_json(),
        },
    }
}

// ---------------------------------------------------------------------------
// Scenario implementations.
// ---------------------------------------------------------------------------

fn run_levels(
    raw: &RawLevels,
    params: &NvParams,
    field: &FieldConfig,
    format: OutputFormat,
    out_path: &Path,
) -> RunResult<Vec<OutputFile>> {
    let (axis, min, max) = match raw.axis.as_str() {
        "bz" => (
            ScanAxis::Bz,
            keyed(parse_field_gauss(&raw.min), "levels.min")?,
            keyed(parse_field_gauss(&raw.max), "levels.max")?,
        ),
        "strain" => (
            ScanAxis::Strain,
            keyed(parse_angular_frequency(&raw.min), "levels.min")?,
            keyed(parse_angular_frequency(&raw.max), "levels.max")?,
        ),
        other => {
            return Err(RunError::Config(format!(
                "key `levels.axis`: unknown axis {other:?} (expected \"bz\" or \"strain\")"
            )))
        }
    };
    let values = linspace(min, max, raw.points, "levels.points")?;
    let scan = fine_structure_scan(
        params,
        field,
        axis,
        &values,
        raw.include_diamagnetic.unwrap_or(false),
    )
    .map_err(RunError::Model)?;
    let eigenvalues = if raw.adiabatic.unwrap_or(true) {
        &scan.tracked
    } else {
        &scan.sorted
    };

    let mut rows = Vec::with_capacity(values.len());
    for (v, evs) in scan.values.iter().zip(eigenvalues) {
        // The scan column keeps the sweep's natural unit: gauss for a field
        // sweep, Hz for a strain sweep. Eigenvalue columns are Hz.
        let scan_value = match axis {
            ScanAxis::Bz => *v,
            ScanAxis::Strain => angular_to_hz(*v),
        };
        let mut row = vec![Cell::Num(scan_value)];
        row.extend(evs.iter().map(|&e| Cell::Num(angular_to_hz(e))));
        rows.push(row);
    }
    let table = Table {
        columns: vec!["scan_value", "e1", "e2", "e3", "e4", "e5", "e6"],
        rows,
    };
    Ok(vec![render(&table, format, out_path)])
}

/// Eigenvalues (ascending) of one reconstructed 3×3 branch Hamiltonian.
fn branch_eigenvalues(
    b: &BranchHamiltonians,
    lower: bool,
) -> crate::error::Result<Vec<f64>> {
    let (correction, block) = if lower {
        (&b.lower, [0usize, 1, 2])
    } else {
        (&b.upper, [3usize, 4, 5])
    };
    let shift = b
        .common_shift
        .submatrix(&block)
        .relabeled(correction.labels().to_vec());
    let (evals, _) = eigh(&(&shift + correction))?;
    Ok(evals)
}

fn run_sw_compare(
    raw: &RawSwCompare,
    params: &NvParams,
    field: &FieldConfig,
    format: OutputFormat,
    out_path: &Path,
) -> RunResult<Vec<OutputFile>> {
    let min = keyed(parse_angular_frequency(&raw.delta_min), "sw_compare.delta_min")?;
    let max = keyed(parse_angular_frequency(&raw.delta_max), "sw_compare.delta_max")?;
    let deltas = if raw.log_spacing.unwrap_or(false) {
        logspace(min, max, raw.points, "sw_compare")?
    } else {
        linspace(min, max, raw.points, "sw_compare.points")?
    };

    let mut rows = Vec::with_capacity(deltas.len() * 6);
    for &delta in &deltas {
        let mut f = field.clone();
        f.strain_delta = delta;
        let closed = h_eff_closed_form(params, &f).map_err(RunError::Model)?;
        let numeric = h_eff_numeric(params, &f).map_err(RunError::Model)?;
        let (exact, _) = eigh(&h_es_total(params, &f)).map_err(RunError::Model)?;
        for (branch_name, is_lower) in [("lower", true), ("upper", false)] {
            let e_closed = branch_eigenvalues(&closed, is_lower).map_err(RunError::Model)?;
            let e_numeric =
                branch_eigenvalues(&numeric, is_lower).map_err(RunError::Model)?;
            // With the branches separated by 2δ, the three smallest exact
            // eigenvalues belong to the lower branch.
            let e_exact = if is_lower { &exact[0..3] } else { &exact[3..6] };
            for level in 0..3 {
                rows.push(vec![
                    Cell::Num(angular_to_hz(delta)),
                    Cell::Text(branch_name.to_string()),
                    Cell::Int(level as u64 + 1),
                    Cell::Num(angular_to_hz(e_closed[level])),
                    Cell::Num(angular_to_hz(e_numeric[level])),
                    Cell::Num(angular_to_hz(e_exact[level])),
                ]);
            }
        }
    }
    let table = Table {
        columns: vec![
            "delta_hz",
            "branch",
            "level",
            "e_closed_hz",
            "e_numeric_hz",
            "e_exact_hz",
        ],
        rows,
    };
    Ok(vec![render(&table, format, out_path)])
}

fn run_stark_faraday(
    raw: &RawStarkFaraday,
    params: &NvParams,
    format: OutputFormat,
    out_path: &Path,
) -> RunResult<Vec<OutputFile>> {
    let omega_s = keyed(parse_angular_frequency(&raw.omega_s), "stark_faraday.omega_s")?;
    let power = keyed(parse_power(&raw.power), "stark_faraday.power")?;
    let d_min = keyed(
        parse_angular_frequency(&raw.detuning_min),
        "stark_faraday.detuning_min",
    )?;
    let d_max = keyed(
        parse_angular_frequency(&raw.detuning_max),
        "stark_faraday.detuning_max",
    )?;
    let detunings = linspace(d_min, d_max, raw.points, "stark_faraday.points")?;

    let e_ph_angular = params.e_ph / crate::constants::HBAR;
    let mut set = TransitionSet::fitted(e_ph_angular, omega_s);
    apply_line_override(&mut set, "0", raw.line_0.as_ref(), "stark_faraday.line_0")?;
    apply_line_override(
        &mut set,
        "-1",
        raw.line_minus1.as_ref(),
        "stark_faraday.line_minus1",
    )?;

    let mode = match raw.mode.as_deref() {
        None | Some("lorentzian") => FaradayMode::Lorentzian,
        Some("far-detuned") => {
            let pulse_cfg = raw.pulse.as_ref().ok_or_else(|| {
                RunError::Config(
                    "far-detuned mode requires a [stark_faraday.pulse] block".into(),
                )
            })?;
            let pulse = OpticalPulse {
                power,
                duration: keyed(parse_time(&pulse_cfg.duration), "stark_faraday.pulse.duration")?,
                mode_area: keyed(
                    parse_area(&pulse_cfg.mode_area),
                    "stark_faraday.pulse.mode_area",
                )?,
                dipole_angle: match &pulse_cfg.dipole_angle {
                    Some(s) => keyed(parse_angle(s), "stark_faraday.pulse.dipole_angle")?,
                    None => 0.0,
                },
                detunings: BTreeMap::new(),
            };
            keyed(pulse.validate(), "stark_faraday.pulse")?;
            FaradayMode::FarDetuned {
                d: coupling_constant_d(params, &pulse),
            }
        }
        Some(other) => {
            return Err(RunError::Config(format!(
                "key `stark_faraday.mode`: unknown mode {other:?} (expected \"lorentzian\" or \"far-detuned\")"
            )))
        }
    };

    let mut rows = Vec::with_capacity(detunings.len());
    for &delta in &detunings {
        let phi = faraday_phase(&set, delta, mode).map_err(RunError::Model)?;
        let stark = stark_from_faraday(power, params.e_ph, phi);
        rows.push(vec![
            Cell::Num(angular_to_hz(delta)),
            Cell::Num(stark),
            Cell::Num(phi),
        ]);
    }
    let table = Table {
        columns: vec!["detuning_hz", "stark_hz", "faraday_rad"],
        rows,
    };
    Ok(vec![render(&table, format, out_path)])
}

fn apply_line_override(
    set: &mut TransitionSet,
    label: &str,
    raw: Option<&RawLine>,
    key: &str,
) -> RunResult<()> {
    let Some(raw) = raw else { return Ok(()) };
    let line: &mut Transition = set
        .transitions
        .get_mut(label)
        .expect("fitted transition set always contains both lines");
    if let Some(s) = &raw.linewidth {
        line.linewidth = keyed(parse_angular_frequency(s), &format!("{key}.linewidth"))?;
    }
    if let Some(s) = &raw.faraday_amplitude {
        line.faraday_amplitude = keyed(
            parse_angular_frequency(s),
            &format!("{key}.faraday_amplitude"),
        )?;
    }
    let rebuilt = TransitionSet::new(set.transitions.clone());
    *set = keyed(rebuilt, key)?;
    Ok(())
}

fn resolve_rates(raw: Option<&RawRates>, key: &str) -> RunResult<RateTable> {
    let mut rates = RateTable::default();
    let Some(raw) = raw else { return Ok(rates) };
    if let Some(s) = &raw.gamma_rad {
        rates.gamma_rad = keyed(parse_rate(s), &format!("{key}.gamma_rad"))?;
    }
    if let Some(s) = &raw.gamma_isc {
        rates.gamma_isc = keyed(parse_rate(s), &format!("{key}.gamma_isc"))?;
    }
    if let Some(s) = &raw.gamma_isc_rev {
        rates.gamma_isc_rev = keyed(parse_rate(s), &format!("{key}.gamma_isc_rev"))?;
    }
    if let Some(v) = raw.isc_branching_plus {
        rates.isc_branching_plus = v;
    }
    if let Some(s) = &raw.gamma_1 {
        rates.gamma_1 = keyed(parse_rate(s), &format!("{key}.gamma_1"))?;
    }
    if let Some(s) = &raw.gamma_phi {
        rates.gamma_phi = keyed(parse_rate(s), &format!("{key}.gamma_phi"))?;
    }
    Ok(rates)
}

fn run_lambda(
    raw: &RawLambda,
    key: &str,
    format: OutputFormat,
    out_path: &Path,
) -> RunResult<Vec<OutputFile>> {
    let selection = match raw.selection.as_deref() {
        None | Some("five-level") => LevelSelection::FiveLevel,
        Some("single-lambda-r") => LevelSelection::SingleLambda(Branch::R),
        Some("single-lambda-l") => LevelSelection::SingleLambda(Branch::L),
        Some(other) => {
            return Err(RunError::Config(format!(
                "key `{key}.selection`: unknown selection {other:?}"
            )))
        }
    };
    let fidelity_branch = match raw.fidelity_branch.as_deref() {
        None | Some("r") => Branch::R,
        Some("l") => Branch::L,
        Some(other) => {
            return Err(RunError::Config(format!(
                "key `{key}.fidelity_branch`: unknown branch {other:?} (expected \"r\" or \"l\")"
            )))
        }
    };
    let model = LambdaModel::new(
        keyed(parse_angular_frequency(&raw.delta_l), &format!("{key}.delta_l"))?,
        keyed(parse_angular_frequency(&raw.delta_e), &format!("{key}.delta_e"))?,
        keyed(parse_angular_frequency(&raw.omega), &format!("{key}.omega"))?,
        keyed(parse_angle(&raw.theta), &format!("{key}.theta"))?,
        match &raw.phi {
            Some(s) => keyed(parse_angle(s), &format!("{key}.phi"))?,
            None => 0.0,
        },
        match &raw.epsilon_s {
            Some(s) => keyed(parse_angular_frequency(s), &format!("{key}.epsilon_s"))?,
            None => 0.0,
        },
        resolve_rates(raw.rates.as_ref(), &format!("{key}.rates"))?,
        selection,
    )
    .map_err(|e| RunError::Config(format!("key `{key}`: {e}")))?;

    let t_max = keyed(parse_time(&raw.t_max), &format!("{key}.t_max"))?;
    let times = linspace(0.0, t_max, raw.points, &format!("{key}.points"))?;

    let labels = model.labels();
    let rho0 = match raw.initial.as_deref().unwrap_or("0g") {
        "dark-r" => DensityMatrix::from_pure(labels.clone(), &model.dark_state_vector(Branch::R)),
        "dark-l" => DensityMatrix::from_pure(labels.clone(), &model.dark_state_vector(Branch::L)),
        name => match labels.iter().position(|l| l == name) {
            Some(i) => DensityMatrix::basis_state(labels.clone(), i),
            None => {
                return Err(RunError::Config(format!(
                    "key `{key}.initial`: unknown state {name:?} (levels: {}, or \"dark-r\"/\"dark-l\")",
                    labels.join(", ")
                )))
            }
        },
    }
    .map_err(RunError::Model)?;

    let states = model.evolve(&rho0, &times).map_err(RunError::Model)?;
    let dark = model.dark_state_vector(fidelity_branch);
    let excited_indices: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.as_str() == "Re" || l.as_str() == "Le")
        .map(|(i, _)| i)
        .collect();
    let singlet_index = labels.iter().position(|l| l == "S");

    let mut rows = Vec::with_capacity(times.len());
    for (t, rho) in times.iter().zip(&states) {
        let b = bloch_vector(rho);
        let fid = fidelity(rho, &dark).map_err(RunError::Model)?;
        let p_excited: f64 = excited_indices.iter().map(|&i| rho.population(i)).sum();
        let p_singlet = singlet_index.map_or(0.0, |i| rho.population(i));
        rows.push(vec![
            Cell::Num(*t),
            Cell::Num(b.bx),
            Cell::Num(b.by),
            Cell::Num(b.bz),
            Cell::Num(fid),
            Cell::Num(p_excited),
            Cell::Num(p_singlet),
        ]);
    }
    let table = Table {
        columns: vec!["t_s", "bx", "by", "bz", "fidelity", "p_excited", "p_singlet"],
        rows,
    };

    let mut files = vec![render(&table, format, out_path)];
    if let Some(snap_path) = &raw.snapshots_path {
        files.push(OutputFile {
            path: PathBuf::from(snap_path),
            contents: snapshots_json(&labels, &times, &states),
        });
    }
    Ok(files)
}

/// Full ρ(t) snapshots as JSON: entries are [re, im] pairs, row-major.
fn snapshots_json(labels: &[String], times: &[f64], states: &[DensityMatrix]) -> String {
    let snaps: Vec<serde_json::Value> = times
        .iter()
        .zip(states)
        .map(|(t, rho)| {
            let n = rho.dim();
            let rows: Vec<serde_json::Value> = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| {
                            let z = rho.matrix().entry(r, c);
                            serde_json::json!([z.re, z.im])
                        })
                        .collect::<Vec<_>>()
                        .into()
                })
                .collect();
            serde_json::json!({ "t_s": t, "rho": rows })
        })
        .collect();
    let doc = serde_json::json!({ "labels": labels, "snapshots": snaps });
    serde_json::to_string_pretty(&doc).expect("JSON snapshot serialization cannot fail")
}

fn tdqt_initial(name: &str) -> RunResult<DensityMatrix> {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes: [C64; 2] = match name {
        "0" => [cr(1.0), cr(0.0)],
        "+1" => [cr(0.0), cr(1.0)],
        "plus-x" => [cr(inv), cr(inv)],
        "minus-x" => [cr(inv), cr(-inv)],
        "plus-y" => [cr(inv), C64::new(0.0, inv)],
        "minus-y" => [cr(inv), C64::new(0.0, -inv)],
        other => {
            return Err(RunError::Config(format!(
                "key `tdqt.initial`: unknown state {other:?} (expected \"0\", \"+1\", \"plus-x\", \"minus-x\", \"plus-y\", \"minus-y\")"
            )))
        }
    };
    DensityMatrix::from_pure(ground_qubit_labels(), &amplitudes).map_err(RunError::Model)
}

/// Insert `_p<k>` before the extension for multi-point runs.
fn numbered_path(path: &Path, index: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned());
    let name = match (stem, ext) {
        (Some(stem), Some(ext)) => format!("{stem}_p{index}.{ext}"),
        (Some(stem), None) => format!("{stem}_p{index}"),
        _ => format!("output_p{index}"),
    };
    path.with_file_name(name)
}

fn run_tdqt(
    raw: &RawTdqt,
    params: &NvParams,
    field: &FieldConfig,
    format: OutputFormat,
    out_path: &Path,
) -> RunResult<Vec<OutputFile>> {
    let t_min = match &raw.t_min {
        Some(s) => keyed(parse_time(s), "tdqt.t_min")?,
        None => 0.0,
    };
    let t_max = keyed(parse_time(&raw.t_max), "tdqt.t_max")?;
    let times = linspace(t_min, t_max, raw.points, "tdqt.points")?;

    let (theta, phi2, alpha_e, beta_e) = match &raw.pulse {
        None => (std::f64::consts::PI, 0.0, 0.0, 0.0),
        Some(p) => (
            match &p.theta {
                Some(s) => keyed(parse_angle(s), "tdqt.pulse.theta")?,
                None => std::f64::consts::PI,
            },
            match &p.phi2 {
                Some(s) => keyed(parse_angle(s), "tdqt.pulse.phi2")?,
                None => 0.0,
            },
            match &p.alpha_e {
                Some(s) => keyed(parse_angle(s), "tdqt.pulse.alpha_e")?,
                None => 0.0,
            },
            match &p.beta_e {
                Some(s) => keyed(parse_angle(s), "tdqt.pulse.beta_e")?,
                None => 0.0,
            },
        ),
    };
    let pulse1 = PulseSpec {
        alpha_e,
        beta_e,
        theta,
        phi: 0.0,
    };
    let pulse2 = PulseSpec {
        alpha_e,
        beta_e,
        theta,
        phi: phi2,
    };
    let rho0 = tdqt_initial(raw.initial.as_deref().unwrap_or("0"))?;
    let gamma_rad = match &raw.gamma_rad {
        Some(s) => Some(keyed(parse_rate(s), "tdqt.gamma_rad")?),
        None => None,
    };
    let fit_path = PathBuf::from(&raw.fit_path);

    // Build one backend per field point.
    let backends: Vec<TdqtBackend> = match raw.backend.as_str() {
        "effective" => {
            if raw.bz_points.is_some() {
                return Err(RunError::Config(
                    "key `tdqt.bz_points` only applies to the \"lower-branch\" backend".into(),
                ));
            }
            let need = |opt: &Option<String>, key: &str| {
                opt.clone().ok_or_else(|| {
                    RunError::Config(format!(
                        "key `{key}` is required for the \"effective\" backend"
                    ))
                })
            };
            let e = EffectiveFourLevel {
                omega_gs: keyed(
                    parse_angular_frequency(&need(&raw.omega_gs, "tdqt.omega_gs")?),
                    "tdqt.omega_gs",
                )?,
                omega_es: keyed(
                    parse_angular_frequency(&need(&raw.omega_es, "tdqt.omega_es")?),
                    "tdqt.omega_es",
                )?,
                eta: keyed(parse_angle(&need(&raw.eta, "tdqt.eta")?), "tdqt.eta")?,
                omega_opt: match &raw.omega_opt {
                    Some(s) => keyed(parse_angular_frequency(s), "tdqt.omega_opt")?,
                    None => 0.0,
                },
            };
            keyed(e.validate(), "tdqt")?;
            vec![TdqtBackend::Effective(e)]
        }
        "lower-branch" => {
            for (opt, key) in [
                (&raw.omega_gs, "tdqt.omega_gs"),
                (&raw.omega_es, "tdqt.omega_es"),
                (&raw.eta, "tdqt.eta"),
                (&raw.omega_opt, "tdqt.omega_opt"),
            ] {
                if opt.is_some() {
                    return Err(RunError::Config(format!(
                        "key `{key}` only applies to the \"effective\" backend"
                    )));
                }
            }
            match &raw.bz_points {
                None => vec![TdqtBackend::LowerBranch {
                    params: params.clone(),
                    field: field.clone(),
                }],
                Some(points) => {
                    if points.is_empty() {
                        return Err(RunError::Config(
                            "key `tdqt.bz_points`: list must not be empty".into(),
                        ));
                    }
                    points
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let bz = keyed(
                                parse_field_gauss(s),
                                &format!("tdqt.bz_points[{i}]"),
                            )?;
                            let mut f = field.clone();
                            f.b_field[2] = bz;
                            Ok(TdqtBackend::LowerBranch {
                                params: params.clone(),
                                field: f,
                            })
                        })
                        .collect::<RunResult<Vec<_>>>()?
                }
            }
        }
        other => {
            return Err(RunError::Config(format!(
                "key `tdqt.backend`: unknown backend {other:?} (expected \"effective\" or \"lower-branch\")"
            )))
        }
    };

    let multi = backends.len() > 1 || raw.bz_points.is_some();
    let mut files = Vec::with_capacity(2 * backends.len());
    for (i, backend) in backends.iter().enumerate() {
        let traj = tdqt_scan(backend, (&pulse1, &pulse2), &times, &rho0, gamma_rad)
            .map_err(RunError::Model)?;
        let rows = traj
            .iter()
            .map(|p| {
                vec![
                    Cell::Num(p.t),
                    Cell::Num(p.bloch.bx),
                    Cell::Num(p.bloch.by),
                    Cell::Num(p.bloch.bz),
                ]
            })
            .collect();
        let table = Table {
            columns: vec!["t_s", "bx", "by", "bz"],
            rows,
        };
        let fit = extract_precession(&traj).map_err(RunError::Model)?;
        let fit_doc = serde_json::json!({
            "omega_es_hz": angular_to_hz(fit.omega_es),
            "eta_rad": fit.eta,
            "residual": fit.residual,
        });
        let (data_path, fit_file_path) = if multi {
            (numbered_path(out_path, i + 1), numbered_path(&fit_path, i + 1))
        } else {
            (out_path.to_path_buf(), fit_path.clone())
        };
        files.push(render(&table, format, &data_path));
        files.push(OutputFile {
            path: fit_file_path,
            contents: serde_json::to_string_pretty(&fit_doc)
                .expect("JSON fit serialization cannot fail"),
        });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn levels_config(out: &Path) -> String {
        format!(
            r#"
scenario = "levels"

[output]
path = {out:?}

[field]
strain_delta = "6.7 GHz"
strain_angle = "-0.08 rad"

[levels]
axis = "bz"
min = "0 G"
max = "200 G"
points = 5
"#
        )
    }

    #[test]
    fn levels_scenario_writes_expected_csv() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("levels.csv");
        let cfg = write_config(dir.path(), "levels.toml", &levels_config(&out));
        let manifest = run(&cfg).unwrap();
        assert_eq!(manifest.scenario, "levels");
        assert_eq!(manifest.constants_version, CONSTANTS_VERSION);
        assert_eq!(manifest.outputs, vec![out.display().to_string()]);
        assert_eq!(manifest.config_sha256.len(), 64);

        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "scan_value,e1,e2,e3,e4,e5,e6");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 5);
        let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        // Eigenvalues come out in Hz: the strain splitting dominates, so the
        // extreme levels sit several GHz apart.
        assert!(first[6] - first[1] > 10e9);
    }

    #[test]
    fn rerunning_a_config_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("levels.csv");
        let cfg = write_config(dir.path(), "levels.toml", &levels_config(&out));
        run(&cfg).unwrap();
        let first = std::fs::read(&out).unwrap();
        run(&cfg).unwrap();
        let second = std::fs::read(&out).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "bad.toml",
            r#"
scenario = "levels"
surprise = 1

[output]
path = "x.csv"

[levels]
axis = "bz"
min = "0 G"
max = "1 G"
points = 2
"#,
        );
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("surprise"), "{err}");
    }

    #[test]
    fn malformed_unit_names_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "bad.toml",
            r#"
scenario = "levels"

[output]
path = "x.csv"

[field]
strain_delta = "6.7"

[levels]
axis = "bz"
min = "0 G"
max = "1 G"
points = 2
"#,
        );
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("field.strain_delta"), "{msg}");
    }

    #[test]
    fn mismatched_scenario_block_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "bad.toml",
            r#"
scenario = "cpt"

[output]
path = "x.csv"

[levels]
axis = "bz"
min = "0 G"
max = "1 G"
points = 2
"#,
        );
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("[levels]"), "{err}");
    }

    #[test]
    fn model_errors_exit_three() {
        // Strain too weak for the branch reduction: a physics-domain error.
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "weak.toml",
            r#"
scenario = "sw-compare"

[output]
path = "x.csv"

[sw_compare]
delta_min = "1 GHz"
delta_max = "2 GHz"
points = 2
"#,
        );
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn sw_compare_closed_and_numeric_match_exact_at_large_strain() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sw.csv");
        let cfg = write_config(
            dir.path(),
            "sw.toml",
            &format!(
                r#"
scenario = "sw-compare"

[output]
path = {out:?}

[params]
delta2 = "5.33 MHz"

[sw_compare]
delta_min = "100 GHz"
delta_max = "200 GHz"
points = 2
"#
            ),
        );
        run(&cfg).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "delta_hz,branch,level,e_closed_hz,e_numeric_hz,e_exact_hz"
        );
        let mut n_rows = 0;
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let closed: f64 = fields[3].parse().unwrap();
            let numeric: f64 = fields[4].parse().unwrap();
            let exact: f64 = fields[5].parse().unwrap();
            // Deep in the perturbative regime all three agree to well under
            // a part in 1e4 of the branch splitting scale.
            assert!((closed - exact).abs() < 20e6, "{line}");
            assert!((numeric - exact).abs() < 20e6, "{line}");
            n_rows += 1;
        }
        assert_eq!(n_rows, 2 * 6);
    }

    #[test]
    fn stark_faraday_peak_matches_odd_lorentzian() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sf.csv");
        let cfg = write_config(
            dir.path(),
            "sf.toml",
            &format!(
                r#"
scenario = "stark-faraday"

[output]
path = {out:?}

[stark_faraday]
omega_s = "2.88 GHz"
power = "1 uW"
detuning_min = "140 MHz"
detuning_max = "140 MHz"
points = 1
"#
            ),
        );
        run(&cfg).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let row = text.lines().nth(1).unwrap();
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields[0], 140e6);
        // At Δ = Γ₀ the reference line sits at its peak 𝓕₀/(2Γ₀) = 24.64 µrad
        // and the other spin line, 2.74 GHz away and entering with opposite
        // sign, adds its dispersive tail 𝓕₋₁|Δ−ω_s|/(Γ₋₁² + (Δ−ω_s)²).
        let expected = 6.9e3 / (2.0 * 1.4e8)
            + 7.6e3 * 2.74e9 / ((3.0e8f64).powi(2) + (2.74e9f64).powi(2));
        assert!((fields[2] - expected).abs() < 1.0e-9 * expected.abs(), "{row}");
        assert!(fields[1].is_finite());
    }

    #[test]
    fn cpt_scenario_pumps_toward_the_dark_state() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("cpt.csv");
        let cfg = write_config(
            dir.path(),
            "cpt.toml",
            &format!(
                r#"
scenario = "cpt"

[output]
path = {out:?}

[cpt]
selection = "single-lambda-r"
delta_l = "0 MHz"
delta_e = "180 MHz"
omega = "10 MHz"
theta = "90 deg"
phi = "0 rad"
t_max = "2 us"
points = 21
initial = "0g"
"#
            ),
        );
        run(&cfg).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t_s,bx,by,bz,fidelity,p_excited,p_singlet"
        );
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 21);
        // Ideal single-Λ pumping: fidelity with the dark state approaches 1.
        assert!(rows.last().unwrap()[4] > 0.999, "{:?}", rows.last());
        // No singlet in a single-Λ model.
        assert!(rows.iter().all(|r| r[6] == 0.0));
    }

    #[test]
    fn tdqt_scenario_round_trips_the_generator() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("tdqt.csv");
        let fit_out = dir.path().join("tdqt_fit.json");
        let cfg = write_config(
            dir.path(),
            "tdqt.toml",
            &format!(
                r#"
scenario = "tdqt"

[output]
path = {out:?}

[tdqt]
backend = "effective"
omega_gs = "1.4 GHz"
omega_es = "260 MHz"
eta = "90 deg"
t_max = "4.81 ns"
points = 41
fit_path = {fit_out:?}
"#
            ),
        );
        let manifest = run(&cfg).unwrap();
        assert_eq!(manifest.outputs.len(), 2);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t_s,bx,by,bz");
        assert_eq!(text.lines().count(), 42);

        let fit: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&fit_out).unwrap()).unwrap();
        let omega_hz = fit["omega_es_hz"].as_f64().unwrap();
        let eta = fit["eta_rad"].as_f64().unwrap();
        assert!((omega_hz - 260e6).abs() < 0.005 * 260e6, "{fit}");
        assert!((eta - std::f64::consts::FRAC_PI_2).abs() < 0.01, "{fit}");
    }

    #[test]
    fn json_format_emits_columns_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("levels.json");
        let cfg_text = levels_config(&out).replace(
            "path = ",
            "format = \"json\"\npath = ",
        );
        let cfg = write_config(dir.path(), "levels.toml", &cfg_text);
        run(&cfg).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(doc["columns"][0], "scan_value");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn list_and_constants_texts_are_complete() {
        let listing = list_text();
        for name in ["levels", "sw-compare", "stark-faraday", "cpt", "srt", "tdqt"] {
            assert!(listing.contains(name), "missing {name}");
        }
        let consts = constants_text();
        assert!(consts.contains("hbar"));
        assert!(consts.contains("mu_B"));
        assert!(consts.contains(CONSTANTS_VERSION));
    }
}
