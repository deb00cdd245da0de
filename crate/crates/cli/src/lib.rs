//! Scenario runner: ties the workspace's physics crates to named, reproducible
//! experiments with machine-readable JSON/CSV outputs.
//!
//! Every scenario is registered with a typed parameter schema (defaults plus
//! descriptions); unknown keys are rejected, results carry their resolved
//! parameters and tolerance/truncation metadata, and a fixed seed makes each
//! run deterministic.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use qcore::DensityMatrix;

pub type C64 = Complex<f64>;

/// Name of the environment variable controlling sweep parallelism.
pub const WORKERS_ENV: &str = "CTC_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("no consistent solution: {0}")]
    NoSolution(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit code: convergence/solution failures are distinguished
    /// from usage errors so callers can script against them.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotConverged(_) | CliError::NoSolution(_) => 3,
            _ => 2,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

// ---------------------------------------------------------------------------
// Parameter values
// ---------------------------------------------------------------------------

/// A typed scenario parameter: real, integer, or text.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Int(i64),
    Text(String),
}

impl ParamValue {
    /// Parses `--set` values: integer first, then real, else text.
    pub fn parse(raw: &str) -> ParamValue {
        if let Ok(i) = raw.parse::<i64>() {
            ParamValue::Int(i)
        } else if let Ok(f) = raw.parse::<f64>() {
            ParamValue::Real(f)
        } else {
            ParamValue::Text(raw.to_string())
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            ParamValue::Real(_) => "real",
            ParamValue::Int(_) => "integer",
            ParamValue::Text(_) => "text",
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            ParamValue::Real(f) => serde_json::json!(f),
            ParamValue::Int(i) => serde_json::json!(i),
            ParamValue::Text(s) => serde_json::json!(s),
        }
    }

    /// Coerces an override onto the schema type of `template`.
    fn coerce_like(&self, template: &ParamValue, key: &str) -> Result<ParamValue> {
        let fail = || {
            Err(CliError::InvalidConfig(format!(
                "parameter '{key}' expects a {} value, got {} ({:?})",
                template.type_name(),
                self.type_name(),
                self
            )))
        };
        match (template, self) {
            (ParamValue::Real(_), ParamValue::Real(f)) => {
                if f.is_finite() {
                    Ok(ParamValue::Real(*f))
                } else {
                    Err(CliError::InvalidConfig(format!(
                        "parameter '{key}' must be finite, got {f}"
                    )))
                }
            }
            (ParamValue::Real(_), ParamValue::Int(i)) => Ok(ParamValue::Real(*i as f64)),
            (ParamValue::Int(_), ParamValue::Int(i)) => Ok(ParamValue::Int(*i)),
            (ParamValue::Int(_), ParamValue::Real(f)) => {
                if f.fract() == 0.0 && f.is_finite() {
                    Ok(ParamValue::Int(*f as i64))
                } else {
                    fail()
                }
            }
            (ParamValue::Text(_), ParamValue::Text(s)) => Ok(ParamValue::Text(s.clone())),
            (ParamValue::Text(_), other) => Ok(ParamValue::Text(match other {
                ParamValue::Real(f) => f.to_string(),
                ParamValue::Int(i) => i.to_string(),
                ParamValue::Text(s) => s.clone(),
            })),
            _ => fail(),
        }
    }
}

/// Resolved parameters handed to a scenario implementation. All keys are
/// schema-validated before construction, so the typed getters cannot fail.
#[derive(Debug, Clone)]
pub struct Params(BTreeMap<String, ParamValue>);

impl Params {
    pub fn real(&self, key: &str) -> f64 {
        match &self.0[key] {
            ParamValue::Real(f) => *f,
            ParamValue::Int(i) => *i as f64,
            ParamValue::Text(_) => unreachable!("schema guarantees '{key}' is numeric"),
        }
    }

    pub fn int(&self, key: &str) -> i64 {
        match &self.0[key] {
            ParamValue::Int(i) => *i,
            _ => unreachable!("schema guarantees '{key}' is an integer"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match &self.0[key] {
            ParamValue::Text(s) => s,
            _ => unreachable!("schema guarantees '{key}' is text"),
        }
    }

    pub fn map(&self) -> &BTreeMap<String, ParamValue> {
        &self.0
    }
}

// ---------------------------------------------------------------------------
// Configuration & results
// ---------------------------------------------------------------------------

/// A scenario invocation: name, parameter overrides, seed, output directory.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub overrides: BTreeMap<String, ParamValue>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            overrides: BTreeMap::new(),
            seed: 0,
            out_dir: None,
        }
    }

    pub fn set(mut self, key: &str, value: ParamValue) -> Self {
        self.overrides.insert(key.to_string(), value);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A named table of float rows with mandatory column headers.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Output of one scenario run: resolved parameters, named scalars, optional
/// verdict-style strings, tables, and audit metadata.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: String,
    pub params: BTreeMap<String, ParamValue>,
    pub scalars: BTreeMap<String, f64>,
    pub strings: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub metadata: BTreeMap<String, String>,
}

impl ScenarioResult {
    fn new(scenario: &str, params: &Params) -> Self {
        Self {
            scenario: scenario.to_string(),
            params: params.0.clone(),
            scalars: BTreeMap::new(),
            strings: BTreeMap::new(),
            tables: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    fn scalar(&mut self, key: &str, value: f64) -> &mut Self {
        self.scalars.insert(key.to_string(), value);
        self
    }

    fn string(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.strings.insert(key.to_string(), value.into());
        self
    }

    fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Serializes to JSON with stable (sorted) key order.
    pub fn to_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        let tables: serde_json::Map<String, serde_json::Value> = self
            .tables
            .iter()
            .map(|t| {
                (
                    t.name.clone(),
                    serde_json::json!({
                        "columns": t.columns,
                        "rows": t.rows,
                    }),
                )
            })
            .collect();
        serde_json::json!({
            "metadata": self.metadata,
            "params": params,
            "scalars": self.scalars,
            "scenario": self.scenario,
            "strings": self.strings,
            "tables": tables,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("result serializes")
    }
}

/// Formats a float with 17 significant digits (lossless round-trip).
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders one table as CSV: comma separators, '.' decimals, mandatory header.
pub fn table_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

pub struct ParamSpec {
    pub key: &'static str,
    pub default: ParamValue,
    pub help: &'static str,
}

pub struct ScenarioSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
    run: fn(&Params, u64) -> Result<ScenarioResult>,
}

fn real(key: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default: ParamValue::Real(default),
        help,
    }
}

fn int(key: &'static str, default: i64, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default: ParamValue::Int(default),
        help,
    }
}

fn text(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default: ParamValue::Text(default.to_string()),
        help,
    }
}

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// The scenario registry, in presentation order.
pub fn registry() -> Vec<ScenarioSpec> {
    vec![
        ScenarioSpec {
            name: "grandfather",
            summary: "fixed point of the bit-flip loop circuit (unique maximally mixed solution)",
            params: vec![
                real("tol", 1e-10, "fixed-point residual tolerance"),
                int("max_iter", 100_000, "iteration cap"),
            ],
            run: scenario_grandfather,
        },
        ScenarioSpec {
            name: "info-paradox",
            summary: "underdetermined loop circuit: residuals of candidate solutions and the maximum-entropy pick",
            params: vec![real("tol", 1e-10, "fixed-point residual tolerance")],
            run: scenario_info_paradox,
        },
        ScenarioSpec {
            name: "otc-bell",
            summary: "correlation breaking on one half of a Bell pair, in density-matrix and Gaussian-covariance form",
            params: vec![real("r", 1.0, "two-mode squeezing of the Gaussian analogue")],
            run: scenario_otc_bell,
        },
        ScenarioSpec {
            name: "brun-audit",
            summary: "signalling audit of a nonlinear box against a remote-preparation ontology",
            params: vec![
                text("box", "Brun", "builtin box name (Brun, AxisSwap)"),
                text(
                    "ontology",
                    "O_s",
                    "builtin ontology name (O_s, O_ns, AxisAppendix, HeisenbergCutPair)",
                ),
            ],
            run: scenario_brun_audit,
        },
        ScenarioSpec {
            name: "gisin",
            summary: "Monte-Carlo signalling protocol: Helstrom guessing of the sender's setting",
            params: vec![
                text("box", "Brun", "builtin box name"),
                text("ontology", "O_s", "builtin two-setting ontology"),
                int("trials", 20_000, "Monte-Carlo trials"),
            ],
            run: scenario_gisin,
        },
        ScenarioSpec {
            name: "ctc-bs-gaussian",
            summary: "Gaussian loop beamsplitter: output moments and the squeezed-input covariance",
            params: vec![
                real("eta", 2.0 / 3.0, "beamsplitter reflectivity"),
                real("phi", FRAC_PI_2, "loop phase"),
                real("r", 1.0, "squeezing magnitude"),
                real("theta_r", 0.0, "rotation angle"),
                real("theta_s", 0.0, "squeezing axis angle"),
                real("alpha_re", 0.0, "coherent displacement, real part"),
                real("alpha_im", 0.0, "coherent displacement, imaginary part"),
            ],
            run: scenario_ctc_bs_gaussian,
        },
        ScenarioSpec {
            name: "ctc-bs-photon",
            summary: "single photon on the loop beamsplitter: closed-form and finite-cascade statistics",
            params: vec![
                real("eta", 0.5, "beamsplitter reflectivity"),
                real("phi", FRAC_PI_2, "loop phase"),
                int("n_rails", 40, "rails in the finite-cascade oracle"),
                int("cutoff", 5, "Fock cutoff of the oracle"),
            ],
            run: scenario_ctc_bs_photon,
        },
        ScenarioSpec {
            name: "otc-hup",
            summary: "repeated weak measurements through an open loop: variances below the uncertainty bound",
            params: vec![
                int("m", 1, "number of measurement stages"),
                real("r", 5.0, "ancilla squeezing per stage"),
                real("alpha_re", 1.0, "probe displacement, real part"),
                real("alpha_im", 0.0, "probe displacement, imaginary part"),
            ],
            run: scenario_otc_hup,
        },
        ScenarioSpec {
            name: "spod",
            summary: "switched array of heralded downconverters: closed-form and Monte-Carlo statistics",
            params: vec![
                real("chi", 0.01, "squeezing parameter per source"),
                int("n", 50_000, "number of sources"),
                int("trials", 20_000, "Monte-Carlo trials"),
            ],
            run: scenario_spod,
        },
        ScenarioSpec {
            name: "eventop-g2",
            summary: "second-order coherence of the loop output under a finite-width interaction kernel",
            params: vec![
                real("kappa", 10.0, "kernel width ratio"),
                real("eta", 0.5, "beamsplitter reflectivity"),
                text("method", "truncated", "evaluator: 'truncated' or 'direct'"),
                int("x", 30, "kernel band half-width (truncated method)"),
                int("direct_n", 60, "rail count (direct method)"),
            ],
            run: scenario_eventop_g2,
        },
        ScenarioSpec {
            name: "eventop-wigner",
            summary: "Wigner function of the Gaussian loop output under a finite-width kernel",
            params: vec![
                real("kappa", 1.0, "kernel width ratio"),
                real("eta", 2.0 / 3.0, "beamsplitter reflectivity"),
                real("phi", FRAC_PI_2, "loop phase"),
                real("r", 1.0, "input squeezing magnitude"),
                real("theta_r", 0.0, "input rotation angle"),
                real("theta_s", 0.0, "input squeezing axis angle"),
                real("alpha_re", 0.5, "input displacement, real part"),
                real("alpha_im", 0.0, "input displacement, imaginary part"),
                real("half_range", 4.0, "grid half-width around the mean"),
                int("resolution", 41, "grid points per axis"),
                int("x", 30, "kernel band half-width"),
                int("direct_n", 60, "rail count bound"),
            ],
            run: scenario_eventop_wigner,
        },
        ScenarioSpec {
            name: "gravity",
            summary: "gravitational time offset between two heights and the induced kernel decorrelation",
            params: vec![
                real("h", 1e5, "height separation in metres"),
                real("sigma_t", 2e-13, "wavepacket temporal width in seconds"),
            ],
            run: scenario_gravity,
        },
        ScenarioSpec {
            name: "rel-cnot",
            summary: "two-qubit parity expectation with one wavepacket boosted and displaced",
            params: vec![
                real("alpha", 0.45, "control-rotation amplitude"),
                real("v", 0.0, "source velocity (units of c)"),
                real("dx", 0.0, "wavepacket displacement"),
                real("sigma", 1.0, "wavepacket momentum width"),
                real("k0", 5.0, "carrier momentum"),
            ],
            run: scenario_rel_cnot,
        },
    ]
}

/// Registry lookup.
pub fn find_scenario(name: &str) -> Result<ScenarioSpec> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| CliError::UnknownScenario(name.to_string()))
}

/// Resolves defaults + overrides against the schema, rejecting unknown keys.
pub fn resolve_params(
    spec: &ScenarioSpec,
    overrides: &BTreeMap<String, ParamValue>,
) -> Result<Params> {
    let mut map = BTreeMap::new();
    for p in &spec.params {
        map.insert(p.key.to_string(), p.default.clone());
    }
    for (key, value) in overrides {
        let template = map
            .get(key)
            .ok_or_else(|| {
                CliError::InvalidConfig(format!(
                    "unknown parameter '{key}' for scenario '{}' (valid: {})",
                    spec.name,
                    spec.params
                        .iter()
                        .map(|p| p.key)
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?
            .clone();
        map.insert(key.clone(), value.coerce_like(&template, key)?);
    }
    Ok(Params(map))
}

/// Number of sweep workers, taken from the environment (default 1).
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Runs one scenario and, if an output directory is configured, writes its
/// JSON result and per-table CSV artifacts there.
pub fn run(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let spec = find_scenario(&config.scenario)?;
    let params = resolve_params(&spec, &config.overrides)?;
    let mut result = (spec.run)(&params, config.seed)?;
    result.meta("version", env!("CARGO_PKG_VERSION"));
    result.meta("seed", config.seed.to_string());
    result.meta("workers", worker_count().to_string());
    if let Some(dir) = &config.out_dir {
        write_artifacts(dir, &result)?;
    }
    Ok(result)
}

fn write_artifacts(dir: &Path, result: &ScenarioResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json_path = dir.join(format!("{}.json", result.scenario));
    std::fs::write(json_path, result.to_json_string())?;
    for table in &result.tables {
        let csv_path = dir.join(format!("{}_{}.csv", result.scenario, table.name));
        std::fs::write(csv_path, table_csv(table))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One numeric axis: `key = lo, lo+step, …, ≤ hi`.
#[derive(Debug, Clone)]
pub struct AxisSpec {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl AxisSpec {
    /// Parses the `k=lo:hi:step` command-line form.
    pub fn parse(raw: &str) -> Result<AxisSpec> {
        let bad = || CliError::InvalidConfig(format!("axis must be 'key=lo:hi:step', got '{raw}'"));
        let (key, range) = raw.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Ok(AxisSpec {
            key: key.to_string(),
            lo: nums[0],
            hi: nums[1],
            step: nums[2],
        })
    }

    /// The grid points, validated to be finite and non-empty.
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(CliError::InvalidConfig("axis bounds must be finite".into()));
        }
        if self.step <= 0.0 {
            return Err(CliError::InvalidConfig(format!(
                "axis step must be positive, got {}",
                self.step
            )));
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as i64;
        if count < 0 {
            return Err(CliError::InvalidConfig(format!(
                "axis upper bound {} is below lower bound {}",
                self.hi, self.lo
            )));
        }
        if count > 1_000_000 {
            return Err(CliError::InvalidConfig(format!(
                "axis would generate {count} points; refusing"
            )));
        }
        Ok((0..=count).map(|i| self.lo + i as f64 * self.step).collect())
    }
}

/// Output of a sweep: per-point results (in axis order) plus a merged CSV.
pub struct SweepOutput {
    pub results: Vec<ScenarioResult>,
    pub csv: String,
}

/// Runs a scenario once per axis point. Points fan out across the worker
/// pool but the output order always follows the axis order. With no axis the
/// sweep degenerates to a single run.
pub fn sweep(config: &ScenarioConfig, axis: Option<&AxisSpec>) -> Result<SweepOutput> {
    let spec = find_scenario(&config.scenario)?;
    let axis = match axis {
        None => {
            let result = run(config)?;
            let csv = merged_csv(None, &[result.clone()]);
            return Ok(SweepOutput {
                results: vec![result],
                csv,
            });
        }
        Some(a) => a,
    };
    if !spec
        .params
        .iter()
        .any(|p| p.key == axis.key && !matches!(p.default, ParamValue::Text(_)))
    {
        return Err(CliError::InvalidConfig(format!(
            "axis key '{}' is not a numeric parameter of scenario '{}'",
            axis.key, spec.name
        )));
    }
    let points = axis.points()?;
    let configs: Vec<ScenarioConfig> = points
        .iter()
        .map(|&x| {
            let mut c = config.clone();
            c.out_dir = None;
            c.overrides.insert(axis.key.clone(), ParamValue::Real(x));
            c
        })
        .collect();

    let workers = worker_count();
    let results: Vec<Result<ScenarioResult>> = if workers <= 1 {
        configs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(compute)?;
        pool.install(|| {
            use rayon::prelude::*;
            configs.par_iter().map(run).collect()
        })
    };
    let results: Vec<ScenarioResult> = results.into_iter().collect::<Result<_>>()?;
    let csv = merged_csv(Some(&axis.key), &results);

    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}_sweep.csv", config.scenario)), &csv)?;
        let array: Vec<serde_json::Value> = results.iter().map(|r| r.to_json()).collect();
        std::fs::write(
            dir.join(format!("{}_sweep.json", config.scenario)),
            serde_json::to_string_pretty(&serde_json::Value::Array(array)).expect("serializes"),
        )?;
    }
    Ok(SweepOutput { results, csv })
}

/// Row-per-point CSV: the axis column (if any) followed by every scalar, in
/// stable sorted order.
pub fn merged_csv(axis_key: Option<&str>, results: &[ScenarioResult]) -> String {
    let mut columns: Vec<String> = Vec::new();
    if let Some(k) = axis_key {
        columns.push(k.to_string());
    }
    if let Some(first) = results.first() {
        columns.extend(first.scalars.keys().cloned());
    }
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in results {
        let mut cells: Vec<String> = Vec::new();
        if let Some(k) = axis_key {
            let v = match r.params.get(k) {
                Some(ParamValue::Real(f)) => *f,
                Some(ParamValue::Int(i)) => *i as f64,
                _ => f64::NAN,
            };
            cells.push(fmt_float(v));
        }
        for key in columns.iter().skip(if axis_key.is_some() { 1 } else { 0 }) {
            cells.push(fmt_float(*r.scalars.get(key).unwrap_or(&f64::NAN)));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a flat `key = value` config file (optional `[section]` headers are
/// accepted and ignored; `#` starts a comment).
pub fn parse_config_file(contents: &str) -> Result<BTreeMap<String, ParamValue>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in contents.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::InvalidConfig(format!("config line {}: expected 'key = value'", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), ParamValue::parse(value.trim()));
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// Scenario implementations
// ---------------------------------------------------------------------------

fn fixed_point_config(tol: f64, max_iter: usize) -> deutsch::FixedPointConfig {
    deutsch::FixedPointConfig {
        tol,
        max_iter,
        ..deutsch::FixedPointConfig::default()
    }
}

fn scenario_grandfather(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let tol = p.real("tol");
    let circuit = deutsch::grandfather_circuit();
    let rho1 = DensityMatrix::basis_state(vec![2], 1).map_err(compute)?;
    let fp = deutsch::solve_fixed_point(
        &circuit,
        &rho1,
        &fixed_point_config(tol, p.int("max_iter").max(1) as usize),
    )
    .map_err(compute)?;
    if !fp.converged {
        return Err(CliError::NotConverged(format!(
            "fixed-point residual {} after {} iterations",
            fp.residual, fp.iterations
        )));
    }
    let mixed = DensityMatrix::maximally_mixed(vec![2]);
    let dist = fp.rho_ctc.trace_distance(&mixed).map_err(compute)?;
    let output = circuit.output_given(&rho1, &fp.rho_ctc).map_err(compute)?;
    let out_dist = output.trace_distance(&mixed).map_err(compute)?;
    let mut r = ScenarioResult::new("grandfather", p);
    r.scalar("residual", fp.residual)
        .scalar("iterations", fp.iterations as f64)
        .scalar("dist_loop_state_to_mixed", dist)
        .scalar("dist_output_to_mixed", out_dist)
        .meta("tolerance", fmt_float(tol));
    Ok(r)
}

fn scenario_info_paradox(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let tol = p.real("tol");
    let circuit = deutsch::info_paradox_circuit();
    let plus = DensityMatrix::from_pure(vec![2], &qcore::kets::ket_plus()).map_err(compute)?;
    let minus = DensityMatrix::from_pure(vec![2], &qcore::kets::ket_minus()).map_err(compute)?;
    let residual = |candidate: &DensityMatrix| -> Result<f64> {
        let mapped = circuit.apply_loop_map(&plus, candidate).map_err(compute)?;
        mapped.trace_distance(candidate).map_err(compute)
    };
    let fp = deutsch::solve_fixed_point(&circuit, &plus, &fixed_point_config(tol, 100_000))
        .map_err(compute)?;
    if !fp.converged {
        return Err(CliError::NotConverged(format!(
            "fixed-point residual {}",
            fp.residual
        )));
    }
    let mixed = DensityMatrix::maximally_mixed(vec![2]);
    let mut r = ScenarioResult::new("info-paradox", p);
    r.scalar("residual_plus", residual(&plus)?)
        .scalar("residual_minus", residual(&minus)?)
        .scalar(
            "dist_seeded_solution_to_mixed",
            fp.rho_ctc.trace_distance(&mixed).map_err(compute)?,
        )
        .meta("tolerance", fmt_float(tol))
        .meta("seed_state", "maximally mixed");
    Ok(r)
}

fn scenario_otc_bell(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    // density-matrix form: sending one half through the open loop replaces
    // the pair by the product of its marginals
    let bell = deutsch::bell_pair();
    let broken = deutsch::otc_break(&bell, &[0]).map_err(compute)?;
    let product = DensityMatrix::maximally_mixed(vec![2, 2]);
    let dist = broken.trace_distance(&product).map_err(compute)?;

    // Gaussian-covariance form: the two-mode squeezed analogue loses its
    // cross-mode covariance block while each marginal stays thermal
    let r_sq = p.real("r");
    let (c2, s2) = ((2.0 * r_sq).cosh(), (2.0 * r_sq).sinh());
    let mut cov = nalgebra::DMatrix::<f64>::identity(4, 4) * c2;
    cov[(0, 2)] = s2;
    cov[(2, 0)] = s2;
    cov[(1, 3)] = -s2;
    cov[(3, 1)] = -s2;
    let state =
        gaussianctc::GaussianState::new(2, nalgebra::DVector::zeros(4), cov).map_err(compute)?;
    let broken_g = gaussian_break(&state);
    let mut cross_after: f64 = 0.0;
    for i in 0..2 {
        for j in 2..4 {
            cross_after = cross_after.max(broken_g.cov[(i, j)].abs());
        }
    }
    let mut marginal_dev: f64 = 0.0;
    for m in 0..2 {
        let marg = broken_g.mode(m);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { c2 } else { 0.0 };
                marginal_dev = marginal_dev.max((marg.cov[(i, j)] - want).abs());
            }
        }
    }

    let mut r = ScenarioResult::new("otc-bell", p);
    r.scalar("density_dist_to_product", dist)
        .scalar("gaussian_cross_cov_before", s2)
        .scalar("gaussian_cross_cov_after", cross_after)
        .scalar("gaussian_marginal_thermal_dev", marginal_dev);
    Ok(r)
}

/// Gaussian analogue of correlation breaking: keep every marginal, zero the
/// covariance between distinct modes (the product of the marginals).
pub fn gaussian_break(state: &gaussianctc::GaussianState) -> gaussianctc::GaussianState {
    let n = state.n_modes;
    let mut cov = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    for m in 0..n {
        for i in 0..2 {
            for j in 0..2 {
                cov[(2 * m + i, 2 * m + j)] = state.cov[(2 * m + i, 2 * m + j)];
            }
        }
    }
    gaussianctc::GaussianState::new(n, state.mean.clone(), cov)
        .expect("marginal covariance stays valid")
}

fn scenario_brun_audit(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let bx = nlbox::builtin_box(p.text("box")).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let prep = nlbox::builtin_ontology(p.text("ontology"))
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let report = nlbox::signalling_audit(&bx, &[prep]).map_err(compute)?;
    let gap = report
        .witnesses
        .iter()
        .map(|w| w.witness.distance)
        .fold(0.0f64, f64::max);
    let mut r = ScenarioResult::new("brun-audit", p);
    r.scalar("helstrom_gap", gap)
        .scalar("witness_count", report.witnesses.len() as f64)
        .string(
            "verdict",
            match report.verdict {
                nlbox::Verdict::SignallingPossible => "SignallingPossible",
                nlbox::Verdict::NoSignalling => "NoSignalling",
            },
        );
    Ok(r)
}

fn scenario_gisin(p: &Params, seed: u64) -> Result<ScenarioResult> {
    let bx = nlbox::builtin_box(p.text("box")).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let prep = nlbox::builtin_ontology(p.text("ontology"))
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let trials = p.int("trials");
    if trials < 1 {
        return Err(CliError::InvalidConfig("trials must be positive".into()));
    }
    let est = nlbox::gisin_experiment(&bx, &prep, trials as usize, seed).map_err(compute)?;
    let mut r = ScenarioResult::new("gisin", p);
    r.scalar("success", est.success)
        .scalar("analytic", est.analytic)
        .scalar("std_err", est.std_err)
        .scalar("trials", est.trials as f64);
    Ok(r)
}

fn bs_params(p: &Params) -> Result<gaussianctc::BsParams> {
    let eta = p.real("eta");
    if !(0.0..=1.0).contains(&eta) {
        return Err(CliError::InvalidConfig(format!(
            "eta must lie in [0,1], got {eta}"
        )));
    }
    Ok(gaussianctc::BsParams {
        eta,
        phi: p.real("phi"),
    })
}

fn gaussian_prep(p: &Params) -> gaussianctc::GaussianPrep {
    gaussianctc::GaussianPrep {
        alpha: Complex::new(p.real("alpha_re"), p.real("alpha_im")),
        r: p.real("r"),
        theta_r: p.real("theta_r"),
        theta_s: p.real("theta_s"),
    }
}

fn push_state_scalars(r: &mut ScenarioResult, prefix: &str, state: &gaussianctc::GaussianState) {
    r.scalar(&format!("{prefix}mean_q"), state.mean[0]);
    r.scalar(&format!("{prefix}mean_p"), state.mean[1]);
    r.scalar(&format!("{prefix}var_q"), state.cov[(0, 0)]);
    r.scalar(&format!("{prefix}var_p"), state.cov[(1, 1)]);
    r.scalar(&format!("{prefix}cov_qp"), state.cov[(0, 1)]);
}

fn scenario_ctc_bs_gaussian(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let bs = bs_params(p)?;
    let prep = gaussian_prep(p);
    let moments = gaussianctc::ctc_beamsplitter_moments(bs, &prep);
    let fp_cov = gaussianctc::ctc_squeezed_covariance(bs, p.real("r"));
    let mut r = ScenarioResult::new("ctc-bs-gaussian", p);
    push_state_scalars(&mut r, "", &moments.state);
    r.scalar("phase_re", moments.phase.re)
        .scalar("phase_im", moments.phase.im)
        .scalar("fp_var_q", fp_cov[(0, 0)])
        .scalar("fp_var_p", fp_cov[(1, 1)])
        .scalar("fp_cov_qp", fp_cov[(0, 1)]);
    Ok(r)
}

fn scenario_ctc_bs_photon(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let eta = p.real("eta");
    let phi = p.real("phi");
    let stats = fockctc::photon_ctc_stats(eta, phi).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let n_rails = p.int("n_rails").max(2) as usize;
    let cutoff = p.int("cutoff").max(2) as usize;
    let oracle = fockctc::fock_simulate(eta, phi, n_rails, cutoff).map_err(compute)?;
    let mut r = ScenarioResult::new("ctc-bs-photon", p);
    r.scalar("mean_n", stats.mean_n)
        .scalar("g2", stats.g2)
        .scalar("oracle_mean_n", oracle.mean_n)
        .scalar("oracle_g2", oracle.g2)
        .scalar("oracle_dev", (oracle.g2 - stats.g2).abs())
        .meta("oracle_rails", n_rails.to_string());
    Ok(r)
}

fn scenario_otc_hup(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let m = p.int("m");
    if !(1..=64).contains(&m) {
        return Err(CliError::InvalidConfig(format!(
            "m must lie in [1,64], got {m}"
        )));
    }
    let m = m as u32;
    let r_sq = p.real("r");
    let alpha = Complex::new(p.real("alpha_re"), p.real("alpha_im"));
    let (var_q, var_p) = gaussianctc::otc_variances(m, r_sq);
    let sim = gaussianctc::otc_circuit_simulate(m, r_sq, alpha);
    let hup = gaussianctc::hup_demo(m, r_sq, alpha);
    let mut r = ScenarioResult::new("otc-hup", p);
    push_state_scalars(&mut r, "sim_", &sim);
    r.scalar("var_q", var_q)
        .scalar("var_p", var_p)
        .scalar("sigma_product", hup.sigma_product)
        .scalar("mean_photons_per_arm", hup.mean_photons_per_arm);
    Ok(r)
}

fn scenario_spod(p: &Params, seed: u64) -> Result<ScenarioResult> {
    let chi = p.real("chi");
    let n = p.int("n");
    let trials = p.int("trials");
    if n < 0 || trials < 1 {
        return Err(CliError::InvalidConfig(
            "n must be nonnegative and trials positive".into(),
        ));
    }
    let params =
        fockctc::SpodParams::new(chi, n as u64).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let stats = fockctc::spod_stats(&params);
    let mc = fockctc::spod_montecarlo(&params, trials as u64, seed).map_err(compute)?;
    let mut r = ScenarioResult::new("spod", p);
    r.scalar("mean_n", stats.mean_n)
        .scalar("g2", stats.g2)
        .scalar("mc_mean_n", mc.mean_n_est)
        .scalar("mc_g2", mc.g2_est)
        .scalar("mc_stderr_mean_n", mc.stderr_mean_n)
        .scalar("mc_stderr_g2", mc.stderr_g2)
        .scalar("mc_trials", mc.trials as f64);
    if let Some(w) = params.warning() {
        r.string("warning", w);
    }
    Ok(r)
}

fn kernel_and_spec(p: &Params) -> Result<(eventop::CommutatorKernel, eventop::TruncationSpec)> {
    let kappa = p.real("kappa");
    let kernel =
        eventop::CommutatorKernel::gaussian(kappa).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let x = p.int("x");
    let direct_n = p.int("direct_n");
    if x < 1 || direct_n < 2 {
        return Err(CliError::InvalidConfig(
            "x must be >= 1 and direct_n >= 2".into(),
        ));
    }
    Ok((
        kernel,
        eventop::TruncationSpec {
            x: x as usize,
            direct_n: direct_n as usize,
        },
    ))
}

fn map_eventop_error(e: eventop::EventOpError) -> CliError {
    match e {
        eventop::EventOpError::TruncationTooSmall { .. } => CliError::NoSolution(e.to_string()),
        other => CliError::InvalidConfig(other.to_string()),
    }
}

fn scenario_eventop_g2(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let eta = p.real("eta");
    if !(0.0..=1.0).contains(&eta) {
        return Err(CliError::InvalidConfig(format!(
            "eta must lie in [0,1], got {eta}"
        )));
    }
    let (kernel, spec) = kernel_and_spec(p)?;
    let method = match p.text("method") {
        "truncated" => eventop::G2Method::Truncated(spec.x),
        "direct" => eventop::G2Method::Direct(spec.direct_n),
        other => {
            return Err(CliError::InvalidConfig(format!(
                "method must be 'truncated' or 'direct', got '{other}'"
            )))
        }
    };
    let g2 = eventop::eo_g2(eta, &kernel, method).map_err(map_eventop_error)?;
    let sharp_reference = 8.0 * eta * (1.0 - eta) / (2.0 - eta);
    let mut r = ScenarioResult::new("eventop-g2", p);
    r.scalar("g2", g2)
        .scalar("sharp_kernel_reference", sharp_reference)
        .meta("coefficient_tail_tolerance", "1e-12")
        .meta("kernel_tail_tolerance", "1e-12");
    Ok(r)
}

fn scenario_eventop_wigner(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let bs = bs_params(p)?;
    let prep = gaussian_prep(p);
    let (kernel, spec) = kernel_and_spec(p)?;
    let moments =
        eventop::eo_gaussian_moments(bs, &prep, &kernel, &spec).map_err(map_eventop_error)?;
    let resolution = p.int("resolution");
    if !(2..=2001).contains(&resolution) {
        return Err(CliError::InvalidConfig(format!(
            "resolution must lie in [2,2001], got {resolution}"
        )));
    }
    let half_range = p.real("half_range");
    if half_range <= 0.0 {
        return Err(CliError::InvalidConfig("half_range must be positive".into()));
    }
    let grid = gaussianctc::wigner_grid(&moments.state, half_range, resolution as usize)
        .map_err(compute)?;
    let mut rows = Vec::with_capacity(grid.qs.len() * grid.ps.len());
    for (i, &q) in grid.qs.iter().enumerate() {
        for (j, &pp) in grid.ps.iter().enumerate() {
            rows.push(vec![q, pp, grid.values[i][j]]);
        }
    }
    let mut r = ScenarioResult::new("eventop-wigner", p);
    push_state_scalars(&mut r, "", &moments.state);
    r.scalar("phase_re", moments.phase.re)
        .scalar("phase_im", moments.phase.im)
        .meta("coefficient_tail_tolerance", "1e-12")
        .meta("kernel_tail_tolerance", "1e-12");
    r.tables.push(Table {
        name: "wigner".to_string(),
        columns: vec!["q".to_string(), "p".to_string(), "w".to_string()],
        rows,
    });
    Ok(r)
}

fn scenario_gravity(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let g = eventop::gravity_scenario(p.real("h"), p.real("sigma_t"))
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let mut r = ScenarioResult::new("gravity", p);
    r.scalar("delta_t", g.delta_t)
        .scalar("kappa", g.kappa)
        .scalar("c01", g.c01);
    Ok(r)
}

fn scenario_rel_cnot(p: &Params, _seed: u64) -> Result<ScenarioResult> {
    let (alpha, v, dx) = (p.real("alpha"), p.real("v"), p.real("dx"));
    let (sigma, k0) = (p.real("sigma"), p.real("k0"));
    let expectation = relcirc::relativistic_cnot(alpha, v, dx, sigma, k0)
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let source = relcirc::GaussianEnvelope::new(sigma, k0, 0.0, v)
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let reference = relcirc::GaussianEnvelope::new(sigma, k0, 0.0, 0.0)
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let zeta = relcirc::lorentz_overlap(&source, &reference, dx);
    let mut r = ScenarioResult::new("rel-cnot", p);
    r.scalar("expectation", expectation)
        .scalar("ideal_expectation", 1.0 - 2.0 * alpha * alpha)
        .scalar("zeta_abs", zeta.norm())
        .scalar("zeta_re", zeta.re)
        .scalar("zeta_im", zeta.im);
    Ok(r)
}

// ---------------------------------------------------------------------------
