//! Batch experiment runner: configuration documents in, tables out.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! command = "simulate"          # simulate | restrict | algebra-info | breuer | interference | evolve
//! amplitudes = [[0.6, 0.0], [0.8, 0.0]]
//! n_events = 100000             # simulate only
//! seed = 7                      # simulate only
//! pointer_eigenvalues = [0, 1, 2]
//! s_eigenvalues = [1, -1]
//! t0 = 0.0
//! t1 = 1.0
//! times = [0.0, 0.5, 1.0]       # evolve only
//! output_path = "out"
//! ```
//!
//! Complex numbers are always `[re, im]` pairs. Every command writes
//! comma-separated tables with 12 significant digits into the output
//! directory; tables start with a `# generated_unix_seconds=` line unless
//! timestamps are disabled.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

use crate::algebra::{classical_state, is_extremal, minimal_projections, restrict_state, restriction_gap, OperatorAlgebra};
use crate::linalg::{ComplexMatrix, C64};
use crate::measurement::{
    final_mixed_state, final_pure_state, interference_expectation, observer_restricted_density, MeasurementModel,
};
use crate::stochastic::{distribution_test, eta_trajectory, run_ensemble, simulate_events, write_event_log, MIN_TEST_EVENTS};
use crate::table::{format_g12, Table as CsvTable};

/// Binomial acceptance bound for `simulate`, in standard deviations.
pub const SIGMA_BOUND: f64 = 4.0;
/// Tolerance for the restricted-state coincidence verdicts.
pub const COINCIDENCE_TOL: f64 = 1e-10;
/// Probability threshold for the extremality verdict.
pub const EXTREMAL_TOL: f64 = 1e-9;

/// Norm² deviations up to this are normalized silently.
const NORM_SILENT: f64 = 1e-6;
/// Norm² deviations up to this are normalized with a warning; beyond, rejected.
const NORM_REPAIRABLE: f64 = 1e-2;
/// Deviation treated as already normalized (left untouched).
const NORM_EXACT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Restrict,
    AlgebraInfo,
    Breuer,
    Interference,
    Evolve,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::Restrict,
        Command::AlgebraInfo,
        Command::Breuer,
        Command::Interference,
        Command::Evolve,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Restrict => "restrict",
            Command::AlgebraInfo => "algebra-info",
            Command::Breuer => "breuer",
            Command::Interference => "interference",
            Command::Evolve => "evolve",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub amplitudes: [C64; 2],
    pub pointer_eigenvalues: [f64; 3],
    pub s_eigenvalues: [f64; 2],
    pub n_events: Option<u64>,
    pub seed: Option<u64>,
    pub t0: f64,
    pub t1: f64,
    pub times: Option<Vec<f64>>,
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    pub fn model(&self) -> crate::Result<MeasurementModel> {
        MeasurementModel::new(self.amplitudes[0], self.amplitudes[1])?
            .with_s_eigenvalues(self.s_eigenvalues)?
            .with_pointer_eigenvalues(self.pointer_eigenvalues)?
            .with_times(self.t0, self.t1)
    }

    /// TOML document that parses back to this configuration.
    pub fn to_document(&self) -> String {
        let mut t = Table::new();
        t.insert("command".into(), Value::String(self.command.to_string()));
        t.insert(
            "amplitudes".into(),
            Value::Array(self.amplitudes.iter().map(|a| float_array(&[a.re, a.im])).collect()),
        );
        t.insert("pointer_eigenvalues".into(), float_array(&self.pointer_eigenvalues));
        t.insert("s_eigenvalues".into(), float_array(&self.s_eigenvalues));
        if let Some(n) = self.n_events {
            t.insert("n_events".into(), Value::Integer(n as i64));
        }
        if let Some(s) = self.seed {
            // TOML integers are signed; larger seeds are kept as their bit pattern
            t.insert("seed".into(), Value::Integer(s as i64));
        }
        t.insert("t0".into(), Value::Float(self.t0));
        t.insert("t1".into(), Value::Float(self.t1));
        if let Some(times) = &self.times {
            t.insert("times".into(), float_array(times));
        }
        if let Some(p) = &self.output_path {
            t.insert("output_path".into(), Value::String(p.clone()));
        }
        toml::to_string(&t).expect("config table serializes")
    }
}

fn float_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| Value::Float(*x)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed configuration document: {0}")]
    Syntax(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Fields(Vec<FieldError>),
}

/// A validated configuration plus any repairs applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

/// Values that take precedence over the document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_events: Option<u64>,
    pub output_path: Option<String>,
}

pub fn parse_config(document: &str) -> Result<ParsedConfig, ConfigError> {
    parse_config_with(document, &Overrides::default())
}

const KNOWN_FIELDS: [&str; 10] = [
    "command",
    "amplitudes",
    "pointer_eigenvalues",
    "s_eigenvalues",
    "n_events",
    "seed",
    "t0",
    "t1",
    "times",
    "output_path",
];

pub fn parse_config_with(document: &str, overrides: &Overrides) -> Result<ParsedConfig, ConfigError> {
    let table: Table = document.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut fields = Fields { table: &table, errors: Vec::new() };
    let mut warnings = Vec::new();

    for key in table.keys() {
        if !KNOWN_FIELDS.contains(&key.as_str()) {
            fields.error(key, "unknown field");
        }
    }

    let command = fields.required("command").and_then(|v| match v.as_str() {
        Some(s) => s.parse::<Command>().map_err(|m| fields.error("command", &m)).ok(),
        None => {
            fields.error("command", "expected a string");
            None
        }
    });

    let amplitudes = fields.required("amplitudes").and_then(|v| {
        let pairs = fields.numbers_nested("amplitudes", v, 2, 2)?;
        let raw = [C64::new(pairs[0][0], pairs[0][1]), C64::new(pairs[1][0], pairs[1][1])];
        let norm_sq = raw[0].norm_sqr() + raw[1].norm_sqr();
        let deviation = (norm_sq - 1.0).abs();
        if deviation <= NORM_EXACT {
            Some(raw)
        } else if deviation <= NORM_REPAIRABLE {
            if deviation > NORM_SILENT {
                warnings.push(format!("amplitudes renormalized (norm^2 was {norm_sq})"));
            }
            let norm = norm_sq.sqrt();
            Some([raw[0] / norm, raw[1] / norm])
        } else {
            fields.error("amplitudes", &format!("not normalizable: norm^2 = {norm_sq}"));
            None
        }
    });

    let pointer_eigenvalues = fields
        .optional("pointer_eigenvalues")
        .map(|v| fields.numbers("pointer_eigenvalues", v, Some(3)).map(|x| [x[0], x[1], x[2]]))
        .unwrap_or(Some(crate::measurement::DEFAULT_POINTER_EIGENVALUES));
    let s_eigenvalues = fields
        .optional("s_eigenvalues")
        .map(|v| fields.numbers("s_eigenvalues", v, Some(2)).map(|x| [x[0], x[1]]))
        .unwrap_or(Some(crate::measurement::DEFAULT_S_EIGENVALUES));

    let n_events = match overrides.n_events {
        Some(n) => Some(Some(n)),
        None => fields.optional("n_events").map(|v| fields.count("n_events", v)),
    };
    let seed = match overrides.seed {
        Some(s) => Some(Some(s)),
        None => fields.optional("seed").map(|v| fields.seed("seed", v)),
    };
    let t0 = fields.optional("t0").map(|v| fields.number("t0", v)).unwrap_or(Some(0.0));
    let t1 = fields.optional("t1").map(|v| fields.number("t1", v)).unwrap_or(Some(1.0));
    let times = fields.optional("times").map(|v| fields.numbers("times", v, None));
    let output_path = match &overrides.output_path {
        Some(p) => Some(Some(p.clone())),
        None => fields.optional("output_path").map(|v| match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                fields.error("output_path", "expected a string");
                None
            }
        }),
    };

    if command == Some(Command::Simulate) {
        if n_events.is_none() {
            fields.error("n_events", "required for simulate");
        }
        if seed.is_none() {
            fields.error("seed", "required for simulate");
        }
    }
    if command == Some(Command::Evolve) {
        match &times {
            None => fields.error("times", "required for evolve"),
            Some(Some(t)) if t.is_empty() => fields.error("times", "must not be empty"),
            _ => {}
        }
    }

    let mut errors = fields.errors;
    let (Some(command), Some(amplitudes), Some(pointer_eigenvalues), Some(s_eigenvalues), Some(t0), Some(t1)) =
        (command, amplitudes, pointer_eigenvalues, s_eigenvalues, t0, t1)
    else {
        return Err(ConfigError::Fields(errors));
    };
    let flatten = |x: Option<Option<u64>>, ok: &mut bool| match x {
        Some(None) => {
            *ok = false;
            None
        }
        Some(v) => v,
        None => None,
    };
    let mut ok = errors.is_empty();
    let n_events = flatten(n_events, &mut ok);
    let seed = flatten(seed, &mut ok);
    let times = match times {
        Some(None) => {
            ok = false;
            None
        }
        Some(t) => t,
        None => None,
    };
    let output_path = match output_path {
        Some(None) => {
            ok = false;
            None
        }
        Some(p) => p,
        None => None,
    };
    if !ok {
        return Err(ConfigError::Fields(errors));
    }

    let config = ExperimentConfig {
        command,
        amplitudes,
        pointer_eigenvalues,
        s_eigenvalues,
        n_events,
        seed,
        t0,
        t1,
        times,
        output_path,
    };
    if let Err(e) = config.model() {
        errors.push(FieldError { field: "model".into(), message: e.to_string() });
        return Err(ConfigError::Fields(errors));
    }
    Ok(ParsedConfig { config, warnings })
}

/// Field extraction that accumulates errors instead of stopping at the first.
struct Fields<'a> {
    table: &'a Table,
    errors: Vec<FieldError>,
}

impl<'a> Fields<'a> {
    fn error(&mut self, field: &str, message: &str) {
        self.errors.push(FieldError { field: field.into(), message: message.into() });
    }

    fn required(&mut self, key: &str) -> Option<&'a Value> {
        let v = self.table.get(key);
        if v.is_none() {
            self.error(key, "missing required field");
        }
        v
    }

    fn optional(&self, key: &str) -> Option<&'a Value> {
        self.table.get(key)
    }

    fn number(&mut self, key: &str, v: &Value) -> Option<f64> {
        let x = match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        match x {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.error(key, "expected a finite number");
                None
            }
        }
    }

    fn numbers(&mut self, key: &str, v: &Value, len: Option<usize>) -> Option<Vec<f64>> {
        let Some(items) = v.as_array() else {
            self.error(key, "expected a list of numbers");
            return None;
        };
        if let Some(n) = len {
            if items.len() != n {
                self.error(key, &format!("expected {n} numbers, found {}", items.len()));
                return None;
            }
        }
        items.iter().map(|x| self.number(key, x)).collect()
    }

    fn numbers_nested(&mut self, key: &str, v: &Value, outer: usize, inner: usize) -> Option<Vec<Vec<f64>>> {
        let Some(items) = v.as_array() else {
            self.error(key, "expected a list of [re, im] pairs");
            return None;
        };
        if items.len() != outer {
            self.error(key, &format!("expected {outer} entries, found {}", items.len()));
            return None;
        }
        items.iter().map(|x| self.numbers(key, x, Some(inner))).collect()
    }

    fn count(&mut self, key: &str, v: &Value) -> Option<u64> {
        match v.as_integer() {
            Some(n) if n > 0 => Some(n as u64),
            _ => {
                self.error(key, "expected a positive integer");
                None
            }
        }
    }

    fn seed(&mut self, key: &str, v: &Value) -> Option<u64> {
        match v.as_integer() {
            Some(n) => Some(n as u64),
            None => {
                self.error(key, "expected an integer");
                None
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
    #[error("cannot write output under {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("acceptance check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Check(_) => 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    pub timestamp: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Human-readable summary, one `key = value` per line.
    pub summary: String,
}

struct Output<'a> {
    options: &'a RunOptions,
    files: Vec<PathBuf>,
    summary: Vec<String>,
}

impl<'a> Output<'a> {
    fn write(&mut self, name: &str, contents: &str, table: bool) -> Result<(), CliError> {
        let path = self.options.output_dir.join(name);
        let mut text = String::new();
        if table && self.options.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            text.push_str(&format!("# generated_unix_seconds={secs}\n"));
        }
        text.push_str(contents);
        fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }

    fn table(&mut self, name: &str, t: &CsvTable) -> Result<(), CliError> {
        self.write(name, &t.render(), true)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(name, &text, false)
    }

    fn line(&mut self, key: &str, value: impl fmt::Display) {
        self.summary.push(format!("{key} = {value}"));
    }
}

/// Magnitudes below this in computed quantities are round-off and printed as 0.
const PRINT_FLOOR: f64 = 1e-14;

/// Formats a computed quantity. Configured inputs go through `format_g12`.
fn g(x: f64) -> String {
    format_g12(if x.abs() < PRINT_FLOOR { 0.0 } else { x })
}

fn matrix_table(m: &ComplexMatrix) -> CsvTable {
    let mut t = CsvTable::new(&["row", "col", "re", "im"]);
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let z = m.get(i, j);
            t.push(vec![i.to_string(), j.to_string(), g(z.re), g(z.im)]);
        }
    }
    t
}

pub fn run_command(config: &ExperimentConfig, options: &RunOptions) -> Result<RunReport, CliError> {
    fs::create_dir_all(&options.output_dir)
        .map_err(|source| CliError::Io { path: options.output_dir.clone(), source })?;
    let model = config.model()?;
    let mut out = Output { options, files: Vec::new(), summary: Vec::new() };
    out.line("command", config.command);

    let outcome = match config.command {
        Command::Simulate => simulate(config, &model, &mut out),
        Command::Restrict => restrict(&model, &mut out),
        Command::AlgebraInfo => algebra_info(&model, &mut out),
        Command::Breuer => breuer(&model, &mut out),
        Command::Interference => interference(&model, &mut out),
        Command::Evolve => evolve(config, &model, &mut out),
    };
    outcome?;
    Ok(RunReport { files: out.files, summary: out.summary.join("\n") })
}

fn simulate(config: &ExperimentConfig, model: &MeasurementModel, out: &mut Output) -> Result<(), CliError> {
    let n = config.n_events.expect("validated for simulate");
    let seed = config.seed.expect("validated for simulate");

    let events = simulate_events(model, n, seed);
    let mut log = Vec::new();
    write_event_log(&mut log, &events).map_err(|source| CliError::Io { path: out.options.output_dir.join("events.csv"), source })?;
    out.write("events.csv", &String::from_utf8(log).expect("ascii log"), true)?;

    let stats = run_ensemble(model, n, seed);
    let mut t = CsvTable::new(&["branch", "pointer_value", "count", "frequency", "expected_probability"]);
    for k in 0..2 {
        t.push(vec![
            (k + 1).to_string(),
            format_g12(stats.pointer_values[k]),
            stats.counts[k].to_string(),
            g(stats.empirical_frequencies[k]),
            g(stats.expected_probabilities[k]),
        ]);
    }
    out.table("statistics.csv", &t)?;

    let test = if n >= MIN_TEST_EVENTS { Some(distribution_test(&stats, SIGMA_BOUND)?) } else { None };

    #[derive(Serialize)]
    struct Report<'a> {
        statistics: &'a crate::stochastic::RunStatistics,
        mean_pointer_value: f64,
        distribution_test: Option<crate::stochastic::DistributionTest>,
    }
    out.json("statistics.json", &Report { statistics: &stats, mean_pointer_value: stats.mean_pointer_value(), distribution_test: test })?;

    out.line("n_events", n);
    out.line("seed", seed);
    out.line("frequencies", format!("{}, {}", g(stats.empirical_frequencies[0]), g(stats.empirical_frequencies[1])));
    out.line("expected", format!("{}, {}", g(stats.expected_probabilities[0]), g(stats.expected_probabilities[1])));
    out.line("max_abs_deviation", g(stats.max_abs_deviation));
    out.line("mean_pointer_value", g(stats.mean_pointer_value()));
    match test {
        Some(t) => {
            out.line("z_score", g(t.z_score));
            out.line("within_bound", t.passed);
            if !t.passed {
                return Err(CliError::Check(format!(
                    "branch frequencies outside the {SIGMA_BOUND} sigma binomial bound (z = {})",
                    g(t.z_score)
                )));
            }
        }
        None => out.line("within_bound", "untested (fewer than 100 events)"),
    }
    Ok(())
}

fn restrict(model: &MeasurementModel, out: &mut Output) -> Result<(), CliError> {
    let pure = final_pure_state(model);
    let r_o = observer_restricted_density(&pure)?;
    let alg = model.observer_algebra()?;
    let dist = classical_state(&restrict_state(&pure, &alg)?, &model.pointer_observable())?;
    let extremal = is_extremal(&dist, EXTREMAL_TOL);

    out.table("restricted_density.csv", &matrix_table(r_o.matrix()))?;
    let mut t = CsvTable::new(&["value", "probability"]);
    for o in dist.outcomes() {
        t.push(vec![format_g12(o.value), g(o.probability)]);
    }
    out.table("distribution.csv", &t)?;

    #[derive(Serialize)]
    struct Report<'a> {
        restricted_density: &'a ComplexMatrix,
        outcomes: Vec<(f64, f64)>,
        mean: f64,
        extremal: bool,
    }
    out.json(
        "restrict.json",
        &Report {
            restricted_density: r_o.matrix(),
            outcomes: dist.outcomes().iter().map(|o| (o.value, o.probability)).collect(),
            mean: dist.mean(),
            extremal,
        },
    )?;

    let diag: Vec<String> = (0..r_o.dim()).map(|i| g(r_o.matrix().get(i, i).re)).collect();
    out.line("restricted_density_diagonal", diag.join(", "));
    let probs: Vec<String> = dist.outcomes().iter().map(|o| format!("{}:{}", format_g12(o.value), g(o.probability))).collect();
    out.line("distribution", probs.join(", "));
    out.line("extremal", extremal);
    Ok(())
}

fn algebra_info(model: &MeasurementModel, out: &mut Output) -> Result<(), CliError> {
    let alg = model.observer_algebra()?;
    let projections = minimal_projections(&alg)?;
    let q = model.pointer_observable();

    let mut t = CsvTable::new(&["index", "rank", "pointer_value"]);
    for (k, p) in projections.iter().enumerate() {
        let rank = p.trace().re;
        let value = ((&q * p).trace().re) / rank;
        t.push(vec![k.to_string(), g(rank.round()), g(value)]);
    }
    out.table("projections.csv", &t)?;

    #[derive(Serialize)]
    struct Report<'a> {
        algebra: &'a OperatorAlgebra,
        dimension: usize,
        minimal_projections: &'a [ComplexMatrix],
    }
    out.json("algebra.json", &Report { algebra: &alg, dimension: alg.dim(), minimal_projections: &projections })?;

    out.line("dimension", alg.dim());
    out.line("commutative", alg.is_commutative());
    out.line("unital", alg.is_unital());
    out.line("minimal_projections", projections.len());
    Ok(())
}

fn breuer(model: &MeasurementModel, out: &mut Output) -> Result<(), CliError> {
    let pure = final_pure_state(model);
    let mixed = final_mixed_state(model);
    let observer = model.observer_algebra()?;
    let full = OperatorAlgebra::full(model.spec().total_dim());

    let mut t = CsvTable::new(&["algebra", "dimension", "max_gap", "coincide"]);
    for (name, alg) in [("observer", observer.as_ref()), ("full", &full)] {
        let gap = restriction_gap(&pure, &mixed, alg)?;
        let coincide = gap < COINCIDENCE_TOL;
        t.push(vec![name.into(), alg.dim().to_string(), g(gap), coincide.to_string()]);
        out.line(&format!("{name}_coincide"), coincide);
        out.line(&format!("{name}_max_gap"), g(gap));
    }
    out.table("breuer.csv", &t)?;
    Ok(())
}

fn interference(model: &MeasurementModel, out: &mut Output) -> Result<(), CliError> {
    let pure = interference_expectation(&final_pure_state(model))?;
    let mixed = interference_expectation(&final_mixed_state(model))?;
    let mut t = CsvTable::new(&["state", "interference_expectation"]);
    t.push(vec!["pure".into(), g(pure)]);
    t.push(vec!["mixed".into(), g(mixed)]);
    out.table("interference.csv", &t)?;
    out.line("pure", g(pure));
    out.line("mixed", g(mixed));
    out.line("d12", g(model.interference_coefficient()));
    Ok(())
}

fn evolve(config: &ExperimentConfig, model: &MeasurementModel, out: &mut Output) -> Result<(), CliError> {
    let times = config.times.as_deref().expect("validated for evolve");
    let trajectory = eta_trajectory(model, times)?;
    let mut t = CsvTable::new(&["t", "eta_0", "eta_1", "eta_2"]);
    for (time, sd) in times.iter().zip(&trajectory) {
        let eta = sd.eta_i();
        t.push(vec![format_g12(*time), g(eta[0]), g(eta[1]), g(eta[2])]);
    }
    out.table("eta.csv", &t)?;
    out.line("samples", times.len());
    if let Some(last) = trajectory.last() {
        let eta: Vec<String> = last.eta_i().iter().map(|x| g(*x)).collect();
        out.line("final_eta", eta.join(", "));
    }
    Ok(())
}

/// Reads, validates and runs one configuration file.
pub fn run_file(path: &Path, overrides: &Overrides, timestamp: bool) -> Result<(ParsedConfig, RunReport), CliError> {
    let document = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let parsed = parse_config_with(&document, overrides)?;
    let output_dir = PathBuf::from(parsed.config.output_path.clone().unwrap_or_else(|| ".".into()));
    let report = run_command(&parsed.config, &RunOptions { output_dir, timestamp })?;
    Ok((parsed, report))
}
