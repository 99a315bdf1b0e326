//! Command-line front end.
//!
//! Every command produces a [`Table`]: a metadata map, named columns and rows.
//! CSV output puts the metadata on one `#`-prefixed JSON line above the
//! header; JSON output nests it under `meta`. Reals are written with 17
//! significant digits so identical configs give byte-identical files.

use crate::error::Error;
use crate::operators::{energy, g_value, variance_pair, PotentialParams, StateVector};
use crate::position::{wavefunction, PositionGrid};
use crate::report::VerifyReport;
use crate::states::{construct, gk_mean_g, CsLabel, GkLabel, IsLabel, KpLabel};
use crate::verify::{run_check, SuiteConfig, CHECK_NAMES};
use clap::{Parser, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const OUT_DIR_ENV: &str = "PT_CS_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    State,
    Wavefunction,
    Verify,
    Uncertainty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

/// Raw command line. [`RunConfig::from_args`] validates it.
#[derive(Debug, Parser)]
#[command(name = "pt-cs", version, about = "Coherent states of the trigonometric Pöschl-Teller well", allow_negative_numbers = true)]
pub struct Args {
    /// What to compute.
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub kappap: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Number of retained Fock levels.
    #[arg(long, default_value_t = 120)]
    pub dim: usize,
    /// Displacement-state label (`|zeta| < 1`).
    #[arg(long)]
    pub zeta_re: Option<f64>,
    #[arg(long)]
    pub zeta_im: Option<f64>,
    /// Annihilation-eigenstate label; with `--lambda-*` an intelligent state.
    #[arg(long)]
    pub z_re: Option<f64>,
    #[arg(long)]
    pub z_im: Option<f64>,
    #[arg(long)]
    pub lambda_re: Option<f64>,
    #[arg(long)]
    pub lambda_im: Option<f64>,
    /// Evolution time for `wavefunction`.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Position-grid nodes (Gauss-Legendre).
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    /// Radial quadrature nodes for identity checks.
    #[arg(long, default_value_t = 200)]
    pub radial: usize,
    /// Angular quadrature nodes for identity checks.
    #[arg(long, default_value_t = 64)]
    pub angular: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<String>,
    /// Comma-separated check names, or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Add the autocorrelation column to `wavefunction`.
    #[arg(long)]
    pub autocorr: bool,
    /// For `uncertainty`: rows on an N-point grid of label moduli from 0.
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Tolerance override for a check, `NAME=VALUE`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

/// A validated run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: PotentialParams,
    pub label: Option<CsLabel>,
    pub dim: usize,
    pub t: f64,
    pub grid_nodes: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub format: OutputFormat,
    pub output_path: Option<String>,
    pub suite: Vec<String>,
    pub autocorr: bool,
    pub sweep: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments; exit code 2.
    Usage(String),
    /// A computation failed; exit code 1.
    Numeric(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl RunConfig {
    pub fn from_args<I, T>(args: I) -> Result<RunConfig, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let args = Args::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
        RunConfig::try_from(args)
    }

    /// Command-line arguments (program name first) that parse back to `self`.
    pub fn to_args(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:?}");
        let mut v = vec!["pt-cs".to_string(), self.command.to_possible_value().unwrap().get_name().to_string()];
        let mut push = |k: &str, val: String| {
            v.push(format!("--{k}"));
            v.push(val);
        };
        push("kappa", f(self.params.kappa));
        push("kappap", f(self.params.kappap));
        push("a", f(self.params.a));
        push("alpha", f(self.params.alpha));
        push("dim", self.dim.to_string());
        match self.label {
            Some(CsLabel::Kp(l)) => {
                push("zeta-re", f(l.zeta.re));
                push("zeta-im", f(l.zeta.im));
            }
            Some(CsLabel::Gk(l)) => {
                push("z-re", f(l.z.re));
                push("z-im", f(l.z.im));
            }
            Some(CsLabel::Is(l)) => {
                push("z-re", f(l.z.re));
                push("z-im", f(l.z.im));
                push("lambda-re", f(l.lambda.re));
                push("lambda-im", f(l.lambda.im));
            }
            None => {}
        }
        push("t", f(self.t));
        push("grid", self.grid_nodes.to_string());
        push("radial", self.radial_nodes.to_string());
        push("angular", self.angular_nodes.to_string());
        push("format", self.format.extension().to_string());
        if let Some(out) = &self.output_path {
            push("out", out.clone());
        }
        push("suite", self.suite.join(","));
        if let Some(n) = self.sweep {
            push("sweep", n.to_string());
        }
        for (k, val) in &self.tolerances {
            push("tol", format!("{k}={}", f(*val)));
        }
        if self.autocorr {
            v.push("--autocorr".into());
        }
        v
    }

    fn suite_config(&self) -> SuiteConfig {
        SuiteConfig { dim: self.dim, radial_nodes: self.radial_nodes, angular_nodes: self.angular_nodes, grid_nodes: self.grid_nodes }
    }

    fn require_label(&self) -> Result<CsLabel, CliError> {
        self.label.ok_or_else(|| CliError::Usage(format!("{:?} needs a label: --zeta-re/--zeta-im, or --z-re/--z-im [--lambda-re/--lambda-im]", self.command).to_lowercase()))
    }
}

impl TryFrom<Args> for RunConfig {
    type Error = CliError;

    fn try_from(a: Args) -> Result<Self, CliError> {
        let params = PotentialParams::new(a.kappa, a.kappap, a.a, a.alpha)?;
        let pair = |re: Option<f64>, im: Option<f64>| (re.is_some() || im.is_some()).then(|| C64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)));
        let zeta = pair(a.zeta_re, a.zeta_im);
        let z = pair(a.z_re, a.z_im);
        let lambda = pair(a.lambda_re, a.lambda_im);
        let label = match (zeta, z, lambda) {
            (Some(_), Some(_), _) => return Err(CliError::Usage("give either --zeta-* or --z-*, not both".into())),
            (Some(_), None, Some(_)) => return Err(CliError::Usage("--lambda-* needs --z-re/--z-im".into())),
            (None, None, Some(_)) => return Err(CliError::Usage("--lambda-* needs --z-re/--z-im".into())),
            (Some(zeta), None, None) => Some(CsLabel::Kp(KpLabel::new(zeta, a.alpha)?)),
            (None, Some(z), None) => Some(CsLabel::Gk(GkLabel { z, alpha: a.alpha })),
            (None, Some(z), Some(lambda)) => Some(CsLabel::Is(IsLabel { z, lambda, alpha: a.alpha })),
            (None, None, None) => None,
        };
        if let Some(l) = &label {
            l.validate()?;
        }
        if a.dim < 2 {
            return Err(CliError::Usage(format!("dim must be >= 2 (got {})", a.dim)));
        }
        if !a.t.is_finite() {
            return Err(CliError::Usage("t must be finite".into()));
        }
        let suite: Vec<String> = a.suite.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        let suite = if suite.iter().any(|s| s == "all") { CHECK_NAMES.iter().map(|s| s.to_string()).collect() } else { suite };
        for name in &suite {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(CliError::Usage(format!("unknown check '{name}'; valid names: all, {}", CHECK_NAMES.join(", "))));
            }
        }
        let mut tolerances = BTreeMap::new();
        for t in &a.tol {
            let (k, v) = t.split_once('=').ok_or_else(|| CliError::Usage(format!("--tol expects NAME=VALUE, got '{t}'")))?;
            let v: f64 = v.parse().map_err(|_| CliError::Usage(format!("--tol value '{v}' is not a number")))?;
            if !CHECK_NAMES.contains(&k) {
                return Err(CliError::Usage(format!("--tol names an unknown check '{k}'")));
            }
            if !(v >= 0.0) {
                return Err(CliError::Usage(format!("--tol value must be >= 0, got {v}")));
            }
            tolerances.insert(k.to_string(), v);
        }
        if a.sweep == Some(0) || a.sweep == Some(1) {
            return Err(CliError::Usage("--sweep needs at least 2 points".into()));
        }
        Ok(RunConfig {
            command: a.command,
            params,
            label,
            dim: a.dim,
            t: a.t,
            grid_nodes: a.grid,
            radial_nodes: a.radial,
            angular_nodes: a.angular,
            format: a.format,
            output_path: a.out,
            suite,
            autocorr: a.autocorr,
            sweep: a.sweep,
            tolerances,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fmt_real(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => real_json(*x),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn real_json(x: f64) -> Value {
    match Number::from_str(&fmt_real(x)) {
        Ok(n) if x.is_finite() => Value::Number(n),
        _ => Value::String(fmt_real(x)),
    }
}

/// One command's output.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, Cell>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Full reports for `verify`, serialized alongside the table in JSON.
    pub reports: Vec<VerifyReport>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { meta: BTreeMap::new(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), reports: Vec::new() }
    }

    fn meta(&mut self, k: &str, v: Cell) {
        self.meta.insert(k.to_string(), v);
    }

    fn meta_json(&self) -> Value {
        Value::Object(self.meta.iter().map(|(k, v)| (k.clone(), v.json())).collect::<Map<_, _>>())
    }

    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Csv => {
                let mut out = format!("# {}\n", serde_json::to_string(&self.meta_json()).map_err(|e| CliError::Numeric(e.to_string()))?);
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CliError::Numeric(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text)).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))?;
                out.push_str(&String::from_utf8_lossy(&bytes));
                Ok(out)
            }
            OutputFormat::Json => {
                let mut obj = Map::new();
                obj.insert("meta".into(), self.meta_json());
                obj.insert("columns".into(), Value::from(self.columns.clone()));
                obj.insert("rows".into(), Value::Array(self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect()));
                if !self.reports.is_empty() {
                    let reports = self
                        .reports
                        .iter()
                        .map(|r| {
                            let mut o = Map::new();
                            o.insert("check_name".into(), Value::String(r.check_name.clone()));
                            o.insert("max_deviation".into(), real_json(r.max_deviation));
                            o.insert("tolerance".into(), real_json(r.tolerance));
                            o.insert("passed".into(), Value::Bool(r.passed));
                            o.insert("details".into(), Value::Object(r.details.iter().map(|(k, v)| (k.clone(), real_json(*v))).collect()));
                            Value::Object(o)
                        })
                        .collect();
                    obj.insert("reports".into(), Value::Array(reports));
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).map_err(|e| CliError::Numeric(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

/// Result of one run: the table and whether every check passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
    pub warnings: Vec<String>,
}

fn common_meta(t: &mut Table, cfg: &RunConfig) {
    t.meta("command", Cell::Text(format!("{:?}", cfg.command).to_lowercase()));
    t.meta("kappa", Cell::Real(cfg.params.kappa));
    t.meta("kappap", Cell::Real(cfg.params.kappap));
    t.meta("a", Cell::Real(cfg.params.a));
    t.meta("alpha", Cell::Real(cfg.params.alpha));
    t.meta("dim", Cell::Int(cfg.dim as i64));
}

fn label_meta(t: &mut Table, label: &CsLabel) {
    t.meta("family", Cell::Text(label.family().into()));
    match label {
        CsLabel::Kp(l) => {
            t.meta("zeta_re", Cell::Real(l.zeta.re));
            t.meta("zeta_im", Cell::Real(l.zeta.im));
        }
        CsLabel::Gk(l) => {
            t.meta("z_re", Cell::Real(l.z.re));
            t.meta("z_im", Cell::Real(l.z.im));
        }
        CsLabel::Is(l) => {
            t.meta("z_re", Cell::Real(l.z.re));
            t.meta("z_im", Cell::Real(l.z.im));
            t.meta("lambda_re", Cell::Real(l.lambda.re));
            t.meta("lambda_im", Cell::Real(l.lambda.im));
        }
    }
}

fn truncation_warning(state: &StateVector) -> Option<String> {
    state.under_truncated().then(|| format!("tail bound {} exceeds {}; raise --dim", fmt_real(state.tail_bound), fmt_real(crate::operators::TAIL_WARN)))
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut t = Table::new(&["n", "e_n", "g_n"]);
    common_meta(&mut t, cfg);
    for n in 0..cfg.dim {
        t.rows.push(vec![Cell::Int(n as i64), Cell::Real(energy(&cfg.params, n)), Cell::Real(g_value(&cfg.params, n))]);
    }
    Ok(Outcome { table: t, passed: true, warnings: Vec::new() })
}

/// Rows stop after the last nonzero coefficient.
pub fn cmd_state(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let label = cfg.require_label()?;
    let state = construct(&cfg.params, &label, cfg.dim)?;
    let mut t = Table::new(&["n", "re_c", "im_c", "abs2_c"]);
    common_meta(&mut t, cfg);
    label_meta(&mut t, &label);
    t.meta("tail_bound", Cell::Real(state.tail_bound));
    t.meta("normalization_deficit", Cell::Real(state.normalization_deficit()));
    let last = state.coeffs.iter().rposition(|c| c.norm_sqr() != 0.0).unwrap_or(0);
    for (n, c) in state.coeffs.iter().enumerate().take(last + 1) {
        t.rows.push(vec![Cell::Int(n as i64), Cell::Real(c.re), Cell::Real(c.im), Cell::Real(c.norm_sqr())]);
    }
    let warnings: Vec<String> = truncation_warning(&state).into_iter().collect();
    if let Some(w) = warnings.first() {
        t.meta("warning", Cell::Text(w.clone()));
    }
    Ok(Outcome { table: t, passed: true, warnings })
}

pub fn cmd_wavefunction(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let label = cfg.require_label()?;
    let initial = construct(&cfg.params, &label, cfg.dim)?;
    let state = initial.evolved(cfg.t);
    let grid = PositionGrid::gauss_legendre(&cfg.params, cfg.grid_nodes)?;
    let wf = wavefunction(&cfg.params, &state, &grid)?;
    let mut cols = vec!["x", "re_psi", "im_psi", "density"];
    if cfg.autocorr {
        cols.push("autocorr");
    }
    let mut t = Table::new(&cols);
    common_meta(&mut t, cfg);
    label_meta(&mut t, &label);
    t.meta("t", Cell::Real(cfg.t));
    t.meta("grid_nodes", Cell::Int(cfg.grid_nodes as i64));
    t.meta("tail_bound", Cell::Real(state.tail_bound));
    t.meta("norm", Cell::Real(wf.norm));
    let autocorr = initial.inner(&state)?.norm();
    if cfg.autocorr {
        t.meta("autocorr", Cell::Real(autocorr));
    }
    for (x, v) in grid.nodes.iter().zip(&wf.values) {
        let mut row = vec![Cell::Real(*x), Cell::Real(v.re), Cell::Real(v.im), Cell::Real(v.norm_sqr())];
        if cfg.autocorr {
            row.push(Cell::Real(autocorr));
        }
        t.rows.push(row);
    }
    let warnings: Vec<String> = wf.warning.into_iter().collect();
    if let Some(w) = warnings.first() {
        t.meta("warning", Cell::Text(w.clone()));
    }
    Ok(Outcome { table: t, passed: true, warnings })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let suite = cfg.suite_config();
    let mut t = Table::new(&["check_name", "passed", "max_deviation", "tolerance", "details"]);
    common_meta(&mut t, cfg);
    t.meta("radial_nodes", Cell::Int(cfg.radial_nodes as i64));
    t.meta("angular_nodes", Cell::Int(cfg.angular_nodes as i64));
    t.meta("grid_nodes", Cell::Int(cfg.grid_nodes as i64));
    let mut all = true;
    for name in &cfg.suite {
        let mut r = run_check(name, &cfg.params, &suite).map_err(|e| match e {
            Error::Domain(m) => CliError::Usage(m),
            other => CliError::Numeric(format!("{name}: {other}")),
        })?;
        if let Some(&tol) = cfg.tolerances.get(name) {
            r = VerifyReport { passed: r.max_deviation <= tol, tolerance: tol, ..r };
        }
        all &= r.passed;
        let details = r.details.iter().map(|(k, v)| format!("{k}={}", fmt_real(*v))).collect::<Vec<_>>().join(";");
        t.rows.push(vec![
            Cell::Text(r.check_name.clone()),
            Cell::Int(r.passed as i64),
            Cell::Real(r.max_deviation),
            Cell::Real(r.tolerance),
            Cell::Text(details),
        ]);
        t.reports.push(r);
    }
    t.meta("all_passed", Cell::Int(all as i64));
    Ok(Outcome { table: t, passed: all, warnings: Vec::new() })
}

fn scaled_label(label: &CsLabel, modulus: f64) -> CsLabel {
    let rescale = |v: C64| if v.norm() == 0.0 { C64::new(modulus, 0.0) } else { v * (modulus / v.norm()) };
    match *label {
        CsLabel::Kp(l) => CsLabel::Kp(KpLabel { zeta: rescale(l.zeta), ..l }),
        CsLabel::Gk(l) => CsLabel::Gk(GkLabel { z: rescale(l.z), ..l }),
        CsLabel::Is(l) => CsLabel::Is(IsLabel { z: rescale(l.z), ..l }),
    }
}

fn label_modulus(label: &CsLabel) -> f64 {
    match label {
        CsLabel::Kp(l) => l.zeta.norm(),
        CsLabel::Gk(l) => l.z.norm(),
        CsLabel::Is(l) => l.z.norm(),
    }
}

pub fn cmd_uncertainty(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let label = cfg.require_label()?;
    let gk = matches!(label, CsLabel::Gk(_));
    let mut cols = vec!["modulus", "dW2", "dP2", "mean_G", "mean_F", "rs_residual"];
    if gk {
        cols.push("mean_G_closed");
    }
    let mut t = Table::new(&cols);
    common_meta(&mut t, cfg);
    label_meta(&mut t, &label);
    let top = label_modulus(&label);
    let moduli: Vec<f64> = match cfg.sweep {
        Some(n) => (0..n).map(|k| top * k as f64 / (n - 1) as f64).collect(),
        None => vec![top],
    };
    let mut warnings = Vec::new();
    for m in moduli {
        let l = if cfg.sweep.is_some() { scaled_label(&label, m) } else { label };
        let state = construct(&cfg.params, &l, cfg.dim)?;
        let v = variance_pair(&state)?;
        if let Some(w) = v.warning {
            warnings.push(format!("modulus {}: {w}", fmt_real(m)));
        }
        let mut row = vec![Cell::Real(m), Cell::Real(v.dw2), Cell::Real(v.dp2), Cell::Real(v.mean_g), Cell::Real(v.mean_f), Cell::Real(v.dw2 * v.dp2 - 0.25 * (v.mean_g * v.mean_g + v.mean_f * v.mean_f))];
        if gk {
            row.push(Cell::Real(gk_mean_g(&cfg.params, m)?));
        }
        t.rows.push(row);
    }
    if let Some(w) = warnings.first() {
        t.meta("warning", Cell::Text(w.clone()));
    }
    Ok(Outcome { table: t, passed: true, warnings })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::State => cmd_state(cfg),
        Command::Wavefunction => cmd_wavefunction(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Uncertainty => cmd_uncertainty(cfg),
    }
}

/// Where output goes: `--out` (relative paths under `PT_CS_OUT_DIR` when it
/// is set), `PT_CS_OUT_DIR/<command>.<ext>` without `--out`, else stdout.
pub fn output_target(cfg: &RunConfig, out_dir: Option<&Path>) -> Option<PathBuf> {
    match (&cfg.output_path, out_dir) {
        (Some(p), Some(dir)) if Path::new(p).is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(PathBuf::from(p)),
        (None, Some(dir)) => Some(dir.join(format!("{}.{}", format!("{:?}", cfg.command).to_lowercase(), cfg.format.extension()))),
        (None, None) => None,
    }
}

/// Full program: parse, run, write. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::try_from(args).and_then(|cfg| {
        let outcome = run(&cfg)?;
        let text = outcome.table.render(cfg.format)?;
        let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
        match output_target(&cfg, out_dir.as_deref()) {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(CliError::Io)?;
                }
                std::fs::write(&path, text).map_err(CliError::Io)?;
            }
            None => std::io::stdout().write_all(text.as_bytes()).map_err(CliError::Io)?,
        }
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("pt-cs: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> RunConfig {
        RunConfig::from_args(std::iter::once("pt-cs").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn spectrum_rows() {
        let c = cfg(&["spectrum", "--kappa", "2", "--kappap", "2", "--dim", "4"]);
        let t = run(&c).unwrap().table;
        let got: Vec<(String, String, String)> = t.rows.iter().map(|r| (r[0].text(), r[1].text(), r[2].text())).collect();
        assert_eq!(got[3], ("3".into(), fmt_real(21.0), fmt_real(11.0)));
        assert_eq!(got[0].1, fmt_real(0.0));
    }

    #[test]
    fn bad_kappa_is_usage_error() {
        let e = RunConfig::from_args(["pt-cs", "spectrum", "--kappa", "1.0", "--kappap", "2"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("kappa"));
    }

    #[test]
    fn label_selection() {
        let c = cfg(&["state", "--kappa", "2", "--kappap", "2", "--zeta-re", "-0.3"]);
        assert!(matches!(c.label, Some(CsLabel::Kp(_))));
        let c = cfg(&["state", "--kappa", "2", "--kappap", "2", "--z-im", "1.5", "--lambda-re", "2"]);
        assert!(matches!(c.label, Some(CsLabel::Is(_))));
        assert!(RunConfig::from_args(["pt-cs", "state", "--kappa", "2", "--kappap", "2", "--zeta-re", "0.1", "--z-re", "1"]).is_err());
        assert!(RunConfig::from_args(["pt-cs", "state", "--kappa", "2", "--kappap", "2", "--zeta-re", "1.1"]).is_err());
        assert!(RunConfig::from_args(["pt-cs", "state", "--kappa", "2", "--kappap", "2", "--z-re", "1", "--lambda-re", "-1"]).is_err());
    }

    #[test]
    fn args_round_trip() {
        let c = cfg(&["verify", "--kappa", "2.5", "--kappap", "1.25", "--alpha", "0.1", "--suite", "kp-identity,mean-g", "--tol", "mean-g=1e-6", "--format", "json"]);
        assert_eq!(RunConfig::from_args(c.to_args()).unwrap(), c);
    }

    #[test]
    fn real_formatting() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(f64::NAN), "NaN");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(real_json(0.1).to_string(), "1.0000000000000001e-1");
    }

    #[test]
    fn out_dir_resolution() {
        let mut c = cfg(&["spectrum", "--kappa", "2", "--kappap", "2"]);
        assert_eq!(output_target(&c, None), None);
        assert_eq!(output_target(&c, Some(Path::new("/tmp/x"))), Some(PathBuf::from("/tmp/x/spectrum.csv")));
        c.output_path = Some("a/b.csv".into());
        assert_eq!(output_target(&c, Some(Path::new("/tmp/x"))), Some(PathBuf::from("/tmp/x/a/b.csv")));
        c.output_path = Some("/abs.csv".into());
        assert_eq!(output_target(&c, Some(Path::new("/tmp/x"))), Some(PathBuf::from("/abs.csv")));
    }
}
