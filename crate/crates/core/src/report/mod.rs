//! Run configuration, the diagnostic pipeline and the report it produces.

mod render;
mod suites;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{PbxError, Result};
use crate::exec::Exec;
use crate::models::{build, ModelKind, ModelParams};

pub use render::{content_hash, parse_json, render_csv, render_json, write_csv};

/// Tolerance handed to the matrix exponential when building intertwiners.
pub const EXPM_TOL: f64 = 1e-15;

pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-2;

/// Relative change tolerated between the `D` and `2D` runs.
pub const STABILITY_REL: f64 = 0.1;

/// Values below this fraction of their threshold count as stable regardless
/// of relative change.
pub const STABILITY_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Commutators,
    Basis,
    Gram,
    Riesz,
    Intertwining,
    Position,
    Identities,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Commutators,
        Suite::Basis,
        Suite::Gram,
        Suite::Riesz,
        Suite::Intertwining,
        Suite::Position,
        Suite::Identities,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Commutators => "commutators",
            Suite::Basis => "basis",
            Suite::Gram => "gram",
            Suite::Riesz => "riesz",
            Suite::Intertwining => "intertwining",
            Suite::Position => "position",
            Suite::Identities => "identities",
        }
    }

    /// `"all"` or a comma-separated list; result is deduplicated and in
    /// canonical order.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        let s = s.trim();
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            out.push(part.parse()?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Suite {
    type Err = PbxError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| PbxError::Config(format!("unknown suite '{s}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = PbxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(PbxError::Config(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub dim: usize,
    /// Trust window; `dim / 2` unless pinned (the stability rerun pins it).
    pub window: usize,
    pub n_max: usize,
    pub tol: f64,
    pub suites: Vec<Suite>,
    pub format: Format,
    pub output: Option<PathBuf>,
    /// Rerun at `2 dim` and compare every check.
    pub stability: bool,
}

impl RunConfig {
    pub fn new(
        params: ModelParams,
        dim: usize,
        n_max: usize,
        tol: f64,
        suites: Vec<Suite>,
    ) -> Result<Self> {
        let cfg = Self {
            params,
            dim,
            window: dim / 2,
            n_max,
            tol,
            suites,
            format: Format::Json,
            output: None,
            stability: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < crate::models::MIN_MODEL_DIM {
            return Err(PbxError::Config(format!(
                "dimension {} below {}",
                self.dim,
                crate::models::MIN_MODEL_DIM
            )));
        }
        if self.window == 0 || self.window > self.dim {
            return Err(PbxError::Config(format!(
                "window {} outside 1..={}",
                self.window, self.dim
            )));
        }
        if self.n_max >= self.dim / 2 || self.n_max >= self.window {
            return Err(PbxError::Config(format!(
                "n_max {} must be below dim/2 = {} and the window {}",
                self.n_max,
                self.dim / 2,
                self.window
            )));
        }
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(PbxError::Config(format!(
                "tolerance {} outside [{MIN_TOL:e}, {MAX_TOL:e}]",
                self.tol
            )));
        }
        let mut sorted = self.suites.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != self.suites {
            return Err(PbxError::Config(
                "suites must be unique and in canonical order".into(),
            ));
        }
        Ok(())
    }

    pub fn model(&self) -> ModelKind {
        self.params.kind()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Complex(Complex64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Complex64> for Cell {
    fn from(v: Complex64) -> Self {
        Cell::Complex(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// A measured value against its threshold. Boolean checks report 1 when
/// satisfied, with threshold 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub boolean: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value < threshold,
            boolean: false,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass: ok,
            boolean: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBlock {
    pub kind: String,
    pub message: String,
    pub numerical: bool,
}

impl From<&PbxError> for ErrorBlock {
    fn from(e: &PbxError) -> Self {
        let kind = format!("{e:?}");
        let kind = kind
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or("Error")
            .to_string();
        Self {
            kind,
            message: e.to_string(),
            numerical: e.is_numerical(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub labels: Vec<(String, Cell)>,
    pub table: Option<Table>,
    pub error: Option<ErrorBlock>,
}

impl SuiteResult {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            checks: Vec::new(),
            labels: Vec::new(),
            table: None,
            error: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn label(&self, name: &str) -> Option<&Cell> {
        self.labels.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub dim: usize,
    pub stable: bool,
    pub unstable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub timestamp: Option<String>,
    pub stability: Option<StabilityReport>,
    /// SHA-256 of the report rendered without this block.
    pub content_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub error: Option<ErrorBlock>,
    pub provenance: Provenance,
}

impl DiagnosticsReport {
    pub fn suite(&self, s: Suite) -> Option<&SuiteResult> {
        self.suites.iter().find(|r| r.suite == s)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.suites.iter().all(|s| s.passed())
            && self.provenance.stability.as_ref().is_none_or(|s| s.stable)
    }

    pub fn numerical_failure(&self) -> bool {
        self.error.as_ref().is_some_and(|e| e.numerical)
            || self
                .suites
                .iter()
                .any(|s| s.error.as_ref().is_some_and(|e| e.numerical))
    }

    /// `suite.check` names of every failing check.
    pub fn failed_checks(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.suites {
            if s.error.is_some() {
                out.push(format!("{}.error", s.suite));
            }
            for c in &s.checks {
                if !c.pass {
                    out.push(format!("{}.{}", s.suite, c.name));
                }
            }
        }
        out
    }

    /// 0 all passed, 1 some check failed, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        if self.numerical_failure() || self.error.is_some() {
            3
        } else if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Runs the configured suites, and the `2D` comparison when requested.
pub fn run(config: &RunConfig, timestamp: Option<String>) -> Result<DiagnosticsReport> {
    run_with(config, timestamp, Exec::default())
}

pub fn run_with(
    config: &RunConfig,
    timestamp: Option<String>,
    exec: Exec,
) -> Result<DiagnosticsReport> {
    config.validate()?;
    let (suites, error) = run_suites(config, exec);
    let stability = if config.stability && error.is_none() {
        let mut big = config.clone();
        big.dim = config.dim * 2;
        big.stability = false;
        let (big_suites, big_error) = run_suites(&big, exec);
        Some(compare_runs(
            &suites,
            &big_suites,
            big_error.as_ref(),
            big.dim,
        ))
    } else {
        None
    };
    let mut report = DiagnosticsReport {
        config: config.clone(),
        suites,
        error,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            stability,
            content_sha256: String::new(),
        },
    };
    report.provenance.content_sha256 = content_hash(&report);
    Ok(report)
}

fn run_suites(config: &RunConfig, exec: Exec) -> (Vec<SuiteResult>, Option<ErrorBlock>) {
    if config.suites.is_empty() {
        return (Vec::new(), None);
    }
    let bundle = match build(config.params, config.dim, EXPM_TOL) {
        Ok(b) => b,
        Err(e) => return (Vec::new(), Some(ErrorBlock::from(&e))),
    };
    let ctx = suites::Context::new(config, &bundle, exec);
    let results = exec.map(config.suites.len(), |i| ctx.run(config.suites[i]));
    (results, None)
}

fn stable_pair(a: &Check, b: &Check) -> bool {
    if a.boolean || b.boolean {
        return a.pass == b.pass;
    }
    let floor = STABILITY_FLOOR * a.threshold.abs();
    if a.value.abs() <= floor && b.value.abs() <= floor {
        return true;
    }
    let scale = a.value.abs().max(b.value.abs());
    scale == 0.0 || (a.value - b.value).abs() <= STABILITY_REL * scale
}

fn compare_runs(
    small: &[SuiteResult],
    large: &[SuiteResult],
    large_error: Option<&ErrorBlock>,
    dim: usize,
) -> StabilityReport {
    let mut unstable = Vec::new();
    if let Some(e) = large_error {
        unstable.push(format!("error.{}", e.kind));
    }
    for s in small {
        let Some(other) = large.iter().find(|o| o.suite == s.suite) else {
            continue;
        };
        if s.error.is_some() != other.error.is_some() {
            unstable.push(format!("{}.error", s.suite));
        }
        for c in &s.checks {
            match other.check(&c.name) {
                Some(d) if stable_pair(c, d) => {}
                _ => unstable.push(format!("{}.{}", s.suite, c.name)),
            }
        }
    }
    StabilityReport {
        dim,
        stable: unstable.is_empty(),
        unstable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{EqhoParams, SwansonParams};

    fn eqho_config(suites: &str) -> RunConfig {
        RunConfig::new(
            ModelParams::Eqho(EqhoParams::new(2.0).unwrap()),
            128,
            16,
            1e-8,
            Suite::parse_list(suites).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn suite_list_parsing() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 7);
        assert_eq!(
            Suite::parse_list("riesz,gram,gram").unwrap(),
            vec![Suite::Gram, Suite::Riesz]
        );
        assert!(Suite::parse_list("gram,bogus").is_err());
    }

    #[test]
    fn config_validation() {
        let p = ModelParams::Eqho(EqhoParams::new(2.0).unwrap());
        assert!(RunConfig::new(p, 128, 64, 1e-8, vec![]).is_err());
        assert!(RunConfig::new(p, 128, 16, 1e-1, vec![]).is_err());
        assert!(RunConfig::new(p, 128, 16, 1e-15, vec![]).is_err());
        assert!(RunConfig::new(p, 4, 1, 1e-8, vec![]).is_err());
        assert!(RunConfig::new(p, 128, 16, 1e-8, vec![Suite::Riesz, Suite::Gram]).is_err());
        assert!(RunConfig::new(p, 128, 16, 1e-8, vec![]).is_ok());
    }

    #[test]
    fn empty_suites_give_empty_report() {
        let r = run(&eqho_config(""), None).unwrap();
        assert!(r.suites.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn eqho_gram_and_riesz() {
        let r = run(&eqho_config("gram,riesz"), None).unwrap();
        let gram = r.suite(Suite::Gram).unwrap();
        assert!(gram.passed(), "{:?}", gram.checks);
        match gram.label("expected_diag") {
            Some(Cell::Complex(z)) => assert!((z.re - 0.6065307).abs() < 1e-7),
            other => panic!("{other:?}"),
        }
        let riesz = r.suite(Suite::Riesz).unwrap();
        assert_eq!(
            riesz.label("verdict"),
            Some(&Cell::Text("not_riesz".into()))
        );
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = eqho_config("commutators,gram");
        let a = run(&cfg, Some("t1".into())).unwrap();
        let b = run(&cfg, Some("t2".into())).unwrap();
        assert_eq!(a.provenance.content_sha256, b.provenance.content_sha256);
        assert_eq!(a.suites, b.suites);
    }

    #[test]
    fn sequential_and_parallel_reports_match() {
        let cfg = eqho_config("commutators,basis");
        let a = run_with(&cfg, None, Exec::Sequential).unwrap();
        let b = run_with(&cfg, None, Exec::Parallel).unwrap();
        assert_eq!(render_json(&a), render_json(&b));
    }

    #[test]
    fn swanson_commutators_pass() {
        let cfg = RunConfig::new(
            ModelParams::Swanson(SwansonParams::new(std::f64::consts::PI / 8.0).unwrap()),
            128,
            16,
            1e-8,
            vec![Suite::Commutators],
        )
        .unwrap();
        let r = run(&cfg, None).unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks());
    }

    #[test]
    fn stability_comparison_rules() {
        let a = Check::below("x", 1e-13, 1e-8);
        let b = Check::below("x", 5e-12, 1e-8);
        assert!(stable_pair(&a, &b));
        let a = Check::below("x", 1e-6, 1e-5);
        let b = Check::below("x", 2e-6, 1e-5);
        assert!(!stable_pair(&a, &b));
        assert!(stable_pair(
            &Check::holds("v", true),
            &Check::holds("v", true)
        ));
        assert!(!stable_pair(
            &Check::holds("v", true),
            &Check::holds("v", false)
        ));
    }
}
