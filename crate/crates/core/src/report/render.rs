//! JSON and CSV output. JSON keys are written in a fixed order and every
//! real number with 17 significant digits, so identical reports render to
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{
    Cell, Check, DiagnosticsReport, ErrorBlock, Format, Provenance, RunConfig, StabilityReport,
    Suite, SuiteResult, Table,
};
use crate::error::{PbxError, Result};
use crate::models::{EqhoParams, GeneralizedParams, ModelParams, SwansonParams};

fn num(out: &mut String, x: f64) {
    if x.is_finite() {
        let _ = write!(out, "{x:.16e}");
    } else {
        out.push_str("null");
    }
}

fn text(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings serialize"));
}

fn complex(out: &mut String, z: Complex64) {
    out.push_str("{\"re\":");
    num(out, z.re);
    out.push_str(",\"im\":");
    num(out, z.im);
    out.push('}');
}

fn cell(out: &mut String, c: &Cell) {
    match c {
        Cell::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Cell::Real(x) => num(out, *x),
        Cell::Text(s) => text(out, s),
        Cell::Complex(z) => complex(out, *z),
    }
}

fn list<T>(out: &mut String, items: &[T], mut f: impl FnMut(&mut String, &T)) {
    out.push('[');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        f(out, item);
    }
    out.push(']');
}

fn key(out: &mut String, k: &str) {
    text(out, k);
    out.push(':');
}

fn config(out: &mut String, c: &RunConfig) {
    out.push('{');
    key(out, "model");
    text(out, c.model().as_str());
    out.push(',');
    key(out, "params");
    out.push('{');
    for (i, (k, v)) in c.params.named_values().into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        key(out, k);
        num(out, v);
    }
    out.push_str("},");
    let _ = write!(
        out,
        "\"dim\":{},\"window\":{},\"n_max\":{},\"tol\":",
        c.dim, c.window, c.n_max
    );
    num(out, c.tol);
    out.push(',');
    key(out, "suites");
    list(out, &c.suites, |o, s| text(o, s.as_str()));
    out.push(',');
    key(out, "format");
    text(out, c.format.as_str());
    let _ = write!(out, ",\"stability\":{}", c.stability);
    out.push('}');
}

fn check(out: &mut String, c: &Check) {
    out.push('{');
    key(out, "name");
    text(out, &c.name);
    out.push(',');
    key(out, "value");
    num(out, c.value);
    out.push(',');
    key(out, "threshold");
    num(out, c.threshold);
    let _ = write!(out, ",\"pass\":{},\"kind\":", c.pass);
    text(out, if c.boolean { "boolean" } else { "bound" });
    out.push('}');
}

fn error_block(out: &mut String, e: &Option<ErrorBlock>) {
    match e {
        None => out.push_str("null"),
        Some(e) => {
            out.push('{');
            key(out, "kind");
            text(out, &e.kind);
            out.push(',');
            key(out, "message");
            text(out, &e.message);
            let _ = write!(out, ",\"numerical\":{}}}", e.numerical);
        }
    }
}

fn table(out: &mut String, t: &Option<Table>) {
    match t {
        None => out.push_str("null"),
        Some(t) => {
            out.push('{');
            key(out, "columns");
            list(out, &t.columns, |o, c| text(o, c));
            out.push(',');
            key(out, "rows");
            list(out, &t.rows, |o, row| list(o, row, cell));
            out.push('}');
        }
    }
}

fn suite(out: &mut String, s: &SuiteResult) {
    let _ = write!(out, "{{\"passed\":{},", s.passed());
    key(out, "checks");
    list(out, &s.checks, check);
    out.push(',');
    key(out, "labels");
    out.push('{');
    for (i, (k, v)) in s.labels.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        key(out, k);
        cell(out, v);
    }
    out.push_str("},");
    key(out, "table");
    table(out, &s.table);
    out.push(',');
    key(out, "error");
    error_block(out, &s.error);
    out.push('}');
}

fn provenance(out: &mut String, p: &Provenance) {
    out.push('{');
    key(out, "version");
    text(out, &p.version);
    out.push(',');
    key(out, "timestamp");
    match &p.timestamp {
        Some(t) => text(out, t),
        None => out.push_str("null"),
    }
    out.push(',');
    key(out, "d_stability");
    match &p.stability {
        None => out.push_str("null"),
        Some(s) => {
            let _ = write!(
                out,
                "{{\"dim\":{},\"stable\":{},\"unstable\":",
                s.dim, s.stable
            );
            list(out, &s.unstable, |o, x| text(o, x));
            out.push('}');
        }
    }
    out.push(',');
    key(out, "content_sha256");
    text(out, &p.content_sha256);
    out.push('}');
}

/// Everything except the provenance block, without the closing brace.
fn body(r: &DiagnosticsReport) -> String {
    let mut out = String::new();
    out.push('{');
    key(&mut out, "config");
    config(&mut out, &r.config);
    out.push(',');
    key(&mut out, "suites");
    out.push('{');
    for (i, s) in r.suites.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        key(&mut out, s.suite.as_str());
        suite(&mut out, s);
    }
    out.push_str("},");
    key(&mut out, "summary");
    let _ = write!(
        out,
        "{{\"passed\":{},\"exit_code\":{},\"failed_checks\":",
        r.passed(),
        r.exit_code()
    );
    list(&mut out, &r.failed_checks(), |o, x| text(o, x));
    out.push_str("},");
    key(&mut out, "error");
    error_block(&mut out, &r.error);
    out
}

/// Hex SHA-256 of the report without its provenance block.
pub fn content_hash(r: &DiagnosticsReport) -> String {
    let mut b = body(r);
    b.push('}');
    let digest = Sha256::digest(b.as_bytes());
    digest
        .iter()
        .fold(String::with_capacity(64), |mut s, byte| {
            let _ = write!(s, "{byte:02x}");
            s
        })
}

/// Single JSON object, newline-terminated.
pub fn render_json(r: &DiagnosticsReport) -> String {
    let mut out = body(r);
    out.push(',');
    key(&mut out, "provenance");
    provenance(&mut out, &r.provenance);
    out.push_str("}\n");
    out
}

fn csv_field(out: &mut String, s: &str) {
    if s.contains([',', '"', '\n', '\r']) {
        out.push('"');
        out.push_str(&s.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(s);
    }
}

fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn csv_table(t: &Table) -> String {
    let complex_col: Vec<bool> = (0..t.columns.len())
        .map(|j| t.rows.iter().any(|r| matches!(r[j], Cell::Complex(_))))
        .collect();
    let mut out = String::new();
    let mut header = Vec::new();
    for (c, is_complex) in t.columns.iter().zip(&complex_col) {
        if *is_complex {
            header.push(format!("{c}_re"));
            header.push(format!("{c}_im"));
        } else {
            header.push(c.clone());
        }
    }
    for (i, h) in header.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        csv_field(&mut out, h);
    }
    out.push('\n');
    for row in &t.rows {
        let mut fields = Vec::new();
        for (c, is_complex) in row.iter().zip(&complex_col) {
            let (a, b) = match c {
                Cell::Int(i) => (i.to_string(), String::new()),
                Cell::Real(x) => (csv_number(*x), String::new()),
                Cell::Text(s) => (s.clone(), String::new()),
                Cell::Complex(z) => (csv_number(z.re), csv_number(z.im)),
            };
            fields.push(a);
            if *is_complex {
                fields.push(b);
            }
        }
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            csv_field(&mut out, f);
        }
        out.push('\n');
    }
    out
}

/// `(file name, contents)`: one `<suite>.csv` per suite with a table, plus
/// `checks.csv` listing every check.
pub fn render_csv(r: &DiagnosticsReport) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for s in &r.suites {
        let t = s.table.clone().unwrap_or_else(|| Table::new(&[]));
        files.push((format!("{}.csv", s.suite), csv_table(&t)));
    }
    let mut checks = Table::new(&["suite", "name", "value", "threshold", "pass"]);
    for s in &r.suites {
        for c in &s.checks {
            checks.push(vec![
                s.suite.as_str().into(),
                c.name.as_str().into(),
                c.value.into(),
                c.threshold.into(),
                c.pass.into(),
            ]);
        }
    }
    files.push(("checks.csv".to_string(), csv_table(&checks)));
    files
}

pub fn write_csv(r: &DiagnosticsReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, content) in render_csv(r) {
        fs::write(dir.join(name), content)?;
    }
    Ok(())
}

fn bad(what: &str) -> PbxError {
    PbxError::Parse(format!("malformed report: {what}"))
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| bad(k))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    if v.is_null() {
        return Ok(f64::NAN);
    }
    v.as_f64().ok_or_else(|| bad(what))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(what))
}

fn as_bool(v: &Value, what: &str) -> Result<bool> {
    v.as_bool().ok_or_else(|| bad(what))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(what))
}

fn parse_cell(v: &Value) -> Result<Cell> {
    Ok(match v {
        Value::Null => Cell::Real(f64::NAN),
        Value::String(s) => Cell::Text(s.clone()),
        Value::Number(n) => match n.as_i64() {
            Some(i) if !n.is_f64() => Cell::Int(i),
            _ => Cell::Real(n.as_f64().ok_or_else(|| bad("number"))?),
        },
        Value::Object(_) => Cell::Complex(Complex64::new(
            as_f64(field(v, "re")?, "re")?,
            as_f64(field(v, "im")?, "im")?,
        )),
        _ => return Err(bad("cell")),
    })
}

fn parse_error(v: &Value) -> Result<Option<ErrorBlock>> {
    if v.is_null() {
        return Ok(None);
    }
    Ok(Some(ErrorBlock {
        kind: as_str(field(v, "kind")?, "kind")?.to_string(),
        message: as_str(field(v, "message")?, "message")?.to_string(),
        numerical: as_bool(field(v, "numerical")?, "numerical")?,
    }))
}

fn parse_config(v: &Value) -> Result<RunConfig> {
    let p = field(v, "params")?;
    let get = |k: &str| as_f64(field(p, k)?, k);
    let params = match as_str(field(v, "model")?, "model")? {
        "eqho" => ModelParams::Eqho(EqhoParams::new(get("beta")?)?),
        "swanson" => ModelParams::Swanson(SwansonParams::new(get("theta")?)?),
        "generalized" => {
            ModelParams::Generalized(GeneralizedParams::new(get("alpha")?, get("beta_g")?)?)
        }
        other => return Err(bad(other)),
    };
    let suites = field(v, "suites")?
        .as_array()
        .ok_or_else(|| bad("suites"))?
        .iter()
        .map(|s| as_str(s, "suite")?.parse::<Suite>())
        .collect::<Result<Vec<_>>>()?;
    Ok(RunConfig {
        params,
        dim: as_usize(field(v, "dim")?, "dim")?,
        window: as_usize(field(v, "window")?, "window")?,
        n_max: as_usize(field(v, "n_max")?, "n_max")?,
        tol: as_f64(field(v, "tol")?, "tol")?,
        suites,
        format: as_str(field(v, "format")?, "format")?.parse::<Format>()?,
        output: None,
        stability: as_bool(field(v, "stability")?, "stability")?,
    })
}

fn parse_suite(name: &str, v: &Value) -> Result<SuiteResult> {
    let mut s = SuiteResult::new(name.parse()?);
    for c in field(v, "checks")?
        .as_array()
        .ok_or_else(|| bad("checks"))?
    {
        s.checks.push(Check {
            name: as_str(field(c, "name")?, "name")?.to_string(),
            value: as_f64(field(c, "value")?, "value")?,
            threshold: as_f64(field(c, "threshold")?, "threshold")?,
            pass: as_bool(field(c, "pass")?, "pass")?,
            boolean: as_str(field(c, "kind")?, "kind")? == "boolean",
        });
    }
    for (k, c) in field(v, "labels")?
        .as_object()
        .ok_or_else(|| bad("labels"))?
    {
        s.labels.push((k.clone(), parse_cell(c)?));
    }
    let t = field(v, "table")?;
    if !t.is_null() {
        let columns = field(t, "columns")?
            .as_array()
            .ok_or_else(|| bad("columns"))?
            .iter()
            .map(|c| as_str(c, "column").map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        let rows = field(t, "rows")?
            .as_array()
            .ok_or_else(|| bad("rows"))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad("row"))?
                    .iter()
                    .map(parse_cell)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        s.table = Some(Table { columns, rows });
    }
    s.error = parse_error(field(v, "error")?)?;
    Ok(s)
}

/// Inverse of [`render_json`].
pub fn parse_json(input: &str) -> Result<DiagnosticsReport> {
    let v: Value = serde_json::from_str(input).map_err(|e| PbxError::Parse(e.to_string()))?;
    let config = parse_config(field(&v, "config")?)?;
    let suites = field(&v, "suites")?
        .as_object()
        .ok_or_else(|| bad("suites"))?
        .iter()
        .map(|(k, s)| parse_suite(k, s))
        .collect::<Result<Vec<_>>>()?;
    let p = field(&v, "provenance")?;
    let stability = match field(p, "d_stability")? {
        Value::Null => None,
        s => Some(StabilityReport {
            dim: as_usize(field(s, "dim")?, "dim")?,
            stable: as_bool(field(s, "stable")?, "stable")?,
            unstable: field(s, "unstable")?
                .as_array()
                .ok_or_else(|| bad("unstable"))?
                .iter()
                .map(|x| as_str(x, "unstable").map(str::to_string))
                .collect::<Result<Vec<_>>>()?,
        }),
    };
    let timestamp = match field(p, "timestamp")? {
        Value::Null => None,
        t => Some(as_str(t, "timestamp")?.to_string()),
    };
    Ok(DiagnosticsReport {
        config,
        suites,
        error: parse_error(field(&v, "error")?)?,
        provenance: Provenance {
            version: as_str(field(p, "version")?, "version")?.to_string(),
            timestamp,
            stability,
            content_sha256: as_str(field(p, "content_sha256")?, "content_sha256")?.to_string(),
        },
    })
}
