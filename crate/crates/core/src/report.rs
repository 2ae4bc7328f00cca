//! Loading scenarios from disk and writing run artifacts.
//!
//! Every number written by this module goes through [`format_number`], so a
//! given scenario always produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{
    ChannelScore, CovarianceReport, ImpactSurface, LagWindowReport, Observation, OverlapMatrix, SczCluster,
};
use crate::dynamics::SimulationResult;
use crate::scenario::Scenario;
use crate::validation::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParseErrorKind {
    UnknownKey,
    Syntax,
    Schema,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{kind:?} error at line {line}, column {column}: {message}")]
    Parse {
        kind: ParseErrorKind,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scenario failed validation:\n{0}")]
    Validation(ValidationReport),
}

impl From<serde_json::Error> for LoadError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let message = e.to_string();
        let kind = match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => ParseErrorKind::Syntax,
            Category::Data if message.starts_with("unknown field") || message.contains("unknown variant") => {
                ParseErrorKind::UnknownKey
            }
            Category::Data => ParseErrorKind::Schema,
        };
        LoadError::Parse {
            kind,
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

/// Parses and validates scenario JSON. Warnings are returned alongside the
/// scenario; any error rejects it.
pub fn parse_scenario(text: &str) -> Result<(Scenario, ValidationReport), LoadError> {
    let scenario = Scenario::from_json_str(text)?;
    let report = scenario.validate();
    if !report.is_ok() {
        return Err(LoadError::Validation(report));
    }
    Ok((scenario, report))
}

pub fn load_scenario(path: &Path) -> Result<(Scenario, ValidationReport), LoadError> {
    parse_scenario(&read(path)?)
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Formats `x` with 9 significant digits, trailing zeros removed, switching to
/// exponent notation outside `[1e-4, 1e9)` like C's `%.9g`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Trajectory CSV: `t` then one column per node id in lexicographic order.
pub fn timeseries_csv(result: &SimulationResult) -> String {
    let mut out = String::from("t");
    for id in result.trajectories.keys() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    let Some(grid) = result.grid() else {
        return out;
    };
    for k in 0..grid.len {
        out.push_str(&format_number(grid.t(k)));
        for traj in result.trajectories.values() {
            out.push(',');
            out.push_str(&format_number(traj.values[k]));
        }
        out.push('\n');
    }
    out
}

pub fn write_timeseries(result: &SimulationResult, path: &Path) -> io::Result<()> {
    fs::write(path, timeseries_csv(result))
}

/// Long-format surface grid `intensity,activation,suppression`, row-major by
/// intensity. Failed cells have an empty suppression field.
pub fn surface_csv(surface: &ImpactSurface) -> String {
    let mut out = String::from("intensity,activation,suppression\n");
    for (i, x) in surface.intensity.iter().enumerate() {
        for (j, y) in surface.activation.iter().enumerate() {
            let s = surface.suppression[i][j].map(format_number).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", format_number(*x), format_number(*y), s);
        }
    }
    out
}

fn num(x: f64) -> Value {
    // Round-tripping through the fixed formatter keeps JSON and CSV in step.
    format_number(x).parse::<f64>().ok().filter(|v| v.is_finite()).map_or(Value::Null, Value::from)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| nums(r)).collect())
}

fn observation(o: &Observation) -> Value {
    o.value().map_or(Value::Null, num)
}

/// Everything `analyze`, `channels` and `surface` can report. Absent sections
/// are omitted from the JSON.
#[derive(Debug, Clone, Default)]
pub struct AnalysisDocument {
    pub lag_windows: Option<Vec<LagWindowReport>>,
    pub overlap: Option<OverlapMatrix>,
    pub covariance: Option<CovarianceReport>,
    pub scz: Option<Vec<SczCluster>>,
    pub channels: Option<Vec<ChannelScore>>,
    pub surface: Option<ImpactSurface>,
}

impl AnalysisDocument {
    pub fn to_json(&self) -> Value {
        let mut doc = Map::new();
        if let Some(lags) = &self.lag_windows {
            let rows = lags
                .iter()
                .map(|l| {
                    json!({
                        "id": l.capability_id,
                        "Lw": observation(&l.lag_window),
                        "Tc": observation(&l.collapse_time),
                        "censored": {"Lw": l.lag_window.is_censored(), "Tc": l.collapse_time.is_censored()},
                        "max_decline_rate": num(l.max_decline_rate),
                        "max_decline_time": num(l.max_decline_time),
                        "rupture_score": num(l.rupture_score),
                    })
                })
                .collect();
            doc.insert("lag_windows".into(), Value::Array(rows));
        }
        if let Some(o) = &self.overlap {
            doc.insert(
                "overlap".into(),
                json!({"rows": o.rows, "cols": o.cols, "entries": matrix(&o.entries)}),
            );
        }
        if let Some(c) = &self.covariance {
            let bands: Vec<Value> = c
                .coupled_bands
                .iter()
                .map(|b| json!({"a": b.a, "b": b.b, "correlation": num(b.correlation)}))
                .collect();
            doc.insert(
                "covariance".into(),
                json!({
                    "ids": c.ids,
                    "covariance": matrix(&c.covariance),
                    "correlation": matrix(&c.correlation),
                    "degenerate": c.degenerate,
                    "coupled_bands": bands,
                }),
            );
        }
        if let Some(z) = &self.scz {
            let rows = z
                .iter()
                .map(|c| {
                    json!({
                        "members": c.members,
                        "mean_overlap": num(c.mean_overlap),
                        "mean_correlation": num(c.mean_correlation),
                        "min_lag_window": observation(&c.min_lag_window),
                        "censored": c.min_lag_window.is_censored(),
                    })
                })
                .collect();
            doc.insert("scz".into(), Value::Array(rows));
        }
        if let Some(ch) = &self.channels {
            let rows = ch
                .iter()
                .map(|c| {
                    json!({
                        "path": c.channel.path,
                        "p_collapse": num(c.p_collapse),
                        "v_strategic": num(c.v_strategic),
                        "i_policy": num(c.i_policy),
                        "d": num(c.d),
                    })
                })
                .collect();
            doc.insert("channels".into(), Value::Array(rows));
        }
        if let Some(s) = &self.surface {
            let grid: Vec<Value> = s
                .suppression
                .iter()
                .map(|row| Value::Array(row.iter().map(|c| c.map_or(Value::Null, num)).collect()))
                .collect();
            let errors: Vec<Value> = s
                .errors
                .iter()
                .map(|e| json!({"intensity": e.intensity, "activation": e.activation, "message": e.message}))
                .collect();
            doc.insert(
                "surface".into(),
                json!({
                    "intensity": nums(&s.intensity),
                    "activation": nums(&s.activation),
                    "suppression": grid,
                    "errors": errors,
                }),
            );
        }
        Value::Object(doc)
    }

    pub fn to_json_string(&self) -> String {
        pretty(&self.to_json())
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn write_analysis(doc: &AnalysisDocument, path: &Path) -> io::Result<()> {
    fs::write(path, doc.to_json_string())
}

/// Provenance written next to every set of outputs. `wall_time_seconds` is the
/// only field that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_sha256: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, scenario_bytes: &[u8]) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario_sha256: sha256_hex(scenario_bytes),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, pretty(&serde_json::to_value(self).expect("manifest serializes")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
