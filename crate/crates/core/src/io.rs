//! JSON formats for instances and type distributions.
//!
//! Numbers may be JSON numbers or strings such as `"3/7"` or `"0.125"`; both are
//! parsed to exact rationals. Output always uses `"p/q"` strings.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::dist::TypeDistribution;
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::numerics::{parse_rational, Rational};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(rename = "F")]
    f: Vec<Vec<Value>>,
    r: Vec<Value>,
    c: Vec<Value>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DistributionFile {
    Piecewise { breakpoints: Vec<Value>, densities: Vec<Value> },
    Discrete { points: Vec<Value>, weights: Vec<Value> },
}

fn syntax(err: serde_json::Error) -> Error {
    Error::invalid(format!("line {}, column {}", err.line(), err.column()), err.to_string())
}

fn number(v: &Value, field: &str) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(Error::invalid(field, format!("expected a number, got {other}"))),
    };
    parse_rational(&text).ok_or_else(|| Error::invalid(field, format!("cannot parse `{text}` as a rational")))
}

fn numbers(vs: &[Value], field: &str) -> Result<Vec<Rational>> {
    vs.iter()
        .enumerate()
        .map(|(i, v)| number(v, &format!("{field}[{i}]")))
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance<Rational>> {
    let raw: InstanceFile = serde_json::from_str(text).map_err(syntax)?;
    let f = raw
        .f
        .iter()
        .enumerate()
        .map(|(a, row)| numbers(row, &format!("F[{a}]")))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(f, numbers(&raw.r, "r")?, numbers(&raw.c, "c")?, raw.labels)
}

pub fn parse_distribution(text: &str) -> Result<TypeDistribution<Rational>> {
    let raw: DistributionFile = serde_json::from_str(text).map_err(syntax)?;
    match raw {
        DistributionFile::Piecewise { breakpoints, densities } => TypeDistribution::piecewise(
            numbers(&breakpoints, "breakpoints")?,
            numbers(&densities, "densities")?,
        ),
        DistributionFile::Discrete { points, weights } => {
            TypeDistribution::discrete(numbers(&points, "points")?, numbers(&weights, "weights")?)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(path.display().to_string(), e.to_string()))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance<Rational>> {
    let path = path.as_ref();
    parse_instance(&read(path)?).map_err(|e| prefix(path, e))
}

pub fn read_distribution(path: impl AsRef<Path>) -> Result<TypeDistribution<Rational>> {
    let path = path.as_ref();
    parse_distribution(&read(path)?).map_err(|e| prefix(path, e))
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Invalid { field, message } => Error::Invalid {
            field: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    }
}

pub fn rationals_json(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn instance_json(inst: &Instance<Rational>) -> Value {
    let mut v = json!({
        "F": inst.outcome_probs().iter().map(|row| rationals_json(row)).collect::<Vec<_>>(),
        "r": rationals_json(inst.rewards()),
        "c": rationals_json(inst.costs()),
    });
    if let Some(labels) = inst.labels() {
        v["labels"] = json!(labels);
    }
    v
}

pub fn distribution_json(dist: &TypeDistribution<Rational>) -> Value {
    match dist {
        TypeDistribution::Discrete { points, weights } => json!({
            "kind": "discrete",
            "points": rationals_json(points),
            "weights": rationals_json(weights),
        }),
        TypeDistribution::PiecewiseConstant { breakpoints, densities } => json!({
            "kind": "piecewise",
            "breakpoints": rationals_json(breakpoints),
            "densities": rationals_json(densities),
        }),
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> std::io::Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
