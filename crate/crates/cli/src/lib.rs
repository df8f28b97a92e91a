//! Run-spec driven front end for `bessel-core`.
//!
//! A run spec is a JSON object holding the parameters of one command. The
//! report echoes the spec with all defaults filled in, so re-submitting the
//! echo reproduces the report byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

mod run;
pub mod spec;

pub use run::run;
use spec::*;

pub const TOOL: &str = "bessel-forge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Certify,
    Ode,
    Picone,
    Hardy,
    Rellich,
    GeometryCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Ode => "ode",
            Command::Picone => "picone",
            Command::Hardy => "hardy",
            Command::Rellich => "rellich",
            Command::GeometryCheck => "geometry-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("spec is not valid JSON: {0}")]
    Json(String),
    #[error("spec must be a JSON object")]
    NotAnObject,
    #[error("field `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("spec is for `{found}` but the subcommand is `{expected}`")]
    CommandMismatch { expected: String, found: String },
    #[error("unknown action `{action}`; expected one of {expected}")]
    UnknownAction { action: String, expected: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunSpec {
    Certify(CertifySpec),
    Ode(OdeSpec),
    Picone(PiconeSpec),
    Hardy(HardySpec),
    Rellich(RellichSpec),
    GeometryCheck(GeometryCheckSpec),
}

fn decode<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, SpecError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        SpecError::Field {
            path: if path == "." { String::new() } else { path },
            message,
        }
    })
}

fn take_action(
    obj: &mut serde_json::Map<String, Value>,
    expected: &str,
) -> Result<String, SpecError> {
    match obj.remove("action") {
        Some(Value::String(a)) => Ok(a),
        Some(other) => Err(SpecError::Field {
            path: "action".into(),
            message: format!("expected a string, found {other}"),
        }),
        None => Err(SpecError::Field {
            path: "action".into(),
            message: format!("missing field `action` (one of {expected})"),
        }),
    }
}

impl RunSpec {
    /// Parses the spec text for `command`. A `"command"` key, if present,
    /// must agree with it.
    pub fn parse(command: Command, text: &str) -> Result<RunSpec, SpecError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        let Value::Object(mut obj) = value else {
            return Err(SpecError::NotAnObject);
        };
        if let Some(c) = obj.remove("command") {
            if c.as_str() != Some(command.name()) {
                return Err(SpecError::CommandMismatch {
                    expected: command.name().into(),
                    found: c.to_string(),
                });
            }
        }
        let spec = match command {
            Command::Certify => RunSpec::Certify(decode(Value::Object(obj))?),
            Command::Ode => RunSpec::Ode(decode(Value::Object(obj))?),
            Command::Picone => RunSpec::Picone(decode(Value::Object(obj))?),
            Command::GeometryCheck => RunSpec::GeometryCheck(decode(Value::Object(obj))?),
            Command::Hardy => {
                let expected = "radial, group, consistency, search, sweep";
                let action = take_action(&mut obj, expected)?;
                let rest = Value::Object(obj);
                RunSpec::Hardy(match action.as_str() {
                    "radial" => HardySpec::Radial(decode(rest)?),
                    "group" => HardySpec::Group(decode(rest)?),
                    "consistency" => HardySpec::Consistency(decode(rest)?),
                    "search" => HardySpec::Search(decode(rest)?),
                    "sweep" => HardySpec::Sweep(decode(rest)?),
                    _ => {
                        return Err(SpecError::UnknownAction {
                            action,
                            expected: expected.into(),
                        })
                    }
                })
            }
            Command::Rellich => {
                let expected = "constant, hypothesis, check";
                let action = take_action(&mut obj, expected)?;
                let rest = Value::Object(obj);
                RunSpec::Rellich(match action.as_str() {
                    "constant" => RellichSpec::Constant(decode(rest)?),
                    "hypothesis" => RellichSpec::Hypothesis(decode(rest)?),
                    "check" => RellichSpec::Check(decode(rest)?),
                    _ => {
                        return Err(SpecError::UnknownAction {
                            action,
                            expected: expected.into(),
                        })
                    }
                })
            }
        };
        Ok(spec)
    }

    pub fn command(&self) -> Command {
        match self {
            RunSpec::Certify(_) => Command::Certify,
            RunSpec::Ode(_) => Command::Ode,
            RunSpec::Picone(_) => Command::Picone,
            RunSpec::Hardy(_) => Command::Hardy,
            RunSpec::Rellich(_) => Command::Rellich,
            RunSpec::GeometryCheck(_) => Command::GeometryCheck,
        }
    }

    /// The spec with defaults filled in, including `command` and `action`.
    pub fn echo(&self) -> Value {
        let (body, action) = match self {
            RunSpec::Certify(s) => (serde_json::to_value(s), None),
            RunSpec::Ode(s) => (serde_json::to_value(s), None),
            RunSpec::Picone(s) => (serde_json::to_value(s), None),
            RunSpec::GeometryCheck(s) => (serde_json::to_value(s), None),
            RunSpec::Hardy(h) => match h {
                HardySpec::Radial(s) => (serde_json::to_value(s), Some("radial")),
                HardySpec::Group(s) => (serde_json::to_value(s), Some("group")),
                HardySpec::Consistency(s) => (serde_json::to_value(s), Some("consistency")),
                HardySpec::Search(s) => (serde_json::to_value(s), Some("search")),
                HardySpec::Sweep(s) => (serde_json::to_value(s), Some("sweep")),
            },
            RunSpec::Rellich(r) => match r {
                RellichSpec::Constant(s) => (serde_json::to_value(s), Some("constant")),
                RellichSpec::Hypothesis(s) => (serde_json::to_value(s), Some("hypothesis")),
                RellichSpec::Check(s) => (serde_json::to_value(s), Some("check")),
            },
        };
        let mut obj = match body.expect("spec records serialize") {
            Value::Object(o) => o,
            _ => unreachable!("spec records are structs"),
        };
        obj.insert(
            "command".into(),
            Value::String(self.command().name().into()),
        );
        if let Some(a) = action {
            obj.insert("action".into(), Value::String(a.into()));
        }
        Value::Object(obj)
    }
}

/// Outcome class; maps onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Negative,
    Error,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Negative => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub status: Status,
    pub spec: Value,
    pub result: Option<Value>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("unknown curve `{0}`; expected solution, phi or sweep")]
    UnknownCurve(String),
    #[error("the {command} report has no `{curve}` curve")]
    Missing { command: String, curve: String },
}

fn csv_number(v: &Value) -> String {
    match v.as_f64() {
        Some(x) => format!("{x:?}"),
        None => "NaN".into(),
    }
}

fn csv_from_columns(header: &[&str], columns: &[&Vec<Value>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| csv_number(&c[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Renders a named curve of the report as CSV with LF line endings.
pub fn emit_csv(report: &Report, curve: &str) -> Result<String, CsvError> {
    let missing = || CsvError::Missing {
        command: report.command.name().into(),
        curve: curve.into(),
    };
    let result = report.result.as_ref().ok_or_else(missing)?;
    match curve {
        "solution" => {
            let sol = result.get("solution").ok_or_else(missing)?;
            let col = |k: &str| sol.get(k).and_then(Value::as_array).ok_or_else(missing);
            Ok(csv_from_columns(
                &["r", "v", "v_prime", "flux"],
                &[col("r")?, col("v")?, col("v_prime")?, col("flux")?],
            ))
        }
        "phi" => {
            let rows = result
                .pointer("/certificate/phi_samples")
                .and_then(Value::as_array)
                .ok_or_else(missing)?;
            let mut out = String::from("r,phi\n");
            for row in rows {
                let pair = row.as_array().ok_or_else(missing)?;
                out.push_str(&format!(
                    "{},{}\n",
                    csv_number(&pair[0]),
                    csv_number(&pair[1])
                ));
            }
            Ok(out)
        }
        "sweep" => {
            let rows = result
                .get("sweep")
                .and_then(Value::as_array)
                .ok_or_else(missing)?;
            let mut out = String::from("param,ratio,uncertainty\n");
            for row in rows {
                let f = |k: &str| csv_number(row.get(k).unwrap_or(&Value::Null));
                out.push_str(&format!(
                    "{},{},{}\n",
                    f("param"),
                    f("ratio"),
                    f("uncertainty")
                ));
            }
            Ok(out)
        }
        other => Err(CsvError::UnknownCurve(other.into())),
    }
}
