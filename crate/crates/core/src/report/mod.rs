//! Machine-readable run reports and the dispatcher behind the command line.
//!
//! Every report carries the schema tag [`SCHEMA`], the seed, and a list of
//! [`Check`]s naming the module and operation that produced each value.
//! Reports are deterministic: wall time is only recorded on request.

mod run;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::ModelDescriptor;
use crate::{Error, Result};

pub use run::{run, DecTest, Emit, MassMethod, ModelSpec, RunCommand, RunConfig, SweepParameter, SweepSpec};

pub const SCHEMA: &str = "conformal-mass-report/1";

/// How a check compares `measured` with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|measured - expected| ≤ tolerance`.
    Within,
    /// `measured > expected - tolerance`; with zero tolerance a strict bound.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub module: String,
    pub operation: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        (module, operation): (&str, &str),
        measured: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let pass = match comparison {
            Comparison::Within => (measured - expected).abs() <= tolerance,
            Comparison::Above if tolerance == 0.0 => measured > expected,
            Comparison::Above => measured >= expected - tolerance,
        };
        Self {
            name: name.into(),
            module: module.into(),
            operation: operation.into(),
            measured,
            expected,
            tolerance,
            comparison,
            pass,
            detail: None,
        }
    }

    pub fn within(name: impl Into<String>, source: (&str, &str), measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, source, measured, expected, tolerance, Comparison::Within)
    }

    pub fn above(name: impl Into<String>, source: (&str, &str), measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, source, measured, bound, tolerance, Comparison::Above)
    }

    /// A yes/no property, recorded as `1` against an expected `1`.
    pub fn holds(name: impl Into<String>, source: (&str, &str), ok: bool) -> Self {
        Self::within(name, source, f64::from(u8::from(ok)), 1.0, 0.0)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// One row of an oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub method: String,
    pub mass: f64,
    /// `|mass - closed form|`.
    pub abs_delta: f64,
}

/// One row of a parameter sweep. Failed points keep their parameter and
/// carry the error text instead of a mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub mass: Option<f64>,
    pub method: String,
    pub error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub schema: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    pub seed: u64,
    /// Seconds; only present when timing was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    pub pass: bool,
}

impl MassReport {
    pub fn new(command: &str, n: Option<u32>, seed: u64) -> Self {
        Self {
            schema: SCHEMA.into(),
            command: command.into(),
            model: None,
            n,
            parameters: BTreeMap::new(),
            method: None,
            mass: None,
            error_estimate: None,
            checks: Vec::new(),
            oracle: Vec::new(),
            sweep: Vec::new(),
            seed,
            wall_time: None,
            pass: true,
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.into(), value);
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Recomputes `pass` from the checks and sweep rows.
    pub fn finish(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass) && self.sweep.iter().all(|r| r.failure.is_none());
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// The sweep table, the oracle table, or the check table, whichever
    /// the command produces.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(e.into());
        if self.command == "sweep" {
            w.write_record(["param", "mass", "method", "error"]).map_err(csv_err)?;
            for r in &self.sweep {
                let error = match (&r.failure, r.error) {
                    (Some(f), _) => format!("failed: {f}"),
                    (None, Some(e)) => number(e),
                    (None, None) => String::new(),
                };
                let mass = r.mass.map(number).unwrap_or_default();
                w.write_record([number(r.param), mass, r.method.clone(), error])
                    .map_err(csv_err)?;
            }
        } else if self.command == "oracle-compare" {
            w.write_record(["method", "mass", "abs_delta"]).map_err(csv_err)?;
            for r in &self.oracle {
                w.write_record([r.method.clone(), number(r.mass), number(r.abs_delta)])
                    .map_err(csv_err)?;
            }
        } else {
            w.write_record([
                "name",
                "module",
                "operation",
                "measured",
                "expected",
                "tolerance",
                "comparison",
                "pass",
            ])
            .map_err(csv_err)?;
            for c in &self.checks {
                let comparison = match c.comparison {
                    Comparison::Within => "within",
                    Comparison::Above => "above",
                };
                w.write_record([
                    c.name.clone(),
                    c.module.clone(),
                    c.operation.clone(),
                    number(c.measured),
                    number(c.expected),
                    number(c.tolerance),
                    comparison.into(),
                    c.pass.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
    }

    pub fn render(&self, emit: Emit) -> Result<String> {
        match emit {
            Emit::Json => self.to_json(),
            Emit::Csv => self.to_csv(),
        }
    }
}

/// Locale-free decimal, switching to exponent form for very small or large magnitudes.
fn number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e7).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Process exit status for a failed run: `2` for inputs that can never
/// succeed (bad configuration, inadmissible model), `1` otherwise.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidDimension { .. }
        | Error::InvalidModel(_)
        | Error::NotInvertible(_)
        | Error::InvalidArgument(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}
