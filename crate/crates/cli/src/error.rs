use std::fmt;
use std::path::Path;

use flexreg::io::FormatError;
use flexreg::metrics::MetricError;
use flexreg::{NetworkError, PolytopeError, RegionError};
use serde_json::{json, Map, Value};

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub path: Option<String>,
    pub field: Option<String>,
}

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

impl CliError {
    pub fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        CliError { code, kind, message: message.into(), path: None, field: None }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError::new(EXIT_INPUT, "invalid_input", message)
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError::new(EXIT_FAILURE, "failure", message)
    }

    pub fn io(path: &Path, err: &std::io::Error) -> Self {
        CliError { path: Some(path.display().to_string()), ..CliError::new(EXIT_INPUT, "io", err.to_string()) }
    }

    pub fn format(path: &Path, err: FormatError) -> Self {
        CliError {
            path: Some(path.display().to_string()),
            field: Some(err.field),
            ..CliError::new(EXIT_INPUT, "malformed_input", err.message)
        }
    }

    pub fn at(mut self, path: &Path) -> Self {
        self.path.get_or_insert_with(|| path.display().to_string());
        self
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        let mut obj = Map::new();
        obj.insert("error".into(), json!(self.kind));
        obj.insert("message".into(), json!(self.message));
        if let Some(p) = &self.path {
            obj.insert("path".into(), json!(p));
        }
        if let Some(f) = &self.field {
            obj.insert("field".into(), json!(f));
        }
        obj.insert("exit_code".into(), json!(self.code));
        Value::Object(obj).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<PolytopeError> for CliError {
    fn from(e: PolytopeError) -> Self {
        match e {
            PolytopeError::Empty | PolytopeError::InfeasibleRow(_) => {
                CliError::new(EXIT_INFEASIBLE, "infeasible", e.to_string())
            }
            PolytopeError::UnknownLabel(_)
            | PolytopeError::DuplicateLabel(_)
            | PolytopeError::LabelMismatch(_, _)
            | PolytopeError::DimensionMismatch(_) => CliError::input(e.to_string()),
            _ => CliError::failure(e.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> Self {
        match e {
            RegionError::Polytope(p) => p.into(),
            RegionError::Infeasible => CliError::new(EXIT_INFEASIBLE, "infeasible", e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Polytope(p) => p.into(),
            MetricError::Lp(_) | MetricError::ShedInfeasible { .. } => CliError::failure(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}
