use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "sublex-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Violation,
    PreconditionFailed,
    /// Reported values carry no claim; never fails the run.
    Diagnostic,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Diagnostic => 0,
            Status::Violation => 1,
            Status::PreconditionFailed => 2,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

/// Machine-readable result of one invocation. Everything except
/// `wall_time_seconds` is a function of the inputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub engine: &'static str,
    pub version: &'static str,
    pub command: String,
    pub model: Option<String>,
    pub fingerprint: Option<String>,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub status: Status,
    pub exit_code: i32,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            schema: REPORT_SCHEMA,
            engine: "sublex",
            version: sublex::VERSION,
            command: command.into(),
            model: None,
            fingerprint: None,
            seed: None,
            parameters: BTreeMap::new(),
            status: Status::Pass,
            exit_code: 0,
            result: Value::Null,
            error: None,
            wall_time_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.parameters.insert(key.to_string(), v);
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}
