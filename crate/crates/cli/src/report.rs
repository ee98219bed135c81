//! Reports: one JSON document per command and scenario, or a plain-text
//! rendering of the same content.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use waysim::{ComplexMatrix, Povm};

use crate::scenario::Violation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The command ran and produced informational output.
    Completed,
    Pass,
    /// A mathematically meaningful negative verdict.
    NoGo,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Completed | Status::Pass => 0,
            Status::NoGo => 2,
            Status::Fail | Status::Error => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::Pass => "pass",
            Status::NoGo => "no-go",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// Exit code of a batch: any error wins, then any no-go.
pub fn combined_exit_code(statuses: impl IntoIterator<Item = Status>) -> i32 {
    let codes: Vec<i32> = statuses.into_iter().map(Status::exit_code).collect();
    if codes.contains(&1) {
        1
    } else if codes.contains(&2) {
        2
    } else {
        0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub scenario: String,
    pub digest: String,
    pub status: Status,
    pub exit_code: i32,
    pub sections: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<Violation>,
    /// Wall-clock milliseconds per section; only present on request, so that
    /// machine reports are otherwise reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn new(command: &str, scenario: &str, digest: &str) -> Self {
        Self {
            tool: "waysim".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario: scenario.into(),
            digest: digest.into(),
            status: Status::Completed,
            exit_code: 0,
            sections: BTreeMap::new(),
            errors: Vec::new(),
            timings_ms: None,
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.set_status(status);
        self
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn failed(command: &str, scenario: &str, digest: &str, errors: Vec<Violation>) -> Self {
        let mut r = Self::new(command, scenario, digest);
        r.errors = errors;
        r.with_status(Status::Error)
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "waysim {} on {} [{}]", self.command, self.scenario, self.status.as_str());
        let _ = writeln!(out, "digest {}", self.digest);
        for (name, value) in &self.sections {
            let _ = writeln!(out, "\n[{name}]");
            flatten(&mut out, "", value);
        }
        if !self.errors.is_empty() {
            let _ = writeln!(out, "\n[errors]");
            for e in &self.errors {
                let _ = writeln!(out, "{e}");
            }
        }
        if let Some(t) = &self.timings_ms {
            let _ = writeln!(out, "\n[timings]");
            for (k, v) in t {
                let _ = writeln!(out, "{k} = {v:.3} ms");
            }
        }
        let _ = writeln!(out, "\nexit {}", self.exit_code);
        out
    }
}

fn flatten(out: &mut String, prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(out, &key, v);
            }
        }
        // Matrices and long traces are summarized; the machine format has them in full.
        Value::Array(items) if items.iter().any(|v| v.is_array() || v.is_object()) || items.len() > 8 => {
            let _ = writeln!(out, "{prefix} = [{} entries]", items.len());
        }
        other => {
            let _ = writeln!(out, "{prefix} = {}", scalar(other));
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

/// Row-major `[re, im]` rows.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    let d = m.dim();
    Value::Array(
        (0..d)
            .map(|r| Value::Array((0..d).map(|c| serde_json::json!([m[(r, c)].re, m[(r, c)].im])).collect()))
            .collect(),
    )
}

pub fn povm_json(p: &Povm) -> Value {
    Value::Array(p.effects().iter().map(|(l, e)| serde_json::json!({ "label": l, "effect": matrix_json(e) })).collect())
}
