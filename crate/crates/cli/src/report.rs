//! Machine-readable run reports.
//!
//! Top-level keys are fixed: `command`, `inputs`, `residuals`, `verdict`,
//! `runtime_ms`. `residuals` maps names to finite numbers and holds measured
//! values (such as the scalar curvature) alongside deviations.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    /// Named pass/fail checks contributing to the status.
    pub checks: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: serde_json::Value,
    pub residuals: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub runtime_ms: u64,
}

impl Report {
    pub fn new(command: &str, inputs: serde_json::Value) -> Self {
        Report {
            command: command.to_string(),
            inputs,
            residuals: BTreeMap::new(),
            verdict: Verdict {
                status: Status::Pass,
                checks: BTreeMap::new(),
                conclusion: None,
                error: None,
            },
            runtime_ms: 0,
        }
    }

    /// Records a named number. Non-finite values are dropped and recorded
    /// as a failed `finite:<name>` check.
    pub fn put(&mut self, name: &str, x: f64) {
        if x.is_finite() {
            self.residuals.insert(name.to_string(), x);
        } else {
            self.verdict.checks.insert(format!("finite:{name}"), false);
        }
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.verdict.checks.insert(name.to_string(), ok);
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).copied()
    }

    pub fn passed(&self) -> bool {
        self.verdict.status == Status::Pass
    }

    /// Status from the checks unless an error was already recorded.
    pub fn settle(&mut self) {
        if self.verdict.status != Status::Error {
            self.verdict.status = if self.verdict.checks.values().all(|&c| c) {
                Status::Pass
            } else {
                Status::Fail
            };
        }
    }

    pub fn fail_with(&mut self, message: String) {
        self.verdict.status = Status::Error;
        self.verdict.error = Some(message);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold only finite numbers and strings")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_keys() {
        let mut r = Report::new("verify", serde_json::json!({"p0": "1"}));
        r.put("x", 1.5);
        r.put("bad", f64::NAN);
        r.check("ok", true);
        r.settle();
        assert_eq!(r.verdict.status, Status::Fail);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["command", "inputs", "residuals", "runtime_ms", "verdict"]);
        assert!(v["residuals"].as_object().unwrap().values().all(|x| x.is_number()));
        assert_eq!(v["verdict"]["status"], "fail");
    }
}
