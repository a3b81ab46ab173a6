//! The machine-readable run report.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// Report of one command: verdicts plus numeric outputs. Deterministic for
/// identical inputs unless timing is requested.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub checks: Vec<Check>,
    pub outputs: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    /// A report whose inputs digest covers the command line and every input
    /// document.
    pub fn new(command: &str, inputs: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for part in inputs {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part);
        }
        let inputs_digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Self { command: command.into(), inputs_digest, checks: vec![], outputs: serde_json::Value::Null, wall_time_s: None }
    }

    /// Records a pass/fail check.
    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.checks.push(Check { name: name.into(), verdict, detail: detail.into() });
    }

    pub fn skip(&mut self, name: &str, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), verdict: Verdict::Skip, detail: detail.into() });
    }

    /// No check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let a = RunReport::new("z", &[b"abc"]);
        assert_eq!(a.inputs_digest, RunReport::new("z", &[b"abc"]).inputs_digest);
        assert_ne!(a.inputs_digest, RunReport::new("z", &[b"ab", b"c"]).inputs_digest);
        assert_eq!(a.inputs_digest.len(), 64);
    }

    #[test]
    fn verdicts_serialize_lowercase() {
        let mut r = RunReport::new("x", &[]);
        r.check("a", false, "");
        r.skip("b", "");
        assert!(!r.passed());
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["checks"][0]["verdict"], "fail");
        assert_eq!(j["checks"][1]["verdict"], "skip");
        assert!(j.get("wall_time_s").is_none());
    }
}
