//! Reproducibility metadata attached to JSON reports.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    /// SHA-256 of the canonical rational text of `J`.
    pub form_fingerprint: Option<String>,
    pub start_unix_ms: u64,
    pub end_unix_ms: u64,
    pub threads: usize,
    /// SHA-256 of the whole report serialized with this field empty.
    pub hash: String,
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command_line: &[String], threads: usize) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: command_line.to_vec(),
            seed: None,
            form_fingerprint: None,
            start_unix_ms: now_ms(),
            end_unix_ms: 0,
            threads,
            hash: String::new(),
        }
    }
}

/// Compact JSON with sorted keys and shortest round-trip floats.
fn canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("values always serialize")
}

fn digest(report: &Value) -> String {
    hex::encode(Sha256::digest(canonical(report).as_bytes()))
}

/// Embed `manifest` under `"manifest"`, stamp the end time and fill in the
/// hash.
pub fn seal(mut report: Value, mut manifest: RunManifest) -> Result<Value> {
    manifest.end_unix_ms = now_ms();
    manifest.hash = String::new();
    let obj = report
        .as_object_mut()
        .ok_or_else(|| Error::InvalidArgument("report must be a JSON object".into()))?;
    obj.insert("manifest".into(), serde_json::to_value(&manifest)?);
    let h = digest(&report);
    report["manifest"]["hash"] = Value::String(h);
    Ok(report)
}

/// Re-parse a sealed report and check its hash.
pub fn verify_report(text: &str) -> Result<RunManifest> {
    let mut v: Value = serde_json::from_str(text)?;
    let m: RunManifest = serde_json::from_value(
        v.get("manifest").cloned().ok_or_else(|| Error::Parse("report has no manifest".into()))?,
    )?;
    v["manifest"]["hash"] = Value::String(String::new());
    if digest(&v) != m.hash {
        return Err(Error::InvalidArgument("manifest hash does not match report contents".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seal_and_verify() {
        let mut m = RunManifest::new(&["conecount".into(), "constants".into()], 1);
        m.seed = Some(7);
        let sealed = seal(serde_json::json!({"x": 0.1, "y": [1, 2]}), m).unwrap();
        let text = serde_json::to_string_pretty(&sealed).unwrap();
        let back = verify_report(&text).unwrap();
        assert_eq!(back.seed, Some(7));
        let tampered = text.replace("0.1", "0.2");
        assert!(verify_report(&tampered).is_err());
    }
}
