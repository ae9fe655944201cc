//! Machine-readable command output.

use jetcalc::report::CheckItem;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::spec::Settings;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One command's verdict. Deterministic given the input bytes and settings.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    /// SHA-256 of the problem file bytes.
    pub input_digest: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub passed: bool,
    pub checks: Vec<CheckItem>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new(command: impl Into<String>, input: &[u8], settings: &Settings) -> Self {
        Self {
            command: command.into(),
            version: VERSION,
            input_digest: digest(input),
            seed: settings.seed,
            samples: settings.samples,
            tol: settings.tol,
            passed: true,
            checks: Vec::new(),
            details: Value::Null,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        self.passed &= item.passed;
        self.checks.push(item);
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = CheckItem>) {
        for i in items {
            self.push(i);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn one_failing_item_fails_the_report() {
        let st = Settings {
            seed: 1,
            samples: 2,
            tol: 1e-9,
        };
        let mut r = Report::new("x", b"{}", &st);
        r.push(CheckItem::within("a", 0.0, 1e-9));
        assert!(r.passed);
        r.extend([CheckItem::within("b", 1.0, 1e-9), CheckItem::flag("c", true)]);
        assert!(!r.passed);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v.get("details").is_none() && v.get("notes").is_none());
        assert_eq!(v["checks"].as_array().unwrap().len(), 3);
    }
}
