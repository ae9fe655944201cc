//! Machine-readable check results shared by the verifiers.

use serde::{Deserialize, Serialize};

/// One named residual with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub max_dev: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckItem {
    /// Passes when `max_dev <= tol`.
    pub fn within(name: impl Into<String>, max_dev: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: max_dev <= tol,
            max_dev,
            tol,
            note: None,
        }
    }

    /// Passes when `max_dev >= threshold`: used for residuals that must *not*
    /// vanish.
    pub fn at_least(name: impl Into<String>, max_dev: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: max_dev >= threshold,
            max_dev,
            tol: threshold,
            note: None,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed,
            max_dev: 0.0,
            tol: 0.0,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A group of check items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub items: Vec<CheckItem>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, seed: u64, samples: usize) -> Self {
        Self {
            name: name.into(),
            seed,
            samples,
            items: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        self.items.push(item);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn max_dev(&self) -> f64 {
        self.items.iter().map(|i| i.max_dev).fold(0.0, f64::max)
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }
}
