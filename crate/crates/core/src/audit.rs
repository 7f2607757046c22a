//! Stage-tagged notes that travel with every algorithm result.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Note,
    /// A hypothesis of the underlying guarantee does not hold for this
    /// input; the output is still valid but the bound may not be met.
    HypothesisUnmet,
    /// A stage failed and a simpler construction was used instead.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub stage: String,
    pub kind: EntryKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub entries: Vec<AuditEntry>,
}

impl Audit {
    pub fn note(&mut self, stage: &str, message: impl Into<String>) {
        self.push(stage, EntryKind::Note, message);
    }

    pub fn unmet(&mut self, stage: &str, message: impl Into<String>) {
        self.push(stage, EntryKind::HypothesisUnmet, message);
    }

    pub fn fallback(&mut self, stage: &str, message: impl Into<String>) {
        self.push(stage, EntryKind::Fallback, message);
    }

    fn push(&mut self, stage: &str, kind: EntryKind, message: impl Into<String>) {
        self.entries.push(AuditEntry { stage: stage.to_string(), kind, message: message.into() });
    }

    pub fn extend(&mut self, other: Audit) {
        self.entries.extend(other.entries);
    }

    /// Copies `other` with each stage prefixed by `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: Audit) {
        for mut e in other.entries {
            e.stage = format!("{prefix}/{}", e.stage);
            self.entries.push(e);
        }
    }

    pub fn hypotheses_met(&self) -> bool {
        !self.entries.iter().any(|e| e.kind == EntryKind::HypothesisUnmet)
    }

    pub fn has_fallback(&self) -> bool {
        self.entries.iter().any(|e| e.kind == EntryKind::Fallback)
    }
}
