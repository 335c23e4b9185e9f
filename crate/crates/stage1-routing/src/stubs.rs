//! Minimal skill stubs (name + description) used for routing decisions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillStub {
    pub name: String,
    pub description: String,
}

impl SkillStub {
    pub fn new(name: impl Into<String>, description: impl Into<String>) -> Self {
        SkillStub {
            name: name.into(),
            description: description.into(),
        }
    }

    /// The document used for similarity ranking: name plus description.
    pub fn ranking_document(&self) -> String {
        format!("{} {}", self.name, self.description)
    }
}

/// Generic stubs used to pad distractor pools when the surrounding library
/// is too small. Deliberately bland: they should lose to any topical
/// distractor.
pub fn builtin_distractors() -> Vec<SkillStub> {
    vec![
        SkillStub::new(
            "general-notes",
            "Capture free-form notes and reminders for later reference.",
        ),
        SkillStub::new(
            "daily-journal",
            "Maintain a dated journal of activities and observations.",
        ),
        SkillStub::new(
            "meeting-scheduler",
            "Propose meeting times and draft calendar invitations.",
        ),
        SkillStub::new(
            "unit-converter",
            "Convert between common units of measure such as length, mass, and temperature.",
        ),
        SkillStub::new(
            "regex-tester",
            "Explain and test regular expressions against sample inputs.",
        ),
        SkillStub::new(
            "csv-inspector",
            "Summarize columns, types, and anomalies in CSV files.",
        ),
    ]
}
