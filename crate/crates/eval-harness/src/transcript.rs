//! Run transcripts: an ordered record of everything a condition run did,
//! serializable as JSON lines for post-hoc inspection.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TranscriptEvent {
    /// Context injected into the agent before the first turn.
    ContextInjected { tokens: usize, summary: String },
    /// The agent asked for a reference module.
    ToolCall { path: String },
    /// The harness answered a tool call.
    ToolResult { path: String, found: bool, tokens: usize },
    /// A tool call arrived after the budget was spent and was refused.
    BudgetRefusal { path: String },
    /// The agent produced its final answer.
    FinalAnswer { answer: String },
    /// The agent reply could not be interpreted; the run ended early.
    ProtocolError { detail: String },
}

/// Render a transcript as JSON lines, one event per line.
pub fn to_jsonl(events: &[TranscriptEvent]) -> String {
    let mut out = String::new();
    for event in events {
        // Serialization of these enums cannot fail: every payload is plain data.
        out.push_str(&serde_json::to_string(event).expect("transcript event serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trips_event_order() {
        let events = vec![
            TranscriptEvent::ContextInjected {
                tokens: 12,
                summary: "core".into(),
            },
            TranscriptEvent::ToolCall {
                path: "references/a.md".into(),
            },
            TranscriptEvent::FinalAnswer {
                answer: "done".into(),
            },
        ];
        let rendered = to_jsonl(&events);
        let parsed: Vec<TranscriptEvent> = rendered
            .lines()
            .map(|line| serde_json::from_str(line).unwrap())
            .collect();
        assert_eq!(parsed, events);
    }
}
