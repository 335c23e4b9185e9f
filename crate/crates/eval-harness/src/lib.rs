//! Task-based retention evaluation for optimized skills.
//!
//! Given a skill and its optimized form, this crate generates a fixed set of
//! evaluation tasks, executes each under three context conditions — no skill
//! content, the full original content inline, and the compressed core with
//! on-demand module loading — scores the answers by verifier execution or
//! rubric judgment, and decides whether the optimized skill retains the
//! original's task performance. Corpus-level rollups summarize many skills.

mod aggregate;
mod condition;
mod error;
mod gate2;
pub mod prompts;
mod retention;
mod sandbox;
mod score;
mod task;
mod transcript;

pub use aggregate::{
    aggregate_report, compression_bin, CorpusMetrics, RetentionBin, SkillOutcome, SubsetMetrics,
};
pub use condition::{run_condition, Condition, ConditionRun, MAX_TOOL_CALLS};
pub use error::EvalError;
pub use gate2::{gate2, GateReport, TaskResult, TaskScore};
pub use retention::retention;
pub use sandbox::{run_verifier, VerifierOutcome, VERIFIER_TIMEOUT};
pub use score::{extract_artifact, score_response, ScoreOutcome};
pub use task::{generate_tasks, infer_kind, EvalTask, ScoringKind, TaskKind, TASKS_PER_SKILL};
pub use transcript::{to_jsonl, TranscriptEvent};
