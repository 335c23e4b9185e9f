//! Task generation for the retention gate.
//!
//! A task set is exactly five tasks per skill: a mix of prompts answerable
//! from the always-loaded core alone and prompts that require on-demand
//! reference material. Each task carries its own scoring contract — either a
//! standalone verifier script run against the submitted artifact, or a rubric
//! judged criterion by criterion.

use std::collections::HashSet;

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::{Deserialize, Serialize};
use skill_model::{OptimizedSkill, Skill};

use crate::error::EvalError;
use crate::prompts;

/// Number of tasks generated per skill. Fixed so that per-skill gate results
/// stay comparable across the corpus.
pub const TASKS_PER_SKILL: usize = 5;

const GENERATION_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Answerable from the always-loaded core instructions alone.
    CoreOnly,
    /// Requires material that lives in an on-demand reference module.
    NeedsReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringKind {
    /// A standalone verifier script checks the submitted artifact.
    CodeExecution,
    /// A judge scores the answer against the rubric criteria.
    Rubric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalTask {
    pub prompt: String,
    pub kind: TaskKind,
    pub scoring: ScoringKind,
    /// Criteria for rubric scoring; empty for code-execution tasks.
    pub rubric: Vec<String>,
    /// Verifier source for code-execution tasks: a standalone interpreted
    /// test file whose exit status is the pass/fail signal.
    pub verifier: Option<String>,
}

impl EvalTask {
    fn contract_violation(&self) -> Option<String> {
        if self.prompt.trim().is_empty() {
            return Some("empty prompt".into());
        }
        match self.scoring {
            ScoringKind::CodeExecution => {
                if self.verifier.as_deref().map_or(true, |v| v.trim().is_empty()) {
                    return Some("code_execution task without a verifier".into());
                }
            }
            ScoringKind::Rubric => {
                if self.rubric.is_empty() {
                    return Some("rubric task with no criteria".into());
                }
            }
        }
        None
    }
}

#[derive(Deserialize)]
struct TaskListReply {
    tasks: Vec<EvalTask>,
}

/// Generate exactly five tasks for a skill, retrying malformed lists.
///
/// Task kind is re-derived locally: a prompt only counts as `needs_reference`
/// when it actually mentions content that lives in a module but not in the
/// core, so a mislabeled generation cannot skew the gate's difficulty mix.
pub fn generate_tasks(
    gateway: &Gateway,
    skill: &Skill,
    optimized: &OptimizedSkill,
) -> Result<Vec<EvalTask>, EvalError> {
    let mut last_reason = String::new();
    for attempt in 1..=GENERATION_ATTEMPTS {
        let request = CompletionRequest::new(
            ModelRole::Evaluator,
            prompts::TASKS_SYSTEM,
            &prompts::tasks_user(skill, optimized, attempt),
        )
        .with_schema(prompts::TASKS_SCHEMA);
        let reply: TaskListReply = match gateway.complete_structured(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { last_error, .. }) => {
                last_reason = last_error;
                continue;
            }
            Err(other) => return Err(other.into()),
        };
        match validate_tasks(reply.tasks) {
            Ok(mut tasks) => {
                for task in &mut tasks {
                    task.kind = infer_kind(&task.prompt, optimized);
                }
                return Ok(tasks);
            }
            Err(reason) => last_reason = reason,
        }
    }
    Err(EvalError::TaskGeneration {
        skill: skill.name.clone(),
        reason: last_reason,
    })
}

fn validate_tasks(tasks: Vec<EvalTask>) -> Result<Vec<EvalTask>, String> {
    if tasks.len() != TASKS_PER_SKILL {
        return Err(format!("expected {TASKS_PER_SKILL} tasks, got {}", tasks.len()));
    }
    for (i, task) in tasks.iter().enumerate() {
        if let Some(violation) = task.contract_violation() {
            return Err(format!("task {i}: {violation}"));
        }
    }
    Ok(tasks)
}

/// Decide whether a prompt depends on reference-module content.
///
/// A prompt needs a reference when it shares a content word (length >= 4)
/// with some module that never appears in the core text. This is a cheap
/// containment check, not a semantic one, but it is deterministic and errs
/// toward `core_only`, which only makes the gate stricter to pass via
/// module loading.
pub fn infer_kind(prompt: &str, optimized: &OptimizedSkill) -> TaskKind {
    let core_words = content_words(&optimized.core);
    let prompt_words = content_words(prompt);
    for module in &optimized.reference_modules {
        let module_words = content_words(&module.content);
        if prompt_words
            .iter()
            .any(|w| module_words.contains(w) && !core_words.contains(w))
        {
            return TaskKind::NeedsReference;
        }
    }
    TaskKind::CoreOnly
}

fn content_words(text: &str) -> HashSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.len() >= 4)
        .map(|w| w.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use skill_model::{ModuleOrigin, ReferenceModule};

    fn optimized_fixture() -> OptimizedSkill {
        OptimizedSkill {
            name: "demo".into(),
            description: "demo".into(),
            core: "Always validate the manifest before deployment.".into(),
            reference_modules: vec![ReferenceModule {
                path: "references/rollback.md".into(),
                content: "Rollback procedure: drain traffic, restore the previous snapshot."
                    .into(),
                when_clause: "you need the rollback procedure".into(),
                topics: vec!["rollback".into(), "snapshot".into(), "traffic".into()],
                origin: ModuleOrigin::External,
            }],
            provenance: vec![],
            extra_frontmatter: vec![],
        }
    }

    #[test]
    fn prompt_touching_module_only_words_needs_reference() {
        let optimized = optimized_fixture();
        assert_eq!(
            infer_kind("How do I restore the previous snapshot?", &optimized),
            TaskKind::NeedsReference
        );
    }

    #[test]
    fn prompt_covered_by_core_stays_core_only() {
        let optimized = optimized_fixture();
        assert_eq!(
            infer_kind("When must the manifest be validated?", &optimized),
            TaskKind::CoreOnly
        );
    }

    #[test]
    fn contract_rejects_code_task_without_verifier() {
        let task = EvalTask {
            prompt: "write a config".into(),
            kind: TaskKind::CoreOnly,
            scoring: ScoringKind::CodeExecution,
            rubric: vec![],
            verifier: None,
        };
        assert!(task.contract_violation().is_some());
    }
}
