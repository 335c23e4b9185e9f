//! Scoring a finished condition run.
//!
//! Code-execution tasks extract the final code artifact from the answer and
//! run the task's verifier in the sandbox; the score is binary. Rubric tasks
//! ask the judge model which criteria the answer satisfies; the score is the
//! satisfied fraction. A judge that cannot produce a usable verdict leaves
//! the task unscored rather than inventing a number.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;

use crate::error::EvalError;
use crate::prompts;
use crate::sandbox::run_verifier;
use crate::task::{EvalTask, ScoringKind};

const JUDGE_ATTEMPTS: usize = 2;

/// Result of scoring one answer. `value: None` means the task could not be
/// scored (judge failure) and must be excluded from averages.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutcome {
    pub value: Option<f64>,
    /// Rubric criteria the answer failed, in rubric order.
    pub unsatisfied: Vec<String>,
    /// Abnormal-end note from the sandbox, if any.
    pub diagnostic: Option<String>,
}

#[derive(Deserialize)]
struct JudgeReply {
    satisfied: Vec<bool>,
}

/// The artifact a verifier should check: the last fenced code block of the
/// answer, or the whole answer when no fence is present.
pub fn extract_artifact(answer: &str) -> String {
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in answer.lines() {
        if line.trim_start().starts_with("```") {
            match current.take() {
                Some(block) => blocks.push(block),
                None => current = Some(String::new()),
            }
            continue;
        }
        if let Some(block) = current.as_mut() {
            block.push_str(line);
            block.push('\n');
        }
    }
    match blocks.pop() {
        Some(block) => block,
        None => answer.trim().to_string(),
    }
}

/// Score `answer` for `task`.
pub fn score_response(
    gateway: &Gateway,
    task: &EvalTask,
    answer: &str,
) -> Result<ScoreOutcome, EvalError> {
    match task.scoring {
        ScoringKind::CodeExecution => {
            let verifier = task
                .verifier
                .as_deref()
                .expect("validated code_execution task carries a verifier");
            let artifact = extract_artifact(answer);
            let outcome = run_verifier(verifier, &artifact)?;
            Ok(ScoreOutcome {
                value: Some(if outcome.passed { 1.0 } else { 0.0 }),
                unsatisfied: Vec::new(),
                diagnostic: outcome.diagnostic,
            })
        }
        ScoringKind::Rubric => judge_rubric(gateway, task, answer),
    }
}

fn judge_rubric(gateway: &Gateway, task: &EvalTask, answer: &str) -> Result<ScoreOutcome, EvalError> {
    for attempt in 1..=JUDGE_ATTEMPTS {
        let request = CompletionRequest::new(
            ModelRole::Judge,
            prompts::JUDGE_SYSTEM,
            &prompts::judge_user(&task.prompt, &task.rubric, answer, attempt),
        )
        .with_schema(prompts::JUDGE_SCHEMA);
        let reply: JudgeReply = match gateway.complete_structured(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { .. }) => continue,
            Err(other) => return Err(other.into()),
        };
        if reply.satisfied.len() != task.rubric.len() {
            continue;
        }
        let satisfied = reply.satisfied.iter().filter(|s| **s).count();
        let unsatisfied = task
            .rubric
            .iter()
            .zip(&reply.satisfied)
            .filter(|(_, ok)| !**ok)
            .map(|(criterion, _)| criterion.clone())
            .collect();
        return Ok(ScoreOutcome {
            value: Some(satisfied as f64 / task.rubric.len() as f64),
            unsatisfied,
            diagnostic: None,
        });
    }
    log::warn!(
        "judge produced no usable verdict after {JUDGE_ATTEMPTS} attempts; task left unscored"
    );
    Ok(ScoreOutcome {
        value: None,
        unsatisfied: Vec::new(),
        diagnostic: Some("judge produced no usable verdict".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artifact_is_last_fenced_block() {
        let answer = "First draft:\n```python\nx = 1\n```\nFinal:\n```python\nx = 2\n```\ndone";
        assert_eq!(extract_artifact(answer), "x = 2\n");
    }

    #[test]
    fn unfenced_answer_is_its_own_artifact() {
        assert_eq!(extract_artifact("  plain text  "), "plain text");
    }

    #[test]
    fn unterminated_fence_falls_back_to_whole_answer() {
        let answer = "```python\nx = 1";
        assert_eq!(extract_artifact(answer), answer.trim());
    }
}
