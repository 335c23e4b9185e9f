//! The task-retention gate: run every task under all three conditions,
//! score them, and decide pass/fail from per-task retention.

use serde::{Deserialize, Serialize};
use skill_model::{OptimizedSkill, Skill, Tokenizer};

use crate::condition::{run_condition, Condition, ConditionRun};
use crate::error::EvalError;
use crate::retention::retention;
use crate::score::{score_response, ScoreOutcome};
use crate::task::{EvalTask, ScoringKind};
use crate::transcript::TranscriptEvent;
use llm_gateway::{Gateway, GatewayError};

/// Score of one (task, condition) run. `value: None` marks a run that could
/// not be scored or executed; such tasks are excluded from averages and make
/// the gate inconclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskScore {
    pub condition: Condition,
    pub value: Option<f64>,
    pub tool_calls: usize,
    pub loaded_refs: Vec<String>,
    pub injected_tokens: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub transcript: Vec<TranscriptEvent>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: EvalTask,
    pub d: TaskScore,
    pub a: TaskScore,
    pub c: TaskScore,
    /// `None` when the baseline or compressed run is unscored.
    pub retention: Option<f64>,
    /// Criteria the compressed-condition answer failed (rubric tasks only).
    pub failed_criteria: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateReport {
    pub skill: String,
    pub tasks: Vec<TaskResult>,
    /// All tasks scored and every retention is 1.0.
    pub pass: bool,
    /// Every condition of every task scored a perfect 1.0.
    pub ceiling: bool,
    /// Mean compressed score strictly above the mean inline baseline.
    pub improvement: bool,
    /// Some task could not be scored; treated as a failure for feedback.
    pub inconclusive: bool,
    pub mean_retention: f64,
    pub mean_score_a: f64,
    pub mean_score_c: f64,
    /// What to feed back on failure: unmet rubric criteria and the prompts
    /// of failing code or unscored tasks. Non-empty whenever `pass` is false.
    pub failed_criteria: Vec<String>,
}

fn run_and_score(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    task: &EvalTask,
    condition: Condition,
    skill: &Skill,
    optimized: &OptimizedSkill,
) -> Result<(TaskScore, Vec<String>), EvalError> {
    let run = match run_condition(gateway, tokenizer, task, condition, skill, optimized) {
        Ok(run) => run,
        Err(EvalError::Gateway(GatewayError::FailedAfterRetries { last_error, .. })) => {
            log::warn!("condition {condition} run failed; task left unscored: {last_error}");
            return Ok((
                TaskScore {
                    condition,
                    value: None,
                    tool_calls: 0,
                    loaded_refs: Vec::new(),
                    injected_tokens: 0,
                    diagnostic: Some(format!("agent run failed: {last_error}")),
                    transcript: Vec::new(),
                },
                Vec::new(),
            ));
        }
        Err(other) => return Err(other),
    };
    let ConditionRun {
        transcript,
        final_answer,
        tool_calls,
        loaded_refs,
        injected_tokens,
        ..
    } = run;
    let ScoreOutcome {
        value,
        unsatisfied,
        diagnostic,
    } = score_response(gateway, task, &final_answer)?;
    Ok((
        TaskScore {
            condition,
            value,
            tool_calls,
            loaded_refs,
            injected_tokens,
            diagnostic,
            transcript,
        },
        unsatisfied,
    ))
}

/// Execute the full gate for one skill over an already-generated task set.
pub fn gate2(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    skill: &Skill,
    optimized: &OptimizedSkill,
    tasks: &[EvalTask],
) -> Result<GateReport, EvalError> {
    let mut results = Vec::with_capacity(tasks.len());
    for task in tasks {
        let (d, _) = run_and_score(gateway, tokenizer, task, Condition::D, skill, optimized)?;
        let (a, _) = run_and_score(gateway, tokenizer, task, Condition::A, skill, optimized)?;
        let (c, unsatisfied_c) =
            run_and_score(gateway, tokenizer, task, Condition::C, skill, optimized)?;
        let task_retention = match (a.value, c.value) {
            (Some(score_a), Some(score_c)) => Some(retention(score_a, score_c)),
            _ => None,
        };
        results.push(TaskResult {
            task: task.clone(),
            d,
            a,
            c,
            retention: task_retention,
            failed_criteria: unsatisfied_c,
        });
    }

    let inconclusive = results.iter().any(|r| r.retention.is_none());
    let pass = !inconclusive && results.iter().all(|r| r.retention == Some(1.0));
    let ceiling = results.iter().all(|r| {
        [&r.d, &r.a, &r.c]
            .iter()
            .all(|score| score.value == Some(1.0))
    });
    let mean_score_a = mean(results.iter().filter_map(|r| r.a.value));
    let mean_score_c = mean(results.iter().filter_map(|r| r.c.value));
    let mean_retention = mean(results.iter().filter_map(|r| r.retention));
    let improvement = mean_score_c > mean_score_a;

    let mut failed_criteria = Vec::new();
    for result in &results {
        match result.retention {
            Some(r) if r < 1.0 => {
                if result.task.scoring == ScoringKind::Rubric && !result.failed_criteria.is_empty()
                {
                    failed_criteria.extend(result.failed_criteria.iter().cloned());
                } else {
                    failed_criteria.push(result.task.prompt.clone());
                }
            }
            None => failed_criteria.push(format!("unscored: {}", result.task.prompt)),
            _ => {}
        }
    }

    Ok(GateReport {
        skill: skill.name.clone(),
        tasks: results,
        pass,
        ceiling,
        improvement,
        inconclusive,
        mean_retention,
        mean_score_a,
        mean_score_c,
        failed_criteria,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        return 0.0;
    }
    collected.iter().sum::<f64>() / collected.len() as f64
}
