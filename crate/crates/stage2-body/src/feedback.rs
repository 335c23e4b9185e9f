//! Retention-driven feedback loop: promote non-core items back into the core
//! until the task-retention gate passes or the iteration budget runs out.

use serde::{Deserialize, Serialize};
use skill_model::{OptimizedSkill, Skill};

use crate::classify::{ContentItem, ContentLabel};
use crate::error::Stage2Error;

/// Upper bound on promotion rounds.
pub const MAX_FEEDBACK_ITERATIONS: usize = 2;

/// Result of one full retention evaluation of a candidate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate2Outcome {
    /// True when every task retained its full baseline score.
    pub pass: bool,
    pub mean_retention: f64,
    pub per_task_retention: Vec<f64>,
    /// Rubric criteria that the compressed layout failed; drives promotion.
    pub failed_criteria: Vec<String>,
}

/// One promotion round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub iteration: u32,
    pub failed_criteria: Vec<String>,
    pub promoted_items: Vec<usize>,
    pub retention_after: f64,
}

/// External retention evaluator. The body pipeline never talks to the task
/// harness directly; the embedding binary supplies an implementation (or
/// [`NoGate2`] when none is configured).
pub trait Gate2Runner {
    fn available(&self) -> bool {
        true
    }

    /// Scores the optimized layout against the original skill. Errors are
    /// reported as strings because the evaluator lives behind this trait
    /// boundary; the pipeline downgrades them to an unscored run.
    fn run(&mut self, original: &Skill, optimized: &OptimizedSkill) -> Result<Gate2Outcome, String>;
}

/// Placeholder runner for pipelines without a retention evaluator.
pub struct NoGate2;

impl Gate2Runner for NoGate2 {
    fn available(&self) -> bool {
        false
    }

    fn run(&mut self, _: &Skill, _: &OptimizedSkill) -> Result<Gate2Outcome, String> {
        Err("no retention evaluator configured".into())
    }
}

/// Final state of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackState {
    pub core: String,
    /// Every promoted item index, in promotion order.
    pub promoted: Vec<usize>,
    pub records: Vec<FeedbackRecord>,
    /// Outcome of the last evaluation that ran.
    pub outcome: Gate2Outcome,
}

/// Drives the promotion loop over abstract evaluation and selection hooks.
///
/// Each iteration appends the selected non-core items to the core verbatim
/// (the core only grows, so the faithfulness gate needs no re-run) and
/// re-evaluates. The loop stops on a pass, after `max_iterations` rounds, or
/// when no non-core items remain; on persistent failure the returned state is
/// the version with the most promoted items, which under monotone growth is
/// simply the last one.
pub fn drive_feedback<G, S>(
    initial_core: String,
    items: &[ContentItem],
    mut evaluate: G,
    mut select: S,
    max_iterations: usize,
) -> Result<FeedbackState, Stage2Error>
where
    G: FnMut(&str, &[usize]) -> Result<Gate2Outcome, Stage2Error>,
    S: FnMut(&[String], &[&ContentItem]) -> Result<Vec<usize>, Stage2Error>,
{
    let mut core = initial_core;
    let mut promoted: Vec<usize> = Vec::new();
    let mut records = Vec::new();
    let mut outcome = evaluate(&core, &promoted)?;

    for iteration in 1..=max_iterations {
        if outcome.pass {
            break;
        }
        let candidates: Vec<&ContentItem> = items
            .iter()
            .filter(|item| item.label != ContentLabel::CoreRule && !promoted.contains(&item.index))
            .collect();
        if candidates.is_empty() {
            break;
        }

        let mut chosen: Vec<usize> = select(&outcome.failed_criteria, &candidates)?
            .into_iter()
            .filter(|index| candidates.iter().any(|item| item.index == *index))
            .collect();
        chosen.sort_unstable();
        chosen.dedup();
        if chosen.is_empty() {
            // Last resort: promote the longest remaining item.
            let longest = candidates
                .iter()
                .max_by_key(|item| (item.text.len(), std::cmp::Reverse(item.index)))
                .expect("candidates checked non-empty");
            chosen.push(longest.index);
        }

        for index in &chosen {
            let item = items.iter().find(|i| i.index == *index).expect("validated above");
            if !core.is_empty() {
                core.push_str("\n\n");
            }
            core.push_str(&item.text);
        }
        promoted.extend(chosen.iter().copied());

        let failed_before = std::mem::take(&mut outcome.failed_criteria);
        outcome = evaluate(&core, &promoted)?;
        records.push(FeedbackRecord {
            iteration: iteration as u32,
            failed_criteria: failed_before,
            promoted_items: chosen,
            retention_after: outcome.mean_retention,
        });
    }

    Ok(FeedbackState { core, promoted, records, outcome })
}
