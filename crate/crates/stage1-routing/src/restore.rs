//! Phase-2 validation and selective restore: check the compressed
//! description against a live agent, and when it under-triggers, greedily
//! re-insert deleted clauses (original text, original positions) until the
//! validated queries all route again or the step budget runs out.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use skill_model::Skill;

use crate::compress::CompressionOutcome;
use crate::error::Stage1Error;
use crate::queries::QuerySet;
use crate::trigger::TriggerAdapter;

/// Terminal state of one skill's description pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    /// Compressed description triggers every validated query.
    DirectPass,
    /// Compressed description needed 1–3 clause restores.
    Restored,
    /// Restores were not enough; original description kept verbatim.
    Fallback,
    /// The *original* description triggers nothing — the skill no longer
    /// routes at all and is flagged for removal, not compression.
    Obsolete,
    /// No agent runtime configured; phase 1 result is unvalidated.
    Unvalidated,
}

/// What phase 2 decided for one skill.
#[derive(Debug, Clone, PartialEq)]
pub struct RestoreResult {
    pub status: OutcomeStatus,
    pub final_description: String,
    /// Original texts of restored clauses, in restoration order.
    pub restored_units: Vec<String>,
}

/// Memoizes `(query, description)` trigger verdicts so greedy evaluation
/// never replays an identical agent run.
struct TriggerCache<'a> {
    adapter: &'a dyn TriggerAdapter,
    skill: &'a Skill,
    queries: &'a [String],
    verdicts: HashMap<(usize, String), bool>,
}

impl<'a> TriggerCache<'a> {
    fn new(adapter: &'a dyn TriggerAdapter, skill: &'a Skill, queries: &'a [String]) -> Self {
        TriggerCache {
            adapter,
            skill,
            queries,
            verdicts: HashMap::new(),
        }
    }

    fn check(&mut self, query_idx: usize, desc: &str) -> Result<bool, Stage1Error> {
        let key = (query_idx, desc.to_string());
        if let Some(&verdict) = self.verdicts.get(&key) {
            return Ok(verdict);
        }
        let verdict = self
            .adapter
            .trigger(&self.queries[query_idx], desc, self.skill)?;
        self.verdicts.insert(key, verdict);
        Ok(verdict)
    }

    /// How many of `validated` trigger under `desc`.
    fn rate(&mut self, validated: &[usize], desc: &str) -> Result<usize, Stage1Error> {
        let mut hits = 0;
        for &qi in validated {
            if self.check(qi, desc)? {
                hits += 1;
            }
        }
        Ok(hits)
    }
}

/// Runs phase 2 for one skill. `queries.validated_subset` is filled with
/// the indices that trigger under the original description.
pub fn validate_and_restore(
    adapter: &dyn TriggerAdapter,
    skill: &Skill,
    outcome: &CompressionOutcome,
    queries: &mut QuerySet,
    restore_cap: usize,
) -> Result<RestoreResult, Stage1Error> {
    let original = skill.description.as_str();
    let mut cache = TriggerCache::new(adapter, skill, &queries.queries);

    let mut validated = Vec::new();
    for qi in 0..queries.queries.len() {
        if cache.check(qi, original)? {
            validated.push(qi);
        }
    }
    queries.validated_subset = validated.clone();

    if validated.is_empty() {
        return Ok(RestoreResult {
            status: OutcomeStatus::Obsolete,
            final_description: original.to_string(),
            restored_units: Vec::new(),
        });
    }

    if cache.rate(&validated, &outcome.d_fast)? == validated.len() {
        return Ok(RestoreResult {
            status: OutcomeStatus::DirectPass,
            final_description: outcome.d_fast.clone(),
            restored_units: Vec::new(),
        });
    }

    // The polished text is not clause-decomposable, so restore works on
    // the pre-polish assembly: paraphrased kept clauses plus restored
    // originals, in original clause order.
    let mut kept_now = outcome.kept.clone();
    let mut restored_indices: Vec<usize> = Vec::new();
    let mut current_rate = cache.rate(&validated, &outcome.assemble(&kept_now))?;

    for _step in 0..restore_cap {
        let remaining: Vec<usize> = outcome
            .deleted()
            .into_iter()
            .filter(|i| !restored_indices.contains(i))
            .collect();
        if remaining.is_empty() {
            break;
        }

        // Ascending scan + strict improvement ⇒ rate ties resolve to the
        // earliest clause in original order.
        let mut best: Option<(usize, usize, String)> = None;
        for &unit in &remaining {
            let mut trial = kept_now.clone();
            trial.push(unit);
            trial.sort_unstable();
            let desc = outcome.assemble(&trial);
            let rate = cache.rate(&validated, &desc)?;
            if best.as_ref().map_or(true, |(r, _, _)| rate > *r) {
                best = Some((rate, unit, desc));
            }
        }
        let (best_rate, best_unit, best_desc) = best.expect("remaining is non-empty");

        if best_rate <= current_rate {
            // No candidate strictly helps; more steps cannot either.
            break;
        }
        kept_now.push(best_unit);
        kept_now.sort_unstable();
        restored_indices.push(best_unit);
        current_rate = best_rate;

        if current_rate == validated.len() {
            return Ok(RestoreResult {
                status: OutcomeStatus::Restored,
                final_description: best_desc,
                restored_units: restored_indices
                    .iter()
                    .map(|&i| outcome.units[i].clone())
                    .collect(),
            });
        }
    }

    Ok(RestoreResult {
        status: OutcomeStatus::Fallback,
        final_description: original.to_string(),
        restored_units: Vec::new(),
    })
}
