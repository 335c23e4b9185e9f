//! Token-cost accounting for skills.
//!
//! Three quantities matter operationally: the cost of invoking an original
//! skill (everything loads), the cost of invoking an optimized skill (core
//! always loads, references only when used), and the expected cost under a
//! probabilistic load model used to size savings before running anything.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SkillError;
use crate::skill::{OptimizedSkill, Skill};
use crate::tokenizer::Tokenizer;

/// Per-component token counts for one skill.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub description_tokens: usize,
    pub body_tokens: usize,
    pub per_reference_tokens: Vec<usize>,
    /// description + body + all references.
    pub total: usize,
}

impl CostBreakdown {
    pub fn references_total(&self) -> usize {
        self.per_reference_tokens.iter().sum()
    }

    /// Tokens that enter the context when the body and every reference are
    /// loaded — the figure reports quote as "total if all loaded".
    pub fn loaded_total(&self) -> usize {
        self.body_tokens + self.references_total()
    }
}

/// Cost of invoking an original skill: the description plus the body plus
/// every reference file (no on-demand structure exists yet).
pub fn invocation_cost(skill: &Skill, tokenizer: &Tokenizer) -> CostBreakdown {
    let description_tokens = tokenizer.count(&skill.description);
    let body_tokens = tokenizer.count(&skill.body);
    let per_reference_tokens: Vec<usize> = skill
        .references
        .iter()
        .map(|r| tokenizer.count(&r.text))
        .collect();
    let total = description_tokens + body_tokens + per_reference_tokens.iter().sum::<usize>();
    CostBreakdown {
        description_tokens,
        body_tokens,
        per_reference_tokens,
        total,
    }
}

/// Component counts for an optimized skill with every module loaded.
pub fn optimized_breakdown(skill: &OptimizedSkill, tokenizer: &Tokenizer) -> CostBreakdown {
    let description_tokens = tokenizer.count(&skill.description);
    let body_tokens = tokenizer.count(&skill.core);
    let per_reference_tokens: Vec<usize> = skill
        .reference_modules
        .iter()
        .map(|m| tokenizer.count(&m.content))
        .collect();
    let total = description_tokens + body_tokens + per_reference_tokens.iter().sum::<usize>();
    CostBreakdown {
        description_tokens,
        body_tokens,
        per_reference_tokens,
        total,
    }
}

/// Cost of invoking an optimized skill when the agent loads exactly
/// `used_refs` (module paths). Duplicates are counted once.
pub fn optimized_cost(
    skill: &OptimizedSkill,
    used_refs: &[&str],
    tokenizer: &Tokenizer,
) -> Result<usize, SkillError> {
    let used: BTreeSet<&str> = used_refs.iter().copied().collect();
    for path in &used {
        if !skill.reference_modules.iter().any(|m| m.path == *path) {
            return Err(SkillError::UnknownReference(path.to_string()));
        }
    }
    let mut cost = tokenizer.count(&skill.description) + tokenizer.count(&skill.core);
    for module in &skill.reference_modules {
        if used.contains(module.path.as_str()) {
            cost += tokenizer.count(&module.content);
        }
    }
    Ok(cost)
}

/// Parameters of the probabilistic load model: `rho` is the fraction of the
/// original body that is core content, `alpha` the compression applied to
/// that core, and `load_probs[j]` the probability that reference `j` is
/// loaded on a given invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParameters {
    pub rho: f64,
    pub alpha: f64,
    pub load_probs: Vec<f64>,
}

impl CostParameters {
    pub fn uniform(rho: f64, alpha: f64, p: f64, ref_count: usize) -> Self {
        CostParameters {
            rho,
            alpha,
            load_probs: vec![p; ref_count],
        }
    }

    pub fn ref_count(&self) -> usize {
        self.load_probs.len()
    }

    pub fn validate(&self) -> Result<(), SkillError> {
        if !(0.0..=1.0).contains(&self.rho) || !self.rho.is_finite() {
            return Err(SkillError::InvalidParameters(format!(
                "rho = {} outside [0, 1]",
                self.rho
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(SkillError::InvalidParameters(format!(
                "alpha = {} outside (0, 1]",
                self.alpha
            )));
        }
        for (j, p) in self.load_probs.iter().enumerate() {
            if !(0.0..=1.0).contains(p) || !p.is_finite() {
                return Err(SkillError::InvalidParameters(format!(
                    "load_probs[{j}] = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Expected invocation cost of an optimized skill:
///
/// ```text
/// E[cost] = |description| + alpha * rho * |original body| + sum_j p_j * |module_j|
/// ```
///
/// The middle term models the core as a compressed `rho` slice of the
/// original body; module sizes are measured from the actual content. The
/// result stays a real number — round only at display time.
pub fn expected_cost(
    skill: &OptimizedSkill,
    params: &CostParameters,
    original_body_tokens: usize,
    tokenizer: &Tokenizer,
) -> Result<f64, SkillError> {
    params.validate()?;
    if params.ref_count() != skill.reference_modules.len() {
        return Err(SkillError::InvalidParameters(format!(
            "{} load probabilities for {} reference modules",
            params.ref_count(),
            skill.reference_modules.len()
        )));
    }
    let mut cost = tokenizer.count(&skill.description) as f64
        + params.alpha * params.rho * original_body_tokens as f64;
    for (module, p) in skill.reference_modules.iter().zip(&params.load_probs) {
        cost += p * tokenizer.count(&module.content) as f64;
    }
    Ok(cost)
}

/// Expected cost with the measured core size instead of the `alpha * rho`
/// model — the two formulas agree when the parameters are back-solved from
/// the same skill.
pub fn expected_cost_with_actual_core(
    skill: &OptimizedSkill,
    load_probs: &[f64],
    tokenizer: &Tokenizer,
) -> Result<f64, SkillError> {
    if load_probs.len() != skill.reference_modules.len() {
        return Err(SkillError::InvalidParameters(format!(
            "{} load probabilities for {} reference modules",
            load_probs.len(),
            skill.reference_modules.len()
        )));
    }
    let mut cost =
        (tokenizer.count(&skill.description) + tokenizer.count(&skill.core)) as f64;
    for (module, p) in skill.reference_modules.iter().zip(load_probs) {
        if !(0.0..=1.0).contains(p) {
            return Err(SkillError::InvalidParameters(format!(
                "load probability {p} outside [0, 1]"
            )));
        }
        cost += p * tokenizer.count(&module.content) as f64;
    }
    Ok(cost)
}

/// Closed-form expected body-cost factor when references are uniformly
/// loaded with probability `p` and jointly hold the `(1 - rho)` remainder
/// of the body: `alpha * rho + p * (1 - rho)`. Multiply by the original
/// body size to get the expected body-related cost.
pub fn expected_body_factor(rho: f64, alpha: f64, p: f64) -> Result<f64, SkillError> {
    CostParameters::uniform(rho, alpha, p, 1).validate()?;
    Ok(alpha * rho + p * (1.0 - rho))
}

/// Percentage reduction implied by a body-cost factor.
pub fn reduction_percent(factor: f64) -> f64 {
    (1.0 - factor) * 100.0
}
