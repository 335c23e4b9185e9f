//! End-to-end description pipeline for one skill: query generation, pool
//! assembly, (optional) description generation, fast compression, and
//! real-agent validation with selective restore.

use serde::{Deserialize, Serialize};
use skill_model::{Skill, Tokenizer};

use llm_gateway::Gateway;

use crate::compress::compress_description;
use crate::error::Stage1Error;
use crate::generate::generate_description;
use crate::oracle::RoutingOracle;
use crate::pool::build_pool;
use crate::queries::generate_queries;
use crate::restore::{validate_and_restore, OutcomeStatus, RestoreResult};
use crate::stubs::SkillStub;
use crate::trigger::TriggerAdapter;

#[derive(Debug, Clone)]
pub struct Stage1Config {
    /// Queries per skill (the oracle conjunction width).
    pub k_queries: usize,
    /// Descriptions at or below this token count take the generation path.
    pub desc_threshold_tokens: usize,
    /// Maximum greedy restore steps in phase 2.
    pub restore_cap: usize,
    /// Oracle trials per query; >1 demands consistency across shuffles.
    pub oracle_repetitions: usize,
    /// Base seed for per-query candidate shuffles.
    pub base_seed: u64,
}

impl Default for Stage1Config {
    fn default() -> Self {
        Stage1Config {
            k_queries: 6,
            desc_threshold_tokens: 40,
            restore_cap: 3,
            oracle_repetitions: 1,
            base_seed: 0x5105_71fe,
        }
    }
}

/// Metrics and status for one skill's description pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stage1Report {
    pub skill: String,
    pub status: OutcomeStatus,
    pub original_tokens: usize,
    pub final_tokens: usize,
    /// Reduction fraction relative to the original description; 0 when
    /// there was no original to compare against (generation path).
    pub compression_ratio: f64,
    pub restored_units: Vec<String>,
    pub oracle_calls: usize,
    /// The description was generated from the body rather than compressed
    /// from an existing one.
    pub generated: bool,
    /// Generation never satisfied the oracle; best attempt kept.
    pub low_confidence: bool,
    /// The oracle rejected the original description, so compression was
    /// skipped and the original kept.
    pub oracle_unroutable: bool,
}

/// Pipeline output: the description to ship plus its report.
#[derive(Debug, Clone)]
pub struct Stage1Run {
    pub final_description: String,
    pub report: Stage1Report,
}

/// Runs the full description pipeline for one skill against a library of
/// sibling stubs (for distractor ranking).
pub fn run_stage1(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    adapter: &dyn TriggerAdapter,
    skill: &Skill,
    library: &[SkillStub],
    config: &Stage1Config,
) -> Result<Stage1Run, Stage1Error> {
    let original_tokens = tokenizer.count(&skill.description);

    let mut queries = generate_queries(gateway, skill, config.k_queries)?;
    let target_stub = SkillStub::new(&skill.name, &skill.description);
    let pool = build_pool(gateway, &target_stub, library, config.base_seed)?;
    let oracle = RoutingOracle::new(gateway, &pool, &queries.queries, config.oracle_repetitions);

    // Baseline: the description compression starts from and falls back to.
    let mut generated = false;
    let mut low_confidence = false;
    let baseline = if original_tokens <= config.desc_threshold_tokens {
        let result = generate_description(gateway, tokenizer, &oracle, skill)?;
        generated = true;
        low_confidence = result.low_confidence;
        result.description
    } else {
        skill.description.clone()
    };

    let outcome = compress_description(gateway, tokenizer, &oracle, &baseline)?;
    let oracle_calls = oracle.trials();
    drop(oracle);

    let restore = if !adapter.available() {
        RestoreResult {
            status: OutcomeStatus::Unvalidated,
            final_description: outcome.d_fast.clone(),
            restored_units: Vec::new(),
        }
    } else {
        // Phase 2 validates against the baseline description — on the
        // generation path the generated text plays the original's part
        // (there is no usable original to fall back to).
        let baseline_skill = Skill {
            description: baseline.clone(),
            ..skill.clone()
        };
        validate_and_restore(
            adapter,
            &baseline_skill,
            &outcome,
            &mut queries,
            config.restore_cap,
        )?
    };

    let final_tokens = tokenizer.count(&restore.final_description);
    let compression_ratio = if original_tokens > 0 {
        1.0 - final_tokens as f64 / original_tokens as f64
    } else {
        0.0
    };

    Ok(Stage1Run {
        final_description: restore.final_description.clone(),
        report: Stage1Report {
            skill: skill.name.clone(),
            status: restore.status,
            original_tokens,
            final_tokens,
            compression_ratio,
            restored_units: restore.restored_units,
            oracle_calls,
            generated,
            low_confidence,
            oracle_unroutable: outcome.oracle_unroutable,
        },
    })
}
