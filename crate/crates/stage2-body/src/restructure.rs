//! End-to-end body restructuring: classify, compress, deduplicate, annotate,
//! gate, and iterate on retention feedback.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::{Deserialize, Serialize};
use skill_model::{ModuleOrigin, OptimizedSkill, ReferenceModule, Skill, Tokenizer};
use std::collections::BTreeMap;

use crate::annotate::annotate_module;
use crate::classify::{classify_items, cross_validate, ClassifiedBody, ContentItem, ContentLabel};
use crate::compress::compress_by_type;
use crate::dedup::{dedup_reference, DedupedReference, MIN_MODULE_TOKENS};
use crate::error::Stage2Error;
use crate::feedback::{drive_feedback, FeedbackRecord, Gate2Runner, MAX_FEEDBACK_ITERATIONS};
use crate::gate1::{gate1_check, Gate1Report};
use crate::prompts;
use crate::segment::segment_body;

/// Knobs for one restructuring run.
#[derive(Debug, Clone)]
pub struct Stage2Config {
    /// Extra neighbour-aware classification passes (corpus analysis only).
    pub cross_validate_rounds: u32,
    pub max_feedback_iterations: usize,
    /// Disclosure-hop floor for emitted modules; values below the shared
    /// module contract of 30 tokens are treated as 30.
    pub min_module_tokens: usize,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Stage2Config {
            cross_validate_rounds: 0,
            max_feedback_iterations: MAX_FEEDBACK_ITERATIONS,
            min_module_tokens: MIN_MODULE_TOKENS,
        }
    }
}

/// Whether the retention gate ran and what it concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate2Status {
    Pass,
    Fail,
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate2Summary {
    pub status: Gate2Status,
    pub mean_retention: Option<f64>,
    pub per_task_retention: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleReport {
    pub path: String,
    pub tokens: usize,
    pub when: String,
    pub topics: Vec<String>,
    pub origin: String,
}

/// Machine-readable summary of one restructuring run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Report {
    pub skill: String,
    pub core_tokens_before: usize,
    pub core_tokens_after: usize,
    /// 1 − final core tokens / original body tokens.
    pub compression_ratio: f64,
    pub modules: Vec<ModuleReport>,
    pub gate1: Gate1Report,
    pub gate2: Gate2Summary,
    pub feedback: Vec<FeedbackRecord>,
}

/// The optimized layout plus its report and the labeled items that produced
/// it (promotion updates included), which corpus analysis reuses.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Run {
    pub optimized: OptimizedSkill,
    pub report: Stage2Report,
    pub items: ClassifiedBody,
}

#[derive(Deserialize)]
struct PromoteReply {
    items: Vec<usize>,
}

/// Restructures `skill.body` into an always-loaded core plus on-demand
/// reference modules, then validates the result through the faithfulness
/// gate and — when a runner is supplied — the retention gate with its
/// promotion feedback loop. `description` is the routing description to
/// embed in the output (typically the one produced by description
/// compression; pass the original to leave it untouched).
pub fn restructure_with_feedback(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    skill: &Skill,
    description: &str,
    runner: &mut dyn Gate2Runner,
    config: &Stage2Config,
) -> Result<Stage2Run, Stage2Error> {
    let items = segment_body(&skill.body);
    if items.is_empty() {
        return Err(Stage2Error::EmptyBody(skill.name.clone()));
    }

    let mut classified = classify_items(gateway, items)?;
    if config.cross_validate_rounds > 0 {
        cross_validate(gateway, &mut classified, config.cross_validate_rounds)?;
    }
    let mut provenance = vec![classification_note(&classified)];

    // --- Type-specific compression ---
    let typed = compress_by_type(gateway, tokenizer, &classified)?;
    let core_items_input = classified.joined_of(ContentLabel::CoreRule);
    let mut merged_core = typed.core_text.clone();
    if typed.core_fallback {
        provenance.push(format!(
            "core: merge rejected, {} core items kept verbatim",
            classified.texts_of(ContentLabel::CoreRule).len()
        ));
    } else if !core_items_input.is_empty() {
        provenance.push(format!(
            "core: merged core items {} -> {} tokens",
            tokenizer.count(&core_items_input),
            tokenizer.count(&merged_core)
        ));
    }

    // Body-derived module candidates; outputs under the module threshold are
    // folded back into the core verbatim instead of becoming modules.
    let mut folded: Vec<String> = Vec::new();
    let mut body_modules: Vec<(ContentLabel, ModuleOrigin, String)> = Vec::new();
    for (label, origin, module) in [
        (ContentLabel::Example, ModuleOrigin::BodyDerivedExamples, &typed.examples),
        (ContentLabel::Template, ModuleOrigin::BodyDerivedTemplates, &typed.templates),
        (ContentLabel::Background, ModuleOrigin::BodyDerivedBackground, &typed.background),
    ] {
        let Some(module) = module else { continue };
        let module_floor = config.min_module_tokens.max(MIN_MODULE_TOKENS);
        if tokenizer.count(&module.text) < module_floor {
            let original = classified.joined_of(label);
            provenance.push(format!(
                "{label}: output below {module_floor} tokens, folded into core verbatim"
            ));
            folded.push(original);
            continue;
        }
        if module.fallback {
            provenance.push(format!("{label}: compression rejected, items kept verbatim"));
        } else {
            provenance.push(format!(
                "{label}: compressed {} -> {} tokens",
                tokenizer.count(&classified.joined_of(label)),
                tokenizer.count(&module.text)
            ));
        }
        body_modules.push((label, origin, module.text.clone()));
    }

    // --- External reference deduplication ---
    let mut external: Vec<(String, String)> = Vec::new();
    for reference in &skill.references {
        match dedup_reference(gateway, tokenizer, reference, &skill.body, config.min_module_tokens)? {
            DedupedReference::Compressed(text) => {
                provenance.push(format!(
                    "reference {}: deduplicated {} -> {} tokens",
                    reference.path,
                    tokenizer.count(&reference.text),
                    tokenizer.count(&text)
                ));
                external.push((reference.path.clone(), text));
            }
            DedupedReference::Verbatim(text) => {
                provenance.push(format!("reference {}: kept verbatim", reference.path));
                external.push((reference.path.clone(), text));
            }
            DedupedReference::Discarded => {
                provenance.push(format!(
                    "reference {}: discarded (covered by the body)",
                    reference.path
                ));
            }
        }
    }

    // --- Annotation ---
    let mut modules: Vec<ReferenceModule> = Vec::new();
    let mut module_labels: Vec<Option<ContentLabel>> = Vec::new();
    for (label, origin, text) in body_modules {
        let path = derived_module_path(label, &external);
        modules.push(annotate_module(gateway, &path, text, origin)?);
        module_labels.push(Some(label));
    }
    for (path, text) in external {
        modules.push(annotate_module(gateway, &path, text, ModuleOrigin::External)?);
        module_labels.push(None);
    }

    // --- Gate 1: per-type concept containment ---
    let mut originals_by_type = BTreeMap::new();
    for label in ContentLabel::PRESERVED {
        originals_by_type.insert(label, classified.joined_of(label));
    }
    let core_before_gate = assemble_core(&merged_core, &folded);
    let contents: Vec<&str> = modules.iter().map(|m| m.content.as_str()).collect();
    let mut gate1 = gate1_check(gateway, &originals_by_type, &core_before_gate, &contents)?;
    for label in ContentLabel::PRESERVED {
        if gate1.per_type.get(label.as_str()).copied().unwrap_or(true) {
            continue;
        }
        gate1.rolled_back.push(label.as_str().to_string());
        match label {
            ContentLabel::CoreRule => {
                merged_core = originals_by_type[&label].clone();
            }
            _ => {
                let verbatim = originals_by_type[&label].clone();
                for (module, module_label) in modules.iter_mut().zip(&module_labels) {
                    if *module_label == Some(label) {
                        module.content = verbatim.clone();
                    }
                }
            }
        }
    }
    if gate1.rolled_back.is_empty() {
        provenance.push("gate1: all types preserved".to_string());
    } else {
        provenance.push(format!("gate1: rolled back {}", gate1.rolled_back.join(", ")));
    }

    for module in &modules {
        module.validate(tokenizer).map_err(Stage2Error::InvalidModule)?;
    }

    let initial_core = assemble_core(&merged_core, &folded);

    // --- Gate 2 with promotion feedback ---
    let build = |core: &str, provenance: Vec<String>| OptimizedSkill {
        name: skill.name.clone(),
        description: description.to_string(),
        core: core.to_string(),
        reference_modules: modules.clone(),
        provenance,
        extra_frontmatter: skill.extra_frontmatter.clone(),
    };

    let gate2_result = if runner.available() {
        let outcome = drive_feedback(
            initial_core.clone(),
            &classified.items,
            |core, _promoted| {
                let candidate = build(core, Vec::new());
                runner
                    .run(skill, &candidate)
                    .map_err(Stage2Error::RetentionCheck)
            },
            |failed, candidates| select_promotions(gateway, failed, candidates),
            config.max_feedback_iterations,
        );
        match outcome {
            Ok(state) => Some(state),
            Err(Stage2Error::RetentionCheck(reason)) => {
                log::warn!("retention gate unavailable for `{}`: {reason}", skill.name);
                None
            }
            Err(err) => return Err(err),
        }
    } else {
        None
    };

    let (final_core, feedback, gate2) = match gate2_result {
        Some(state) => {
            for index in &state.promoted {
                if let Some(item) = classified.items.iter_mut().find(|i| i.index == *index) {
                    item.promoted = true;
                    item.label = ContentLabel::CoreRule;
                }
            }
            for record in &state.records {
                provenance.push(format!(
                    "feedback iteration {}: promoted items {:?}",
                    record.iteration, record.promoted_items
                ));
            }
            let status = if state.outcome.pass { Gate2Status::Pass } else { Gate2Status::Fail };
            provenance.push(format!("gate2: {}", status_name(status)));
            let summary = Gate2Summary {
                status,
                mean_retention: Some(state.outcome.mean_retention),
                per_task_retention: state.outcome.per_task_retention.clone(),
            };
            (state.core, state.records, summary)
        }
        None => {
            provenance.push("gate2: not_run".to_string());
            let summary = Gate2Summary {
                status: Gate2Status::NotRun,
                mean_retention: None,
                per_task_retention: Vec::new(),
            };
            (initial_core, Vec::new(), summary)
        }
    };

    let core_tokens_before = tokenizer.count(&skill.body);
    let core_tokens_after = tokenizer.count(&final_core);
    let compression_ratio = if core_tokens_before > 0 {
        1.0 - core_tokens_after as f64 / core_tokens_before as f64
    } else {
        0.0
    };

    let module_reports = modules
        .iter()
        .map(|module| ModuleReport {
            path: module.path.clone(),
            tokens: tokenizer.count(&module.content),
            when: module.when_clause.clone(),
            topics: module.topics.clone(),
            origin: module.origin.to_string(),
        })
        .collect();

    let optimized = build(&final_core, provenance);
    let report = Stage2Report {
        skill: skill.name.clone(),
        core_tokens_before,
        core_tokens_after,
        compression_ratio,
        modules: module_reports,
        gate1,
        gate2,
        feedback,
    };
    Ok(Stage2Run { optimized, report, items: classified })
}

fn status_name(status: Gate2Status) -> &'static str {
    match status {
        Gate2Status::Pass => "pass",
        Gate2Status::Fail => "fail",
        Gate2Status::NotRun => "not_run",
    }
}

fn assemble_core(merged: &str, folded: &[String]) -> String {
    let mut sections: Vec<&str> = Vec::new();
    if !merged.trim().is_empty() {
        sections.push(merged);
    }
    sections.extend(folded.iter().map(String::as_str).filter(|s| !s.trim().is_empty()));
    sections.join("\n\n")
}

fn classification_note(classified: &ClassifiedBody) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for item in &classified.items {
        *counts.entry(item.label.as_str()).or_insert(0) += 1;
    }
    let breakdown = counts
        .iter()
        .map(|(label, count)| format!("{count} {label}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "classified {} items ({} round{}): {breakdown}",
        classified.items.len(),
        classified.round,
        if classified.round == 1 { "" } else { "s" }
    )
}

/// Body-derived modules live next to deduplicated references; avoid clashing
/// with an external file of the same name.
fn derived_module_path(label: ContentLabel, external: &[(String, String)]) -> String {
    let stem = match label {
        ContentLabel::Example => "examples",
        ContentLabel::Template => "templates",
        ContentLabel::Background => "background",
        _ => unreachable!("only module-bearing labels have paths"),
    };
    let plain = format!("references/{stem}.md");
    if external.iter().all(|(path, _)| path != &plain) {
        plain
    } else {
        format!("references/derived-{stem}.md")
    }
}

fn select_promotions(
    gateway: &Gateway,
    failed_criteria: &[String],
    candidates: &[&ContentItem],
) -> Result<Vec<usize>, Stage2Error> {
    let listing: Vec<(usize, &str)> =
        candidates.iter().map(|item| (item.index, item.text.as_str())).collect();
    let request = CompletionRequest::new(
        ModelRole::Compressor,
        prompts::PROMOTE_SYSTEM,
        prompts::promote_user(failed_criteria, &listing),
    )
    .with_schema(prompts::PROMOTE_SCHEMA);
    match gateway.complete_structured::<PromoteReply>(&request) {
        Ok(reply) => Ok(reply.items),
        // An unusable selection falls back to the longest-item rule upstream.
        Err(GatewayError::FailedAfterRetries { .. }) => Ok(Vec::new()),
        Err(err) => Err(err.into()),
    }
}
