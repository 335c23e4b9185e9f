//! Description generation for skills whose routing description is missing
//! or too short to compress: extract three routing signals from the body,
//! validate them against the simulated oracle, keep the best of three
//! attempts.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;
use skill_model::{Skill, Tokenizer};

use crate::error::Stage1Error;
use crate::oracle::RoutingOracle;
use crate::prompts;

const GENERATION_ATTEMPTS: usize = 3;
const SIGNAL_MIN_TOKENS: usize = 20;
const SIGNAL_MAX_TOKENS: usize = 40;
const BODY_EXCERPT_BYTES: usize = 4_000;

#[derive(Debug, Clone)]
pub struct GenerationResult {
    pub description: String,
    /// Set when no attempt routed every query; the best attempt (or a
    /// naive body extract) was kept anyway.
    pub low_confidence: bool,
}

#[derive(Deserialize)]
struct GenerateReply {
    signals: Vec<String>,
}

/// Produces a three-signal routing description from the skill body. An
/// attempt is usable only when it has exactly three signals of 20–40
/// tokens each; a usable attempt that routes every query is accepted
/// outright, otherwise the highest-scoring attempt wins with a
/// low-confidence flag.
pub fn generate_description(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    oracle: &RoutingOracle<'_>,
    skill: &Skill,
) -> Result<GenerationResult, Stage1Error> {
    let excerpt = body_excerpt(&skill.body);
    let mut best: Option<(usize, String)> = None;
    let mut last_rejection = String::new();

    for attempt in 1..=GENERATION_ATTEMPTS {
        let mut user = prompts::generate_user(&skill.name, &excerpt);
        if attempt > 1 {
            // Distinct prompt per attempt: a verbatim re-ask would replay
            // the identical response under recorded fixtures.
            user.push_str(&format!(
                "\n\nAttempt {attempt}: the previous signals were rejected ({last_rejection}). \
Write three different signals."
            ));
        }
        let request = CompletionRequest::new(ModelRole::Compressor, prompts::GENERATE_SYSTEM, user)
            .with_schema(prompts::GENERATE_SCHEMA);

        let reply: GenerateReply = match gateway.complete_structured(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { .. }) => {
                last_rejection = "unparseable reply".into();
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        let signals: Vec<String> = reply
            .signals
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if let Err(reason) = check_signals(tokenizer, &signals) {
            log::debug!("generation attempt {attempt} rejected: {reason}");
            last_rejection = reason;
            continue;
        }

        let candidate = signals.join(" ");
        let score = oracle.pass_count(&candidate)?;
        if score == oracle.query_count() {
            return Ok(GenerationResult {
                description: candidate,
                low_confidence: false,
            });
        }
        last_rejection = format!("routed only {score}/{} queries", oracle.query_count());
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }

    match best {
        Some((score, description)) => {
            log::warn!(
                "{}: keeping best generated description ({score}/{} queries)",
                skill.name,
                oracle.query_count()
            );
            Ok(GenerationResult {
                description,
                low_confidence: true,
            })
        }
        None => Ok(GenerationResult {
            description: naive_description(skill),
            low_confidence: true,
        }),
    }
}

fn check_signals(tokenizer: &Tokenizer, signals: &[String]) -> Result<(), String> {
    if signals.len() != 3 {
        return Err(format!("expected 3 signals, got {}", signals.len()));
    }
    for (i, signal) in signals.iter().enumerate() {
        let tokens = tokenizer.count(signal);
        if !(SIGNAL_MIN_TOKENS..=SIGNAL_MAX_TOKENS).contains(&tokens) {
            return Err(format!(
                "signal {} is {tokens} tokens (allowed {SIGNAL_MIN_TOKENS}–{SIGNAL_MAX_TOKENS})",
                i + 1
            ));
        }
    }
    Ok(())
}

/// Last resort when every attempt was unusable: lead text of the body.
fn naive_description(skill: &Skill) -> String {
    let lead: String = skill
        .body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .take(2)
        .collect::<Vec<_>>()
        .join(" ");
    let lead = lead.chars().take(200).collect::<String>();
    if lead.is_empty() {
        format!("Instructions for {} tasks.", skill.name)
    } else {
        lead
    }
}

fn body_excerpt(body: &str) -> String {
    if body.len() <= BODY_EXCERPT_BYTES {
        return body.to_string();
    }
    let mut end = BODY_EXCERPT_BYTES;
    while !body.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}…", &body[..end])
}
