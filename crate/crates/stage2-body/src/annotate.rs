//! When-clause and topic annotation of reference modules.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;
use skill_model::{ModuleOrigin, ReferenceModule};
use std::collections::HashMap;

use crate::prompts;

pub const MIN_TOPICS: usize = 3;
pub const MAX_TOPICS: usize = 5;

const ANNOTATE_ATTEMPTS: usize = 2;

#[derive(Deserialize)]
struct AnnotationReply {
    when: String,
    topics: Vec<String>,
}

/// Produces the routing metadata for one module: a one-sentence trigger
/// condition and 3–5 topic keywords. Constraint violations are retried once;
/// after that the topics are repaired from the module's own highest-frequency
/// content words and the when-clause falls back to a generic trigger.
pub fn annotate_module(
    gateway: &Gateway,
    path: &str,
    content: String,
    origin: ModuleOrigin,
) -> Result<ReferenceModule, GatewayError> {
    let mut best: Option<AnnotationReply> = None;
    for attempt in 1..=ANNOTATE_ATTEMPTS {
        let request = CompletionRequest::new(
            ModelRole::Compressor,
            prompts::ANNOTATE_SYSTEM,
            prompts::annotate_user(path, &content, attempt),
        )
        .with_schema(prompts::ANNOTATE_SCHEMA);
        let reply = match gateway.complete_structured::<AnnotationReply>(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { .. }) => break,
            Err(err) => return Err(err),
        };
        let clean = clean_topics(&reply.topics);
        if !reply.when.trim().is_empty() && (MIN_TOPICS..=MAX_TOPICS).contains(&clean.len()) {
            return Ok(ReferenceModule {
                path: path.to_string(),
                content,
                when_clause: reply.when.trim().to_string(),
                topics: clean,
                origin,
            });
        }
        best = Some(reply);
    }

    let (when, provided) = match best {
        Some(reply) => (reply.when.trim().to_string(), clean_topics(&reply.topics)),
        None => (String::new(), Vec::new()),
    };
    let when = if when.is_empty() {
        format!("you need the details kept in {path}")
    } else {
        when
    };
    let topics = repair_topics(provided, &content, path);
    Ok(ReferenceModule { path: path.to_string(), content, when_clause: when, topics, origin })
}

fn clean_topics(topics: &[String]) -> Vec<String> {
    let mut seen = Vec::new();
    for topic in topics {
        let t = topic.trim().to_lowercase();
        if !t.is_empty() && !seen.contains(&t) {
            seen.push(t);
        }
    }
    seen
}

/// Truncates to the maximum or pads to the minimum with the highest-frequency
/// content words of the module itself, so every repaired topic still appears
/// in the content.
fn repair_topics(mut topics: Vec<String>, content: &str, path: &str) -> Vec<String> {
    topics.truncate(MAX_TOPICS);
    if topics.len() >= MIN_TOPICS {
        return topics;
    }
    for word in top_content_words(content, &topics) {
        topics.push(word);
        if topics.len() >= MIN_TOPICS {
            return topics;
        }
    }
    // Degenerate content (e.g. one word repeated): fall back to path words.
    for word in path.split(|c: char| !c.is_alphanumeric()) {
        let w = word.to_lowercase();
        if w.len() >= 2 && !topics.contains(&w) {
            topics.push(w);
            if topics.len() >= MIN_TOPICS {
                return topics;
            }
        }
    }
    while topics.len() < MIN_TOPICS {
        topics.push(format!("reference-{}", topics.len() + 1));
    }
    topics
}

fn top_content_words(content: &str, exclude: &[String]) -> Vec<String> {
    let mut counts: HashMap<String, (usize, usize)> = HashMap::new();
    for (position, word) in content
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.len() >= 3 && w.chars().any(|c| c.is_alphabetic()))
        .enumerate()
    {
        let w = word.to_lowercase();
        let entry = counts.entry(w).or_insert((0, position));
        entry.0 += 1;
    }
    let mut ranked: Vec<(String, (usize, usize))> = counts
        .into_iter()
        .filter(|(word, _)| !exclude.contains(word))
        .collect();
    ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    ranked.into_iter().map(|(word, _)| word).collect()
}
