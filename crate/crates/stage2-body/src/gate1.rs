//! Faithfulness gate: per-type concept containment between the original body
//! and the compressed core-plus-modules layout.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::classify::ContentLabel;
use crate::prompts;

/// Verdicts for the four preserved content types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate1Report {
    /// `true` means the type's concepts all survived compression.
    pub per_type: BTreeMap<String, bool>,
    /// Types whose compressed form was replaced by the original items.
    pub rolled_back: Vec<String>,
}

impl Gate1Report {
    pub fn all_passed(&self) -> bool {
        self.per_type.values().all(|pass| *pass)
    }
}

#[derive(Deserialize)]
struct ConceptsReply {
    concepts: Vec<String>,
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn extract_concepts(
    gateway: &Gateway,
    label: ContentLabel,
    text: &str,
) -> Result<Option<BTreeSet<String>>, GatewayError> {
    let request = CompletionRequest::new(
        ModelRole::Compressor,
        prompts::CONCEPTS_SYSTEM,
        prompts::concepts_user(label.as_str(), text),
    )
    .with_schema(prompts::CONCEPTS_SCHEMA);
    match gateway.complete_structured::<ConceptsReply>(&request) {
        Ok(reply) => Ok(Some(
            reply
                .concepts
                .iter()
                .map(|c| normalize(c))
                .filter(|c| !c.is_empty())
                .collect(),
        )),
        Err(GatewayError::FailedAfterRetries { .. }) => Ok(None),
        Err(err) => Err(err),
    }
}

/// Checks, for each preserved content type, that every key operational
/// concept of the original items is still present somewhere in the core or
/// the modules. A concept counts as present when the extractor finds it on
/// the compressed side or when it occurs verbatim in the compressed text.
/// Extractor failure marks the type as failing, the conservative reading.
pub fn gate1_check(
    gateway: &Gateway,
    originals_by_type: &BTreeMap<ContentLabel, String>,
    core: &str,
    module_contents: &[&str],
) -> Result<Gate1Report, GatewayError> {
    let mut compressed_corpus = normalize(core);
    for content in module_contents {
        compressed_corpus.push(' ');
        compressed_corpus.push_str(&normalize(content));
    }

    let mut per_type = BTreeMap::new();
    for label in ContentLabel::PRESERVED {
        let original = originals_by_type.get(&label).map(String::as_str).unwrap_or("");
        if original.trim().is_empty() {
            per_type.insert(label.as_str().to_string(), true);
            continue;
        }
        // Verbatim survival needs no extraction: rolled-in or fallback text
        // trivially preserves its own concepts.
        if compressed_corpus.contains(&normalize(original)) {
            per_type.insert(label.as_str().to_string(), true);
            continue;
        }
        let pass = match check_type(gateway, label, original, core, module_contents, &compressed_corpus)? {
            Some(pass) => pass,
            None => {
                log::warn!("concept extraction failed for {label}; marking the type as failing");
                false
            }
        };
        per_type.insert(label.as_str().to_string(), pass);
    }
    Ok(Gate1Report { per_type, rolled_back: Vec::new() })
}

fn check_type(
    gateway: &Gateway,
    label: ContentLabel,
    original: &str,
    core: &str,
    module_contents: &[&str],
    compressed_corpus: &str,
) -> Result<Option<bool>, GatewayError> {
    let Some(required) = extract_concepts(gateway, label, original)? else {
        return Ok(None);
    };
    if required.is_empty() {
        return Ok(Some(true));
    }

    let mut preserved: BTreeSet<String> = BTreeSet::new();
    for text in std::iter::once(core).chain(module_contents.iter().copied()) {
        if text.trim().is_empty() {
            continue;
        }
        let Some(found) = extract_concepts(gateway, label, text)? else {
            return Ok(None);
        };
        preserved.extend(found);
    }

    Ok(Some(required.iter().all(|concept| {
        preserved.contains(concept) || compressed_corpus.contains(concept.as_str())
    })))
}
