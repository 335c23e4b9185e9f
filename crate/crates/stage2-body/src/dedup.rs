//! Deduplication of external reference files against the skill body.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;
use skill_model::{Reference, Tokenizer};

use crate::numerals::no_invented_numerals;
use crate::prompts;

/// Modules below this size are not worth a separate disclosure hop.
pub const MIN_MODULE_TOKENS: usize = 30;

const DEDUP_ATTEMPTS: usize = 2;

/// Outcome of deduplicating one reference against the body.
#[derive(Debug, Clone, PartialEq)]
pub enum DedupedReference {
    /// Body-overlapping concepts removed, remainder compressed.
    Compressed(String),
    /// The model gave up; the original text is kept untouched.
    Verbatim(String),
    /// The surviving text fell under the module threshold.
    Discarded,
}

#[derive(Deserialize)]
struct DedupReply {
    deduplicated: String,
}

/// Removes concepts already present in `body` from the reference and
/// compresses what remains. Numbers may be dropped along with overlapping
/// content but never invented; a reply that fabricates a numeral is retried
/// once and then discarded in favour of the verbatim text. `min_tokens` is
/// the disclosure-hop floor (at least [`MIN_MODULE_TOKENS`]); survivors
/// below it are discarded.
pub fn dedup_reference(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    reference: &Reference,
    body: &str,
    min_tokens: usize,
) -> Result<DedupedReference, GatewayError> {
    let mut violation: Option<String> = None;
    for attempt in 1..=DEDUP_ATTEMPTS {
        let request = CompletionRequest::new(
            ModelRole::Compressor,
            prompts::DEDUP_SYSTEM,
            prompts::dedup_user(body, &reference.path, &reference.text, attempt, violation.as_deref()),
        )
        .with_schema(prompts::DEDUP_SCHEMA);
        let reply = match gateway.complete_structured::<DedupReply>(&request) {
            Ok(reply) => reply.deduplicated,
            Err(GatewayError::FailedAfterRetries { .. }) => {
                log::warn!("dedup of `{}` failed; keeping the reference verbatim", reference.path);
                return Ok(finish(tokenizer, reference.text.clone(), true, min_tokens));
            }
            Err(err) => return Err(err),
        };
        if no_invented_numerals(&reference.text, &reply) {
            return Ok(finish(tokenizer, reply, false, min_tokens));
        }
        violation = Some("the previous version introduced a number absent from the reference".into());
    }
    log::warn!("dedup of `{}` kept inventing numerals; keeping the reference verbatim", reference.path);
    Ok(finish(tokenizer, reference.text.clone(), true, min_tokens))
}

fn finish(tokenizer: &Tokenizer, text: String, verbatim: bool, min_tokens: usize) -> DedupedReference {
    if tokenizer.count(&text) < min_tokens.max(MIN_MODULE_TOKENS) {
        DedupedReference::Discarded
    } else if verbatim {
        DedupedReference::Verbatim(text)
    } else {
        DedupedReference::Compressed(text)
    }
}
