//! Type-specific compression of classified body items.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;
use skill_model::Tokenizer;

use crate::classify::{ClassifiedBody, ContentLabel};
use crate::numerals::{all_numerals_kept, no_invented_numerals};
use crate::prompts;

/// One compression attempt plus one retry before the verbatim fallback.
const COMPRESS_ATTEMPTS: usize = 2;

/// Compressed text for one body-derived module type.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleText {
    pub text: String,
    /// True when the compressor could not beat the input and the original
    /// items were kept verbatim instead.
    pub fallback: bool,
}

/// Output of the per-type compression step.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedCompression {
    pub core_text: String,
    /// True when the merged core was rejected and the original core items
    /// were kept verbatim.
    pub core_fallback: bool,
    pub examples: Option<ModuleText>,
    pub templates: Option<ModuleText>,
    pub background: Option<ModuleText>,
}

#[derive(Deserialize)]
struct CoreReply {
    core: String,
}

#[derive(Deserialize)]
struct ExamplesReply {
    examples_module: String,
}

#[derive(Deserialize)]
struct TemplatesReply {
    templates_module: String,
}

#[derive(Deserialize)]
struct BackgroundReply {
    background_module: String,
}

fn strictly_shorter(tokenizer: &Tokenizer, candidate: &str, input: &str) -> bool {
    !candidate.trim().is_empty() && tokenizer.count(candidate) < tokenizer.count(input)
}

/// Runs one rewrite kind with a single retry; `Ok(None)` means both attempts
/// were rejected (or the model gave up) and the caller should keep the input.
fn attempt_rewrite<'a, F>(
    gateway: &Gateway,
    input: &str,
    mut build: F,
) -> Result<Option<String>, GatewayError>
where
    F: FnMut(usize, Option<&str>) -> (CompletionRequest, RewriteKind<'a>),
{
    let mut violation: Option<String> = None;
    for attempt in 1..=COMPRESS_ATTEMPTS {
        let (request, kind) = build(attempt, violation.as_deref());
        let candidate = match kind.extract(gateway, &request) {
            Ok(text) => text,
            Err(GatewayError::FailedAfterRetries { .. }) => return Ok(None),
            Err(err) => return Err(err),
        };
        match kind.validate(&candidate, input) {
            Ok(()) => return Ok(Some(candidate)),
            Err(reason) => violation = Some(reason),
        }
    }
    Ok(None)
}

/// Which structured reply to read and which acceptance rule to apply.
struct RewriteKind<'a> {
    field: RewriteField,
    tokenizer: &'a Tokenizer,
    check_numerals: bool,
}

enum RewriteField {
    Core,
    Examples,
    Templates,
    Background,
}

impl RewriteKind<'_> {
    fn extract(&self, gateway: &Gateway, request: &CompletionRequest) -> Result<String, GatewayError> {
        Ok(match self.field {
            RewriteField::Core => gateway.complete_structured::<CoreReply>(request)?.core,
            RewriteField::Examples => {
                gateway.complete_structured::<ExamplesReply>(request)?.examples_module
            }
            RewriteField::Templates => {
                gateway.complete_structured::<TemplatesReply>(request)?.templates_module
            }
            RewriteField::Background => {
                gateway.complete_structured::<BackgroundReply>(request)?.background_module
            }
        })
    }

    fn validate(&self, candidate: &str, input: &str) -> Result<(), String> {
        if !strictly_shorter(self.tokenizer, candidate, input) {
            return Err("the previous version was not shorter than the input".into());
        }
        if self.check_numerals {
            if !no_invented_numerals(input, candidate) {
                return Err("the previous version introduced a number absent from the input".into());
            }
            if !all_numerals_kept(input, candidate) {
                return Err("the previous version dropped a number present in the input".into());
            }
        }
        Ok(())
    }
}

/// Compresses each content type with its own strategy: core rules are merged
/// into bullets, examples grouped by concept, templates deduplicated,
/// background summarized with its factual claims intact, and redundant items
/// dropped. Any rewrite that fails its acceptance rule twice falls back to
/// the original items verbatim.
pub fn compress_by_type(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    body: &ClassifiedBody,
) -> Result<TypedCompression, GatewayError> {
    let core_input = body.joined_of(ContentLabel::CoreRule);
    let (core_text, core_fallback) = if core_input.is_empty() {
        (String::new(), false)
    } else {
        let merged = attempt_rewrite(gateway, &core_input, |attempt, _| {
            let request = CompletionRequest::new(
                ModelRole::Compressor,
                prompts::CORE_MERGE_SYSTEM,
                prompts::core_merge_user(&core_input, attempt),
            )
            .with_schema(prompts::CORE_MERGE_SCHEMA);
            (
                request,
                RewriteKind { field: RewriteField::Core, tokenizer, check_numerals: false },
            )
        })?;
        match merged {
            Some(text) => (text, false),
            None => {
                log::warn!("core merge not accepted; keeping core items verbatim");
                (core_input.clone(), true)
            }
        }
    };

    let examples = compress_module(gateway, tokenizer, body, ContentLabel::Example)?;
    let templates = compress_module(gateway, tokenizer, body, ContentLabel::Template)?;
    let background = compress_module(gateway, tokenizer, body, ContentLabel::Background)?;

    Ok(TypedCompression { core_text, core_fallback, examples, templates, background })
}

fn compress_module(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    body: &ClassifiedBody,
    label: ContentLabel,
) -> Result<Option<ModuleText>, GatewayError> {
    let input = body.joined_of(label);
    if input.is_empty() {
        return Ok(None);
    }
    let rewritten = attempt_rewrite(gateway, &input, |attempt, violation| {
        let (system, user, schema, field) = match label {
            ContentLabel::Example => (
                prompts::EXAMPLES_SYSTEM,
                prompts::examples_user(&input, attempt),
                prompts::EXAMPLES_SCHEMA,
                RewriteField::Examples,
            ),
            ContentLabel::Template => (
                prompts::TEMPLATES_SYSTEM,
                prompts::templates_user(&input, attempt),
                prompts::TEMPLATES_SCHEMA,
                RewriteField::Templates,
            ),
            ContentLabel::Background => (
                prompts::BACKGROUND_SYSTEM,
                prompts::background_user(&input, attempt, violation),
                prompts::BACKGROUND_SCHEMA,
                RewriteField::Background,
            ),
            _ => unreachable!("only module-bearing labels reach compress_module"),
        };
        let request =
            CompletionRequest::new(ModelRole::Compressor, system, user).with_schema(schema);
        (
            request,
            RewriteKind { field, tokenizer, check_numerals: label == ContentLabel::Background },
        )
    })?;
    Ok(Some(match rewritten {
        Some(text) => ModuleText { text, fallback: false },
        None => {
            log::warn!("{label} compression not accepted; keeping items verbatim");
            ModuleText { text: input, fallback: true }
        }
    }))
}
