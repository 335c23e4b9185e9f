//! Content-type classification of segmented body items.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::prompts;

/// Attempts per item before falling back to the conservative default label.
pub const CLASSIFY_ATTEMPTS: usize = 3;

/// The five-category content taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentLabel {
    CoreRule,
    Background,
    Example,
    Template,
    Redundant,
}

impl ContentLabel {
    /// The four labels whose content must survive compression; `Redundant`
    /// is excluded because dropping it is the point.
    pub const PRESERVED: [ContentLabel; 4] = [
        ContentLabel::CoreRule,
        ContentLabel::Background,
        ContentLabel::Example,
        ContentLabel::Template,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ContentLabel::CoreRule => "core_rule",
            ContentLabel::Background => "background",
            ContentLabel::Example => "example",
            ContentLabel::Template => "template",
            ContentLabel::Redundant => "redundant",
        }
    }
}

impl fmt::Display for ContentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContentLabel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "core_rule" => Ok(ContentLabel::CoreRule),
            "background" => Ok(ContentLabel::Background),
            "example" => Ok(ContentLabel::Example),
            "template" => Ok(ContentLabel::Template),
            "redundant" => Ok(ContentLabel::Redundant),
            _ => Err(()),
        }
    }
}

/// One paragraph-level item with its assigned label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentItem {
    pub index: usize,
    pub text: String,
    pub label: ContentLabel,
    /// Set when the feedback loop moved this item back into the core; the
    /// text is then guaranteed to appear verbatim in the final core.
    pub promoted: bool,
}

/// A fully labeled body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedBody {
    pub items: Vec<ContentItem>,
    /// Classification rounds performed (1 = initial pass only).
    pub round: u32,
}

impl ClassifiedBody {
    /// Texts of all items carrying `label`, in body order.
    pub fn texts_of(&self, label: ContentLabel) -> Vec<&str> {
        self.items
            .iter()
            .filter(|item| item.label == label)
            .map(|item| item.text.as_str())
            .collect()
    }

    /// Items-of-type joined the same way they appeared in the body.
    pub fn joined_of(&self, label: ContentLabel) -> String {
        self.texts_of(label).join("\n\n")
    }
}

#[derive(Deserialize)]
struct LabelReply {
    label: String,
}

fn ask_label(gateway: &Gateway, user: String) -> Result<Option<ContentLabel>, GatewayError> {
    let request = CompletionRequest::new(ModelRole::Compressor, prompts::CLASSIFY_SYSTEM, user)
        .with_schema(prompts::CLASSIFY_SCHEMA);
    match gateway.complete_structured::<LabelReply>(&request) {
        Ok(reply) => Ok(ContentLabel::from_str(&reply.label).ok()),
        Err(GatewayError::FailedAfterRetries { .. }) => Ok(None),
        Err(err) => Err(err),
    }
}

/// Labels every item. A per-item failure (transport exhaustion or an
/// unparseable label on all attempts) defaults that item to `core_rule`, the
/// conservative choice that keeps its text always loaded.
pub fn classify_items(gateway: &Gateway, items: Vec<String>) -> Result<ClassifiedBody, GatewayError> {
    let mut labeled = Vec::with_capacity(items.len());
    for (index, text) in items.into_iter().enumerate() {
        let mut label = None;
        for attempt in 1..=CLASSIFY_ATTEMPTS {
            label = ask_label(gateway, prompts::classify_user(&text, attempt))?;
            if label.is_some() {
                break;
            }
        }
        let label = label.unwrap_or_else(|| {
            log::warn!("item {index} could not be classified; defaulting to core_rule");
            ContentLabel::CoreRule
        });
        labeled.push(ContentItem { index, text, label, promoted: false });
    }
    Ok(ClassifiedBody { items: labeled, round: 1 })
}

/// Re-evaluates each label in the context of its neighbours' labels, up to
/// `rounds` extra passes, stopping early once a pass changes nothing. Used by
/// corpus analysis; the optimization pipeline keeps the single-pass labels.
pub fn cross_validate(
    gateway: &Gateway,
    body: &mut ClassifiedBody,
    rounds: u32,
) -> Result<(), GatewayError> {
    for _ in 0..rounds {
        let snapshot: Vec<(String, ContentLabel)> = body
            .items
            .iter()
            .map(|item| (item.text.clone(), item.label))
            .collect();
        let mut changed = false;
        for i in 0..body.items.len() {
            let prev = i
                .checked_sub(1)
                .map(|p| (snapshot[p].0.as_str(), snapshot[p].1.as_str()));
            let next = snapshot
                .get(i + 1)
                .map(|(text, label)| (text.as_str(), label.as_str()));
            let user = prompts::cross_validate_user(&snapshot[i].0, prev, next);
            if let Some(label) = ask_label(gateway, user)? {
                if label != body.items[i].label {
                    body.items[i].label = label;
                    changed = true;
                }
            }
        }
        body.round += 1;
        if !changed {
            break;
        }
    }
    Ok(())
}
