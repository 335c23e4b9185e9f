//! Prompt pack for the body-restructuring pipeline.
//!
//! Every model interaction in this crate goes through one of these templates.
//! The pack is versioned so recorded fixtures can be invalidated wholesale
//! when wording changes.

pub const PROMPT_PACK_VERSION: &str = "s2-2024.1";

// --- Item classification ---

pub const CLASSIFY_SYSTEM: &str = "You label one content item taken from an agent skill body. \
Reply with exactly one label: core_rule (an instruction the agent must always follow), \
background (context, rationale, or overview prose), example (a worked sample or demonstration), \
template (boilerplate meant to be copied and filled in), or redundant (duplicates other items \
or adds nothing operational).";

pub const CLASSIFY_SCHEMA: &str = r#"{"label": "core_rule"}"#;

pub fn classify_user(item: &str, attempt: usize) -> String {
    let mut user = format!("Label this item:\n\n{item}");
    if attempt > 1 {
        user.push_str(&format!(
            "\n\nAttempt {attempt}: the previous reply was not one of the five labels. \
Reply with exactly one of: core_rule, background, example, template, redundant."
        ));
    }
    user
}

pub fn cross_validate_user(item: &str, prev: Option<(&str, &str)>, next: Option<(&str, &str)>) -> String {
    let mut user = String::from("Re-check the label of the middle item given its neighbours.\n");
    if let Some((text, label)) = prev {
        user.push_str(&format!("\nPrevious item (labelled {label}):\n{text}\n"));
    }
    if let Some((text, label)) = next {
        user.push_str(&format!("\nNext item (labelled {label}):\n{text}\n"));
    }
    user.push_str(&format!("\nItem to re-label:\n\n{item}"));
    user
}

// --- Type-specific compression ---

pub const CORE_MERGE_SYSTEM: &str = "You merge the core rules of an agent skill into a compact \
list of bullet points, grouping semantically similar rules and regenerating short section \
headings where they help. Preserve every obligation and constraint; remove only repetition \
and filler. The result must be strictly shorter than the input.";

pub const CORE_MERGE_SCHEMA: &str = r#"{"core": "merged bullet-point rules"}"#;

pub fn core_merge_user(core_items: &str, attempt: usize) -> String {
    let mut user = format!("Merge these core rules:\n\n{core_items}");
    if attempt > 1 {
        user.push_str(&format!(
            "\n\nAttempt {attempt}: the previous merge was not shorter than the input. \
Compress harder without dropping any obligation."
        ));
    }
    user
}

pub const EXAMPLES_SYSTEM: &str = "You condense the examples of an agent skill. Group the \
examples by the concept they demonstrate and keep only the most representative example per \
concept, stripping comments and boilerplate.";

pub const EXAMPLES_SCHEMA: &str = r#"{"examples_module": "condensed examples"}"#;

pub fn examples_user(items: &str, attempt: usize) -> String {
    let mut user = format!("Condense these examples:\n\n{items}");
    if attempt > 1 {
        user.push_str(&format!(
            "\n\nAttempt {attempt}: the previous version was not shorter than the input."
        ));
    }
    user
}

pub const TEMPLATES_SYSTEM: &str = "You deduplicate the templates of an agent skill. Merge \
templates that cover the same concept, keeping one canonical copy of each; preserve every \
placeholder and field name exactly.";

pub const TEMPLATES_SCHEMA: &str = r#"{"templates_module": "deduplicated templates"}"#;

pub fn templates_user(items: &str, attempt: usize) -> String {
    let mut user = format!("Deduplicate these templates:\n\n{items}");
    if attempt > 1 {
        user.push_str(&format!(
            "\n\nAttempt {attempt}: the previous version was not shorter than the input."
        ));
    }
    user
}

pub const BACKGROUND_SYSTEM: &str = "You summarize the background material of an agent skill. \
Preserve every unique factual claim — numbers, thresholds, endpoints, names — and drop only \
narrative padding. Never introduce a number that is not in the input.";

pub const BACKGROUND_SCHEMA: &str = r#"{"background_module": "summary"}"#;

pub fn background_user(items: &str, attempt: usize, violation: Option<&str>) -> String {
    let mut user = format!("Summarize this background material:\n\n{items}");
    if attempt > 1 {
        let reason = violation.unwrap_or("the previous version was not shorter than the input");
        user.push_str(&format!("\n\nAttempt {attempt}: {reason}."));
    }
    user
}

// --- Reference deduplication ---

pub const DEDUP_SYSTEM: &str = "You shrink a reference file that accompanies an agent skill. \
Remove every concept already covered by the skill body, then compress what remains. Keep all \
unique facts and numbers from the reference; never introduce new numbers. If everything in \
the reference is already covered, return an empty string.";

pub const DEDUP_SCHEMA: &str = r#"{"deduplicated": "reduced reference text"}"#;

pub fn dedup_user(body: &str, ref_path: &str, ref_text: &str, attempt: usize, violation: Option<&str>) -> String {
    let mut user = format!(
        "Skill body (already always loaded):\n\n{body}\n\n---\n\nReference `{ref_path}`:\n\n{ref_text}"
    );
    if attempt > 1 {
        let reason = violation.unwrap_or("the previous version was unusable");
        user.push_str(&format!("\n\nAttempt {attempt}: {reason}."));
    }
    user
}

// --- Module annotation ---

pub const ANNOTATE_SYSTEM: &str = "You annotate an on-demand reference module for an agent. \
Write `when` as a single sentence describing the trigger condition under which the agent \
should load this module, and give 3 to 5 topic keywords that each appear in or are directly \
entailed by the module content.";

pub const ANNOTATE_SCHEMA: &str = r#"{"when": "you need to ...", "topics": ["keyword"]}"#;

pub fn annotate_user(path: &str, content: &str, attempt: usize) -> String {
    let mut user = format!("Annotate the module `{path}`:\n\n{content}");
    if attempt > 1 {
        user.push_str(&format!(
            "\n\nAttempt {attempt}: the previous reply violated the constraints \
(one-sentence when, 3-5 topics)."
        ));
    }
    user
}

// --- Faithfulness concept extraction ---

pub const CONCEPTS_SYSTEM: &str = "You extract the key operational concepts of one content \
type from a text: the distinct rules, facts, samples, or structures an agent would need to \
act on that type of content. Reply with short noun phrases, one per concept, no commentary.";

pub const CONCEPTS_SCHEMA: &str = r#"{"concepts": ["concept phrase"]}"#;

pub fn concepts_user(type_name: &str, text: &str) -> String {
    format!("List the key operational concepts of type `{type_name}` in this text:\n\n{text}")
}

// --- Failed-criteria promotion mapping ---

pub const PROMOTE_SYSTEM: &str = "An agent skill failed some evaluation criteria after its \
body was compressed. You are shown the failed criteria and the content items that were moved \
out of the always-loaded core. Select the items whose absence most plausibly caused the \
failures; they will be promoted back into the core verbatim. Reply with their indices.";

pub const PROMOTE_SCHEMA: &str = r#"{"items": [0]}"#;

pub fn promote_user(failed_criteria: &[String], candidates: &[(usize, &str)]) -> String {
    let mut user = String::from("Failed criteria:\n");
    for criterion in failed_criteria {
        user.push_str(&format!("- {criterion}\n"));
    }
    user.push_str("\nNon-core items:\n");
    for (index, text) in candidates {
        user.push_str(&format!("\n[{index}]\n{text}\n"));
    }
    user
}
