//! Prompt pack for the description-compression stage. Templates are
//! compiled in and versioned as a unit: any wording change must bump
//! [`PROMPT_PACK_VERSION`] so recorded fixture stores are invalidated
//! (request digests cover the rendered prompt text).

pub const PROMPT_PACK_VERSION: &str = "s1-2024.1";

/// Splits a routing description into independently deletable clauses.
pub const SEGMENT_SYSTEM: &str = "You split skill routing descriptions into minimal \
self-contained clauses. Each clause must be a contiguous span of the original text, \
reproduced verbatim. Respond with JSON only.";

pub fn segment_user(description: &str) -> String {
    format!(
        "Split the following routing description into clauses. Every clause must \
appear verbatim in the original text, cover a single capability or trigger \
condition, and the clauses must be listed in original order.\n\n\
Description:\n{description}\n\n\
Respond with JSON: {{\"clauses\": [\"...\", ...]}}"
    )
}

pub const SEGMENT_SCHEMA: &str = r#"{"clauses": ["string"]}"#;

/// Rewrites one clause more compactly without changing what it routes.
pub const PARAPHRASE_SYSTEM: &str = "You compress individual clauses of skill routing \
descriptions. Preserve every capability claim and trigger keyword; cut filler words. \
Respond with JSON only.";

pub fn paraphrase_user(clause: &str) -> String {
    format!(
        "Rewrite this clause using fewer tokens while keeping its routing meaning \
intact. Keep domain keywords; drop hedges and connective filler.\n\n\
Clause:\n{clause}\n\n\
Respond with JSON: {{\"rewrite\": \"...\"}}"
    )
}

pub const PARAPHRASE_SCHEMA: &str = r#"{"rewrite": "string"}"#;

/// Final fluency pass over the assembled compressed description.
pub const POLISH_SYSTEM: &str = "You smooth concatenated clause fragments into one \
fluent skill routing description without adding or removing capability claims. \
Respond with JSON only.";

pub fn polish_user(description: &str) -> String {
    format!(
        "Smooth this fragment sequence into a single fluent description. Do not \
introduce new claims and do not drop keywords; only fix grammar and joins.\n\n\
Fragments:\n{description}\n\n\
Respond with JSON: {{\"polished\": \"...\"}}"
    )
}

pub const POLISH_SCHEMA: &str = r#"{"polished": "string"}"#;

/// Produces the user-query set the routing oracle replays.
pub const QUERY_SYSTEM: &str = "You write realistic user requests that should cause an \
agent to invoke a given skill. Vary phrasing, specificity, and vocabulary. Respond \
with JSON only.";

pub fn query_user(skill_name: &str, description: &str, k: usize) -> String {
    format!(
        "Write {k} distinct user requests that a capable agent should route to the \
skill below. Cover different sub-capabilities and phrasings; at least one request \
must avoid the skill's own headline keywords.\n\n\
Skill: {skill_name}\nDescription: {description}\n\n\
Respond with JSON: {{\"queries\": [\"...\", ...]}}"
    )
}

pub const QUERY_SCHEMA: &str = r#"{"queries": ["string"]}"#;

/// Simulated routing decision over a fixed candidate pool.
pub const ORACLE_SYSTEM: &str = "You are an agent's skill router. Given a user request \
and a list of available skills, pick the single skill you would invoke, or \"none\". \
Respond with JSON only.";

pub fn oracle_user(query: &str, candidates: &[(String, String)]) -> String {
    let mut listing = String::new();
    for (name, description) in candidates {
        listing.push_str(&format!("- {name}: {description}\n"));
    }
    format!(
        "User request:\n{query}\n\nAvailable skills:\n{listing}\n\
Pick the one skill to invoke for this request, or \"none\" if nothing fits.\n\
Respond with JSON: {{\"skill\": \"...\"}}"
    )
}

pub const ORACLE_SCHEMA: &str = r#"{"skill": "string"}"#;

/// Hard-negative distractor: adjacent domain, non-overlapping capability.
pub const ADVERSARIAL_SYSTEM: &str = "You design decoy skill catalog entries. The decoy \
must sound plausible next to a target skill yet cover a genuinely different \
capability. Respond with JSON only.";

pub fn adversarial_user(skill_name: &str, description: &str) -> String {
    format!(
        "Invent one decoy skill adjacent to the target below: same broad domain, \
different capability. It must NOT be able to handle the target's core tasks and \
must use a different name.\n\n\
Target skill: {skill_name}\nTarget description: {description}\n\n\
Respond with JSON: {{\"name\": \"...\", \"description\": \"...\"}}"
    )
}

pub const ADVERSARIAL_SCHEMA: &str = r#"{"name": "string", "description": "string"}"#;

/// Generates a routing description from the skill body when none exists.
pub const GENERATE_SYSTEM: &str = "You write routing descriptions for agent skills by \
reading their instructions. A routing description tells a router when to invoke the \
skill. Respond with JSON only.";

pub fn generate_user(skill_name: &str, body_excerpt: &str) -> String {
    format!(
        "Read the skill content below and extract exactly 3 routing signals: \
distinct conditions under which an agent should invoke this skill. Each signal \
must be a standalone sentence of roughly 20 to 40 tokens naming concrete triggers \
(task types, file formats, user intents).\n\n\
Skill: {skill_name}\n---\n{body_excerpt}\n---\n\n\
Respond with JSON: {{\"signals\": [\"...\", \"...\", \"...\"]}}"
    )
}

pub const GENERATE_SCHEMA: &str = r#"{"signals": ["string", "string", "string"]}"#;
