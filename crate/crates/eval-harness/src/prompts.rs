//! Prompt pack for the task harness: task generation, the evaluated agent
//! under each condition, and the rubric judge.

use skill_model::{OptimizedSkill, ReferenceModule, Skill};

pub const PROMPT_PACK_VERSION: &str = "ev-2024.1";

// --- Task generation ---

pub const TASKS_SYSTEM: &str = "You design evaluation tasks for an agent skill. Produce exactly \
five diverse tasks: about three answerable from the always-loaded core instructions alone and \
two that require material kept in the skill's reference files. For tasks with a mechanically \
checkable answer, set scoring to code_execution and write a standalone python verifier script \
that reads the submitted artifact path from sys.argv[1] and exits 0 on pass, 1 on fail. For \
open-ended tasks, set scoring to rubric and list 3-5 concrete criteria drawn from the skill's \
own instructions.";

pub const TASKS_SCHEMA: &str = r#"{"tasks": [{"prompt": "...", "kind": "core_only|needs_reference", "scoring": "code_execution|rubric", "rubric": ["criterion"], "verifier": "python source or null"}]}"#;

pub fn tasks_user(skill: &Skill, optimized: &OptimizedSkill, attempt: usize) -> String {
    let mut user = format!(
        "Skill `{}` — {}\n\nOriginal instructions:\n{}\n\nCompressed core:\n{}\n\nOn-demand modules:\n",
        skill.name, skill.description, skill.body, optimized.core
    );
    for module in &optimized.reference_modules {
        user.push_str(&format!("- {} (when {})\n", module.path, module.when_clause));
    }
    if attempt > 1 {
        user.push_str(&format!(
            "\nAttempt {attempt}: the previous task list violated the contract \
(exactly 5 tasks; verifier required for code_execution; non-empty rubric for rubric scoring)."
        ));
    }
    user
}

// --- The evaluated agent ---

pub const AGENT_BARE_SYSTEM: &str = "You are an agent solving one task. You have no additional \
reference material. Reply with JSON: {\"answer\": \"your final answer\"}. Put any code your \
answer needs inside the answer string as a fenced code block.";

pub const AGENT_INLINE_SYSTEM: &str = "You are an agent solving one task. The full skill \
instructions and every reference file are included in the request. Reply with JSON: \
{\"answer\": \"your final answer\"}. Put any code your answer needs inside the answer string \
as a fenced code block.";

pub const AGENT_ONDEMAND_SYSTEM: &str = "You are an agent solving one task. The always-loaded \
core instructions are included, and the listed reference modules can be fetched with a tool. \
Reply with JSON, one object per turn: {\"tool\": \"read_reference\", \"path\": \"<module path>\"} \
to fetch a module, or {\"answer\": \"your final answer\"} when done. You may fetch at most six \
modules. Put any code your answer needs inside the answer string as a fenced code block.";

pub const AGENT_ANSWER_SCHEMA: &str = r#"{"answer": "final answer text"}"#;
pub const AGENT_TURN_SCHEMA: &str =
    r#"{"tool": "read_reference", "path": "references/x.md"} | {"answer": "final answer text"}"#;

pub fn module_listing(modules: &[ReferenceModule]) -> String {
    let mut listing = String::from("Available reference modules:\n");
    for module in modules {
        listing.push_str(&format!(
            "- {} — load when {} (topics: {})\n",
            module.path,
            module.when_clause,
            module.topics.join(", ")
        ));
    }
    listing
}

// --- Rubric judging ---

pub const JUDGE_SYSTEM: &str = "You judge whether an answer satisfies each criterion of a \
rubric. Be strict: a criterion counts only when the answer clearly meets it. Reply with JSON \
containing one boolean per criterion, in order.";

pub const JUDGE_SCHEMA: &str = r#"{"satisfied": [true, false]}"#;

pub fn judge_user(prompt: &str, criteria: &[String], answer: &str, attempt: usize) -> String {
    let mut user = format!("Task:\n{prompt}\n\nRubric:\n");
    for (i, criterion) in criteria.iter().enumerate() {
        user.push_str(&format!("{}. {criterion}\n", i + 1));
    }
    user.push_str(&format!("\nAnswer under judgment:\n{answer}"));
    if attempt > 1 {
        user.push_str(&format!(
            "\n\nAttempt {attempt}: reply with exactly {} booleans in order.",
            criteria.len()
        ));
    }
    user
}
