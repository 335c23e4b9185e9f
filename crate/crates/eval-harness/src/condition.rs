//! Executing one task under one of the three context conditions.
//!
//! * `D` — the agent gets the task prompt and nothing else.
//! * `A` — the agent gets the original skill body plus every reference file
//!   inline with the prompt.
//! * `C` — the agent gets the compressed core plus a listing of on-demand
//!   modules, and may fetch module contents through a budgeted read tool.

use std::fmt;

use llm_gateway::{CompletionRequest, Gateway, ModelRole};
use serde::{Deserialize, Serialize};
use skill_model::{OptimizedSkill, Skill, Tokenizer};

use crate::error::EvalError;
use crate::prompts;
use crate::task::EvalTask;
use crate::transcript::TranscriptEvent;

/// Hard ceiling on served reference reads per task run.
pub const MAX_TOOL_CALLS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// No skill content at all.
    D,
    /// Original body and references injected inline.
    A,
    /// Compressed core with on-demand module loading.
    C,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::D => "D",
            Condition::A => "A",
            Condition::C => "C",
        };
        f.write_str(name)
    }
}

/// Complete record of one (task, condition) execution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionRun {
    pub condition: Condition,
    pub transcript: Vec<TranscriptEvent>,
    pub final_answer: String,
    /// Tool calls that consumed budget (served or not-found lookups).
    pub tool_calls: usize,
    /// Paths whose content was actually delivered to the agent.
    pub loaded_refs: Vec<String>,
    /// Skill-content tokens placed in front of the agent: injected context
    /// plus any module contents served through the tool.
    pub injected_tokens: usize,
}

#[derive(Deserialize)]
struct AgentTurn {
    #[serde(default)]
    tool: Option<String>,
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    answer: Option<String>,
}

/// Run `task` under `condition` and return the transcript.
pub fn run_condition(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    task: &EvalTask,
    condition: Condition,
    skill: &Skill,
    optimized: &OptimizedSkill,
) -> Result<ConditionRun, EvalError> {
    match condition {
        Condition::D => run_single_shot(gateway, task, condition, prompts::AGENT_BARE_SYSTEM, None, 0),
        Condition::A => {
            let mut context = format!("Skill instructions:\n{}\n", skill.body);
            for reference in &skill.references {
                context.push_str(&format!("\nReference {}:\n{}\n", reference.path, reference.text));
            }
            let tokens = tokenizer.count(&context);
            run_single_shot(
                gateway,
                task,
                condition,
                prompts::AGENT_INLINE_SYSTEM,
                Some(context),
                tokens,
            )
        }
        Condition::C => run_with_tool(gateway, tokenizer, task, optimized),
    }
}

fn run_single_shot(
    gateway: &Gateway,
    task: &EvalTask,
    condition: Condition,
    system: &str,
    context: Option<String>,
    injected_tokens: usize,
) -> Result<ConditionRun, EvalError> {
    let mut transcript = vec![TranscriptEvent::ContextInjected {
        tokens: injected_tokens,
        summary: match &context {
            Some(_) => "original body and references inline".into(),
            None => "no skill content".into(),
        },
    }];
    let user = match context {
        Some(context) => format!("{context}\nTask:\n{}", task.prompt),
        None => format!("Task:\n{}", task.prompt),
    };
    let request = CompletionRequest::new(ModelRole::Evaluator, system, &user)
        .with_schema(prompts::AGENT_ANSWER_SCHEMA);
    let turn: AgentTurn = gateway.complete_structured(&request)?;
    let final_answer = match turn.answer {
        Some(answer) => {
            transcript.push(TranscriptEvent::FinalAnswer { answer: answer.clone() });
            answer
        }
        None => {
            transcript.push(TranscriptEvent::ProtocolError {
                detail: "reply carried no answer field".into(),
            });
            String::new()
        }
    };
    Ok(ConditionRun {
        condition,
        transcript,
        final_answer,
        tool_calls: 0,
        loaded_refs: Vec::new(),
        injected_tokens,
    })
}

fn run_with_tool(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    task: &EvalTask,
    optimized: &OptimizedSkill,
) -> Result<ConditionRun, EvalError> {
    let context = format!(
        "Core instructions:\n{}\n\n{}",
        optimized.core,
        prompts::module_listing(&optimized.reference_modules)
    );
    let mut injected_tokens = tokenizer.count(&context);
    let mut transcript = vec![TranscriptEvent::ContextInjected {
        tokens: injected_tokens,
        summary: "compressed core and module listing".into(),
    }];
    let mut conversation = format!("{context}\nTask:\n{}", task.prompt);
    let mut tool_calls = 0usize;
    let mut loaded_refs = Vec::new();
    let mut refused = false;
    let mut final_answer = String::new();

    loop {
        let schema = if refused {
            prompts::AGENT_ANSWER_SCHEMA
        } else {
            prompts::AGENT_TURN_SCHEMA
        };
        let request =
            CompletionRequest::new(ModelRole::Evaluator, prompts::AGENT_ONDEMAND_SYSTEM, &conversation)
                .with_schema(schema);
        let turn: AgentTurn = gateway.complete_structured(&request)?;

        if let Some(answer) = turn.answer {
            transcript.push(TranscriptEvent::FinalAnswer { answer: answer.clone() });
            final_answer = answer;
            break;
        }

        let path = match (turn.tool.as_deref(), turn.path) {
            (Some("read_reference"), Some(path)) => path,
            _ => {
                transcript.push(TranscriptEvent::ProtocolError {
                    detail: "reply was neither a read_reference call nor an answer".into(),
                });
                break;
            }
        };

        if tool_calls >= MAX_TOOL_CALLS {
            transcript.push(TranscriptEvent::BudgetRefusal { path: path.clone() });
            if refused {
                // Second over-budget call after an explicit refusal: stop the
                // run rather than loop forever against a stubborn agent.
                transcript.push(TranscriptEvent::ProtocolError {
                    detail: "tool call after budget refusal".into(),
                });
                break;
            }
            refused = true;
            conversation.push_str(&format!(
                "\n\n[refused {path}: the six-call budget is spent; reply with your final answer]"
            ));
            continue;
        }

        transcript.push(TranscriptEvent::ToolCall { path: path.clone() });
        tool_calls += 1;
        match optimized.reference_modules.iter().find(|m| m.path == path) {
            Some(module) => {
                let tokens = tokenizer.count(&module.content);
                injected_tokens += tokens;
                transcript.push(TranscriptEvent::ToolResult {
                    path: path.clone(),
                    found: true,
                    tokens,
                });
                conversation.push_str(&format!("\n\n[content of {path}]\n{}", module.content));
                loaded_refs.push(path);
            }
            None => {
                transcript.push(TranscriptEvent::ToolResult {
                    path: path.clone(),
                    found: false,
                    tokens: 0,
                });
                conversation.push_str(&format!("\n\n[no module at {path}]"));
            }
        }
    }

    Ok(ConditionRun {
        condition: Condition::C,
        transcript,
        final_answer,
        tool_calls,
        loaded_refs,
        injected_tokens,
    })
}
