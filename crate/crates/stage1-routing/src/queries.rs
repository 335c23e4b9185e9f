//! Query-set construction: the user requests the routing oracle replays
//! against every candidate description.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;
use skill_model::Skill;

use crate::error::Stage1Error;
use crate::prompts;

/// The requests a correct description must route, plus the subset the
/// original description is known to route in a live agent (phase 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    pub queries: Vec<String>,
    /// Indices into `queries` that triggered with the original description.
    /// Empty until phase-2 validation runs.
    pub validated_subset: Vec<usize>,
}

impl QuerySet {
    pub fn new(queries: Vec<String>) -> Self {
        QuerySet {
            queries,
            validated_subset: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// The validated queries themselves, in index order.
    pub fn validated(&self) -> Vec<&str> {
        self.validated_subset
            .iter()
            .map(|&i| self.queries[i].as_str())
            .collect()
    }
}

#[derive(Deserialize)]
struct QueryReply {
    queries: Vec<String>,
}

/// Asks the compressor model for `k` diverse requests the skill should
/// serve. Short replies are rejected and retried by the structured-output
/// machinery; an unusable final reply aborts the skill.
pub fn generate_queries(
    gateway: &Gateway,
    skill: &Skill,
    k: usize,
) -> Result<QuerySet, Stage1Error> {
    let description = if skill.description.trim().is_empty() {
        // Description may be absent on the generation path; seed query
        // writing from the body instead.
        excerpt(&skill.body, 2_000)
    } else {
        skill.description.clone()
    };
    let request = CompletionRequest::new(
        ModelRole::Compressor,
        prompts::QUERY_SYSTEM,
        prompts::query_user(&skill.name, &description, k),
    )
    .with_schema(prompts::QUERY_SCHEMA);

    let reply: QueryReply = match gateway.complete_structured(&request) {
        Ok(reply) => reply,
        Err(GatewayError::FailedAfterRetries { last_error, .. }) => {
            return Err(Stage1Error::QueryGenerationFailed {
                skill: skill.name.clone(),
                reason: last_error,
            })
        }
        Err(e) => return Err(e.into()),
    };

    let queries: Vec<String> = reply
        .queries
        .into_iter()
        .map(|q| q.trim().to_string())
        .filter(|q| !q.is_empty())
        .take(k)
        .collect();
    if queries.len() < k {
        return Err(Stage1Error::QueryGenerationFailed {
            skill: skill.name.clone(),
            reason: format!("asked for {k} queries, usable reply had {}", queries.len()),
        });
    }
    Ok(QuerySet::new(queries))
}

fn excerpt(text: &str, max_bytes: usize) -> String {
    if text.len() <= max_bytes {
        return text.to_string();
    }
    let mut end = max_bytes;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}…", &text[..end])
}
