//! Requests, roles, and the canonical digest that keys the fixture store.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// The four distinct jobs models perform in this pipeline. Each role binds
/// to one configured model; the compressor and evaluator must differ so a
/// model never grades its own rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelRole {
    /// Rewrites content: clause segmentation, paraphrase, classification,
    /// type-specific compression, annotation.
    Compressor,
    /// Simulated routing decisions over candidate pools.
    Oracle,
    /// Executes evaluation tasks as the agent under test.
    Evaluator,
    /// Scores evaluation transcripts against rubrics.
    Judge,
}

impl ModelRole {
    pub const ALL: [ModelRole; 4] = [
        ModelRole::Compressor,
        ModelRole::Oracle,
        ModelRole::Evaluator,
        ModelRole::Judge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelRole::Compressor => "compressor",
            ModelRole::Oracle => "oracle",
            ModelRole::Evaluator => "evaluator",
            ModelRole::Judge => "judge",
        }
    }

    /// Environment variable carrying the model identifier for this role.
    pub fn env_var(self) -> String {
        format!("SKILLDEBLOAT_MODEL_{}", self.as_str().to_uppercase())
    }
}

impl std::fmt::Display for ModelRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One chat completion request. `schema`, when present, is appended to the
/// user message as an explicit output-contract block; responses are then
/// strictly parsed by [`crate::Gateway::complete_structured`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub role: ModelRole,
    pub system: String,
    pub user: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub temperature: f32,
}

impl CompletionRequest {
    /// Deterministic request at temperature 0 — the default for every
    /// classification and oracle call.
    pub fn new(role: ModelRole, system: impl Into<String>, user: impl Into<String>) -> Self {
        CompletionRequest {
            role,
            system: system.into(),
            user: user.into(),
            schema: None,
            temperature: 0.0,
        }
    }

    pub fn with_schema(mut self, schema: impl Into<String>) -> Self {
        self.schema = Some(schema.into());
        self
    }

    pub fn with_temperature(mut self, temperature: f32) -> Self {
        self.temperature = temperature;
        self
    }

    /// The user text actually sent over the wire: the message plus the
    /// structured-output contract when one is attached.
    pub fn wire_user(&self) -> String {
        match &self.schema {
            Some(schema) => format!(
                "{}\n\nRespond with JSON only, matching this schema exactly:\n{}",
                self.user, schema
            ),
            None => self.user.clone(),
        }
    }
}

/// Content hash of the canonicalized request. Canonicalization sorts all
/// object keys recursively, so the digest is invariant under serialization
/// key order.
pub fn canonical_digest(request: &CompletionRequest) -> String {
    let value = serde_json::to_value(request).expect("requests serialize to JSON");
    let canonical = canonical_json(&value);
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex::encode(hasher.finalize())
}

/// Compact JSON with recursively sorted object keys.
pub fn canonical_json(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let fields: Vec<String> = keys
                .into_iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        serde_json::to_string(k).expect("string serializes"),
                        canonical_json(&map[k])
                    )
                })
                .collect();
            format!("{{{}}}", fields.join(","))
        }
        serde_json::Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", parts.join(","))
        }
        other => serde_json::to_string(other).expect("scalar serializes"),
    }
}

/// One recorded request/response pair in the JSONL fixture store.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub request_digest: String,
    pub request: CompletionRequest,
    pub response: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_invariant_under_key_order() {
        let a: serde_json::Value = serde_json::from_str(
            r#"{"role":"oracle","system":"s","user":"u","temperature":0.0}"#,
        )
        .unwrap();
        let b: serde_json::Value = serde_json::from_str(
            r#"{"temperature":0.0,"user":"u","role":"oracle","system":"s"}"#,
        )
        .unwrap();
        assert_eq!(canonical_json(&a), canonical_json(&b));

        let req_a: CompletionRequest = serde_json::from_value(a).unwrap();
        let req_b: CompletionRequest = serde_json::from_value(b).unwrap();
        assert_eq!(canonical_digest(&req_a), canonical_digest(&req_b));
    }

    #[test]
    fn digest_distinguishes_different_requests() {
        let base = CompletionRequest::new(ModelRole::Oracle, "s", "u");
        let other_user = CompletionRequest::new(ModelRole::Oracle, "s", "u2");
        let other_role = CompletionRequest::new(ModelRole::Judge, "s", "u");
        let with_schema = base.clone().with_schema("{}");
        let digests = [
            canonical_digest(&base),
            canonical_digest(&other_user),
            canonical_digest(&other_role),
            canonical_digest(&with_schema),
        ];
        for (i, a) in digests.iter().enumerate() {
            for b in digests.iter().skip(i + 1) {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn wire_user_appends_schema_block() {
        let req = CompletionRequest::new(ModelRole::Compressor, "s", "rewrite this")
            .with_schema(r#"{"type":"array"}"#);
        let wire = req.wire_user();
        assert!(wire.starts_with("rewrite this"));
        assert!(wire.contains(r#"{"type":"array"}"#));
    }
}
