#[derive(Debug, thiserror::Error)]
pub enum Stage1Error {
    #[error(transparent)]
    Gateway(#[from] llm_gateway::GatewayError),

    #[error(transparent)]
    Minimize(#[from] dd_core::DdError),

    #[error(transparent)]
    Skill(#[from] skill_model::SkillError),

    #[error("query generation failed for skill {skill}: {reason}")]
    QueryGenerationFailed { skill: String, reason: String },

    #[error("no real-trigger adapter is configured")]
    AdapterUnavailable,

    #[error("agent run exceeded {}s", timeout.as_secs())]
    AgentTimeout { timeout: std::time::Duration },

    #[error("malformed agent event stream: {0}")]
    MalformedEventStream(String),

    #[error("candidate pool invariant violated: {0}")]
    PoolInvariant(String),

    #[error("agent adapter I/O failed")]
    AdapterIo(#[from] std::io::Error),
}
