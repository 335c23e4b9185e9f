use thiserror::Error;

/// Errors raised by the task harness.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Gateway(#[from] llm_gateway::GatewayError),

    /// Task generation produced nothing usable; the caller should mark the
    /// skill's retention gate as not run.
    #[error("task generation failed for `{skill}`: {reason}")]
    TaskGeneration { skill: String, reason: String },

    /// The verifier sandbox could not even be set up (I/O, interpreter
    /// missing). Distinct from a verifier that runs and fails.
    #[error("verifier sandbox error: {0}")]
    Sandbox(#[from] std::io::Error),
}
