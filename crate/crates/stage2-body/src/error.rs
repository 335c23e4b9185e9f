use thiserror::Error;

/// Errors surfaced by the body-restructuring pipeline.
///
/// Most model-side failures are absorbed by conservative fallbacks (keep the
/// input verbatim) rather than escalated; the variants here are the ones that
/// genuinely stop a run.
#[derive(Debug, Error)]
pub enum Stage2Error {
    #[error(transparent)]
    Gateway(#[from] llm_gateway::GatewayError),

    #[error(transparent)]
    Skill(#[from] skill_model::SkillError),

    /// The skill body contained no content items after segmentation.
    #[error("skill `{0}` has an empty body; nothing to restructure")]
    EmptyBody(String),

    /// An emitted module violated a structural constraint (empty when-clause,
    /// bad topic count, or under the size threshold).
    #[error("module failed structural validation: {0}")]
    InvalidModule(String),

    /// The external retention evaluator failed hard.
    #[error("retention evaluation failed: {0}")]
    RetentionCheck(String),
}
