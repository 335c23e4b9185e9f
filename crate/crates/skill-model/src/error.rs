use std::path::PathBuf;

/// Errors produced while loading, serializing, or costing skills.
#[derive(Debug, thiserror::Error)]
pub enum SkillError {
    #[error("no SKILL.md found under {0}")]
    MissingSkillFile(PathBuf),

    #[error("malformed frontmatter in {path} (line {line}): {reason}")]
    MalformedFrontmatter {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("unknown reference module `{0}`")]
    UnknownReference(String),

    #[error("invalid cost parameters: {0}")]
    InvalidParameters(String),

    #[error("vocabulary file {path}: {reason}")]
    Vocabulary { path: PathBuf, reason: String },

    #[error("refusing to overwrite non-skill directory {0}")]
    UnsafeOutputDir(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
