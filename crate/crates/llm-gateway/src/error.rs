use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("provider unreachable after {attempts} attempts: {last_error}")]
    ProviderUnreachable { attempts: u32, last_error: String },

    #[error("structured response still invalid after {attempts} attempts: {last_error}")]
    FailedAfterRetries { attempts: u32, last_error: String },

    #[error("no recorded fixture for request digest {digest} (role {role})")]
    MissingFixture { digest: String, role: String },

    #[error("fixture store {path} line {line}: {reason}")]
    FixtureStoreCorrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid gateway configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
