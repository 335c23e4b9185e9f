//! Library backing the `skilldebloat` binary.
//!
//! `optimize` runs the two-stage pipeline over a corpus directory and writes
//! optimized skills plus JSON/Markdown reports; `analyze` produces offline
//! corpus statistics; `validate` checks a single (optimized or plain) skill
//! directory against the structural contracts; `report` re-renders the
//! summary for a finished run from its per-skill reports.
//!
//! Everything lives here rather than in `main.rs` so integration tests can
//! drive the pipeline with an injected gateway (for example, to record
//! fixtures with a scripted provider).

pub mod analyze;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod summary;
pub mod validate;

use std::fmt;

/// A problem with flags, the config file, or their combination. Exits with
/// code 2 so scripts can tell misconfiguration from infrastructure failure.
#[derive(Debug)]
pub struct ConfigProblem(pub String);

impl fmt::Display for ConfigProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigProblem {}
