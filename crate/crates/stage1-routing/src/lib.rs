//! Routing-description optimization: compress verbose skill descriptions
//! down to what a router actually needs, generate descriptions for skills
//! that lack one, and validate the result against a real agent runtime
//! with a bounded restore budget.
//!
//! The pipeline per skill:
//!
//! 1. generate a query set the skill must keep routing;
//! 2. build a six-member candidate pool (target, four TF-IDF distractors,
//!    one generated hard negative);
//! 3. delta-debug the description's clauses against a simulated routing
//!    oracle, then paraphrase and polish;
//! 4. when an agent adapter is configured, re-check against real trigger
//!    behavior and greedily restore deleted clauses (up to three) before
//!    falling back to the original.

mod compress;
mod error;
mod generate;
mod oracle;
mod pipeline;
mod pool;
mod prompts;
mod queries;
mod restore;
mod stubs;
mod tfidf;
mod trigger;

pub use compress::{compress_description, segment_description, CompressionOutcome};
pub use error::Stage1Error;
pub use generate::{generate_description, GenerationResult};
pub use oracle::RoutingOracle;
pub use pipeline::{run_stage1, Stage1Config, Stage1Report, Stage1Run};
pub use pool::{build_pool, CandidatePool, DISTRACTOR_COUNT, POOL_SIZE};
pub use prompts::PROMPT_PACK_VERSION;
pub use queries::{generate_queries, QuerySet};
pub use restore::{validate_and_restore, OutcomeStatus, RestoreResult};
pub use stubs::{builtin_distractors, SkillStub};
pub use tfidf::tfidf_rank;
pub use trigger::{CommandAdapter, ScriptedAdapter, TriggerAdapter, UnavailableAdapter};
