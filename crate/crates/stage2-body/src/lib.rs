//! Body restructuring for agent skills: split a monolithic instruction body
//! into a small always-loaded core plus annotated on-demand reference
//! modules, without losing operational content.
//!
//! The pipeline classifies paragraph-level items into a five-category
//! taxonomy, compresses each category with its own strategy, deduplicates
//! external reference files against the body, annotates every module with a
//! trigger sentence and topic keywords, and then defends the result with two
//! gates: a faithfulness check that rolls back lossy types, and an optional
//! retention check that promotes items back into the core when task scores
//! regress.

mod annotate;
mod classify;
mod compress;
mod dedup;
mod error;
mod feedback;
mod gate1;
mod numerals;
mod prompts;
mod restructure;
mod segment;

pub use annotate::{annotate_module, MAX_TOPICS, MIN_TOPICS};
pub use classify::{
    classify_items, cross_validate, ClassifiedBody, ContentItem, ContentLabel, CLASSIFY_ATTEMPTS,
};
pub use compress::{compress_by_type, ModuleText, TypedCompression};
pub use dedup::{dedup_reference, DedupedReference, MIN_MODULE_TOKENS};
pub use error::Stage2Error;
pub use feedback::{
    drive_feedback, FeedbackRecord, FeedbackState, Gate2Outcome, Gate2Runner, NoGate2,
    MAX_FEEDBACK_ITERATIONS,
};
pub use gate1::{gate1_check, Gate1Report};
pub use numerals::{all_numerals_kept, extract_numerals, no_invented_numerals};
pub use prompts::PROMPT_PACK_VERSION;
pub use restructure::{
    restructure_with_feedback, Gate2Status, Gate2Summary, ModuleReport, Stage2Config,
    Stage2Report, Stage2Run,
};
pub use segment::segment_body;
