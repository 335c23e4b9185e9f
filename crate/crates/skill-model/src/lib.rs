//! Data model shared by the whole toolchain: skill parsing and
//! serialization, exact token counting, and the cost arithmetic used to
//! size and report context savings.

mod cost;
mod error;
mod skill;
mod tokenizer;

pub use cost::{
    expected_body_factor, expected_cost, expected_cost_with_actual_core, invocation_cost,
    optimized_breakdown, optimized_cost, reduction_percent, CostBreakdown, CostParameters,
};
pub use error::SkillError;
pub use skill::{
    parse_optimized, parse_skill, reference_token_map, serialize_optimized, ModuleOrigin,
    OptimizedSkill, Reference, ReferenceModule, Skill,
};
pub use tokenizer::Tokenizer;
