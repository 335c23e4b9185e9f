//! Every model call in the toolchain goes through this gateway: one of
//! four roles (compressor, oracle, evaluator, judge), each bound to a
//! configured model, with transport retries, structured-output
//! validation, a per-role concurrency cap, and a deterministic
//! record/replay mode for fixture-based testing.

mod error;
mod fixtures;
mod gateway;
mod provider;
mod request;

pub use error::GatewayError;
pub use fixtures::{append_fixture, fixture_count, load_fixture_map, open_for_append, FixtureStore};
pub use gateway::{extract_json, Gateway, GatewayConfig, Mode, RoleModels};
pub use provider::{
    HttpProvider, HttpProviderConfig, Provider, ScriptedProvider, SequenceProvider,
};
pub use request::{canonical_digest, canonical_json, CompletionRequest, Fixture, ModelRole};
