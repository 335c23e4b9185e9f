//! The simulated routing oracle: does the oracle-role model pick the
//! target skill for every query when a candidate description stands in for
//! the original?

use std::sync::atomic::{AtomicUsize, Ordering};

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;

use crate::error::Stage1Error;
use crate::pool::CandidatePool;
use crate::prompts;

#[derive(Deserialize)]
struct OracleReply {
    skill: String,
}

/// Replays a fixed query set against a candidate pool. Each trial shows
/// the oracle model the pool in a per-(query, repetition) shuffled order
/// with the candidate description substituted for the target's.
pub struct RoutingOracle<'a> {
    gateway: &'a Gateway,
    pool: &'a CandidatePool,
    queries: &'a [String],
    repetitions: usize,
    trials: AtomicUsize,
}

impl<'a> RoutingOracle<'a> {
    pub fn new(
        gateway: &'a Gateway,
        pool: &'a CandidatePool,
        queries: &'a [String],
        repetitions: usize,
    ) -> Self {
        RoutingOracle {
            gateway,
            pool,
            queries,
            repetitions: repetitions.max(1),
            trials: AtomicUsize::new(0),
        }
    }

    /// Total oracle trials issued so far (reported as `oracle_calls`).
    pub fn trials(&self) -> usize {
        self.trials.load(Ordering::SeqCst)
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    /// True iff the oracle selects the target for every query (and every
    /// repetition of it). Stops at the first miss.
    pub fn passes(&self, desc: &str) -> Result<bool, Stage1Error> {
        for query_idx in 0..self.queries.len() {
            if !self.query_passes(desc, query_idx)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// How many queries the description routes correctly. Evaluates every
    /// query — used to score competing generation attempts.
    pub fn pass_count(&self, desc: &str) -> Result<usize, Stage1Error> {
        let mut count = 0;
        for query_idx in 0..self.queries.len() {
            if self.query_passes(desc, query_idx)? {
                count += 1;
            }
        }
        Ok(count)
    }

    fn query_passes(&self, desc: &str, query_idx: usize) -> Result<bool, Stage1Error> {
        for repetition in 0..self.repetitions {
            if !self.trial(desc, query_idx, repetition)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn trial(&self, desc: &str, query_idx: usize, repetition: usize) -> Result<bool, Stage1Error> {
        let candidates = self.pool.arranged(query_idx, repetition, Some(desc));
        let request = CompletionRequest::new(
            ModelRole::Oracle,
            prompts::ORACLE_SYSTEM,
            prompts::oracle_user(&self.queries[query_idx], &candidates),
        )
        .with_schema(prompts::ORACLE_SCHEMA);
        self.trials.fetch_add(1, Ordering::SeqCst);
        match self.gateway.complete_structured::<OracleReply>(&request) {
            Ok(reply) => Ok(reply.skill.trim() == self.pool.target.name),
            // An unparseable selection is a miss, not a pipeline failure.
            Err(GatewayError::FailedAfterRetries { .. }) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }
}
