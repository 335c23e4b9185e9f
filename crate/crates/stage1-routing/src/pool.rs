//! Candidate pools for simulated routing: the target skill, four
//! similarity-ranked distractors, and one generated hard negative, shuffled
//! per query from a reproducible seed.

use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::Stage1Error;
use crate::prompts;
use crate::stubs::{builtin_distractors, SkillStub};
use crate::tfidf::tfidf_rank;

pub const POOL_SIZE: usize = 6;
pub const DISTRACTOR_COUNT: usize = 4;
const ADVERSARIAL_ATTEMPTS: usize = 3;

/// A routing candidate pool of exactly six members: the target, four
/// distractors, and a hard-negative stub from an adjacent domain.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub target: SkillStub,
    pub distractors: Vec<SkillStub>,
    pub adversarial: SkillStub,
    /// Base seed from which per-query shuffle seeds are derived.
    pub base_seed: u64,
}

impl CandidatePool {
    pub fn new(
        target: SkillStub,
        distractors: Vec<SkillStub>,
        adversarial: SkillStub,
        base_seed: u64,
    ) -> Result<Self, Stage1Error> {
        let pool = CandidatePool {
            target,
            distractors,
            adversarial,
            base_seed,
        };
        pool.validate()?;
        Ok(pool)
    }

    pub fn validate(&self) -> Result<(), Stage1Error> {
        if self.distractors.len() != DISTRACTOR_COUNT {
            return Err(Stage1Error::PoolInvariant(format!(
                "expected {DISTRACTOR_COUNT} distractors, found {}",
                self.distractors.len()
            )));
        }
        let mut names: Vec<&str> = self.member_names();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        if names.len() != before {
            return Err(Stage1Error::PoolInvariant(
                "pool member names must be unique (target appears exactly once)".into(),
            ));
        }
        Ok(())
    }

    fn member_names(&self) -> Vec<&str> {
        let mut names = vec![self.target.name.as_str()];
        names.extend(self.distractors.iter().map(|d| d.name.as_str()));
        names.push(self.adversarial.name.as_str());
        names
    }

    /// Seed for one oracle trial, mixed from the base seed, the query
    /// index, and the repetition number.
    pub fn shuffle_seed(&self, query_idx: usize, repetition: usize) -> u64 {
        let input = self
            .base_seed
            .wrapping_add(splitmix64((query_idx as u64) << 32 | repetition as u64));
        splitmix64(input)
    }

    /// The six `(name, description)` entries in the shuffled order the
    /// oracle sees for one trial. `desc_override` substitutes the target's
    /// description — this is how candidate compressed descriptions are
    /// evaluated in place.
    pub fn arranged(
        &self,
        query_idx: usize,
        repetition: usize,
        desc_override: Option<&str>,
    ) -> Vec<(String, String)> {
        let target_desc = desc_override.unwrap_or(&self.target.description);
        let mut entries: Vec<(String, String)> =
            vec![(self.target.name.clone(), target_desc.to_string())];
        entries.extend(
            self.distractors
                .iter()
                .chain(std::iter::once(&self.adversarial))
                .map(|s| (s.name.clone(), s.description.clone())),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(self.shuffle_seed(query_idx, repetition));
        entries.shuffle(&mut rng);
        entries
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[derive(Deserialize)]
struct AdversarialReply {
    name: String,
    description: String,
}

/// Assembles the pool for a target: top-4 TF-IDF distractors from the
/// library (padded from the built-in stubs when the library is thin), plus
/// a generated adversarial stub. When generation keeps failing or keeps
/// colliding with existing names, the next-ranked unused distractor fills
/// the sixth slot instead.
pub fn build_pool(
    gateway: &Gateway,
    target: &SkillStub,
    library: &[SkillStub],
    base_seed: u64,
) -> Result<CandidatePool, Stage1Error> {
    let bench = distractor_bench(target, library);
    let (distractors, fallback) = bench.split_at(DISTRACTOR_COUNT);
    let distractors = distractors.to_vec();

    let taken: Vec<&str> = std::iter::once(target.name.as_str())
        .chain(distractors.iter().map(|d| d.name.as_str()))
        .collect();
    let adversarial = match generate_adversarial(gateway, target, &taken)? {
        Some(stub) => stub,
        None => {
            log::info!(
                "adversarial generation for {:?} exhausted retries; using ranked fallback {:?}",
                target.name,
                fallback[0].name
            );
            fallback[0].clone()
        }
    };

    CandidatePool::new(target.clone(), distractors, adversarial, base_seed)
}

/// Five unique-named distractor candidates: library stubs in similarity
/// order, then built-ins. Positions 0–3 join the pool; position 4 is the
/// adversarial fallback.
fn distractor_bench(target: &SkillStub, library: &[SkillStub]) -> Vec<SkillStub> {
    let ranked = tfidf_rank(target, library);
    let mut bench: Vec<SkillStub> = Vec::with_capacity(DISTRACTOR_COUNT + 1);
    let push_unique = |stub: &SkillStub, bench: &mut Vec<SkillStub>| {
        if stub.name != target.name && bench.iter().all(|b| b.name != stub.name) {
            bench.push(stub.clone());
        }
    };
    for (idx, _) in &ranked {
        if bench.len() > DISTRACTOR_COUNT {
            break;
        }
        push_unique(&library[*idx], &mut bench);
    }
    for stub in &builtin_distractors() {
        if bench.len() > DISTRACTOR_COUNT {
            break;
        }
        push_unique(stub, &mut bench);
    }
    bench
}

/// Asks the compressor model for a same-domain, different-capability decoy.
/// Returns `None` once retries are exhausted (parse failures or name
/// collisions); transport errors propagate.
fn generate_adversarial(
    gateway: &Gateway,
    target: &SkillStub,
    taken_names: &[&str],
) -> Result<Option<SkillStub>, Stage1Error> {
    let request = CompletionRequest::new(
        ModelRole::Compressor,
        prompts::ADVERSARIAL_SYSTEM,
        prompts::adversarial_user(&target.name, &target.description),
    )
    .with_schema(prompts::ADVERSARIAL_SCHEMA);

    for attempt in 1..=ADVERSARIAL_ATTEMPTS {
        let reply: AdversarialReply = match gateway.complete_structured(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let name = reply.name.trim();
        if name.is_empty() || reply.description.trim().is_empty() {
            log::debug!("adversarial attempt {attempt}: empty field, retrying");
            continue;
        }
        if taken_names.contains(&name) {
            log::debug!("adversarial attempt {attempt}: name {name:?} already in pool, retrying");
            continue;
        }
        return Ok(Some(SkillStub::new(name, reply.description.trim())));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stub_pool() -> CandidatePool {
        CandidatePool::new(
            SkillStub::new("target", "target desc"),
            vec![
                SkillStub::new("d1", "one"),
                SkillStub::new("d2", "two"),
                SkillStub::new("d3", "three"),
                SkillStub::new("d4", "four"),
            ],
            SkillStub::new("adv", "decoy"),
            7,
        )
        .unwrap()
    }

    #[test]
    fn rejects_duplicate_member_names() {
        let err = CandidatePool::new(
            SkillStub::new("target", "t"),
            vec![
                SkillStub::new("d1", "1"),
                SkillStub::new("d2", "2"),
                SkillStub::new("d3", "3"),
                SkillStub::new("d4", "4"),
            ],
            SkillStub::new("target", "decoy"),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Stage1Error::PoolInvariant(_)));
    }

    #[test]
    fn arranged_is_reproducible_and_query_dependent() {
        let pool = stub_pool();
        assert_eq!(pool.arranged(0, 0, None), pool.arranged(0, 0, None));
        let differs = (0..8).any(|q| pool.arranged(q, 0, None) != pool.arranged(0, 0, None));
        assert!(differs, "shuffle should vary with the query index");
    }

    #[test]
    fn desc_override_substitutes_target_only() {
        let pool = stub_pool();
        let arranged = pool.arranged(2, 0, Some("short"));
        let target_entry = arranged.iter().find(|(n, _)| n == "target").unwrap();
        assert_eq!(target_entry.1, "short");
        assert!(arranged.iter().all(|(n, d)| n == "target" || d != "short"));
    }
}
