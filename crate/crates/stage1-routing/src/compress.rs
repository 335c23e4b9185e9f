//! Phase-1 description compression: clause segmentation, delta-debugging
//! deletion against the simulated oracle, per-clause paraphrase, and a
//! final polish pass. Every accepted edit must keep the oracle verdict.

use std::cell::RefCell;
use std::collections::BTreeSet;

use dd_core::{ddmin, DdError, UnitSet};
use llm_gateway::{CompletionRequest, Gateway, GatewayError, ModelRole};
use serde::Deserialize;
use skill_model::Tokenizer;

use crate::error::Stage1Error;
use crate::oracle::RoutingOracle;
use crate::prompts;

const UNIT_SEPARATOR: &str = " ";

/// Everything phase 2 needs: the clause segmentation, which clauses
/// survived deletion, their current (possibly paraphrased) texts, and the
/// polished fast description.
#[derive(Debug, Clone)]
pub struct CompressionOutcome {
    /// Original clause texts in original order.
    pub units: Vec<String>,
    /// Indices into `units` retained by minimization, ascending.
    pub kept: Vec<usize>,
    /// Current text per original index: paraphrased for kept clauses,
    /// untouched for deleted ones (restores re-insert these verbatim).
    pub unit_texts: Vec<String>,
    /// The polished candidate description.
    pub d_fast: String,
    /// The oracle rejected the *original* description, so no edit can be
    /// trusted; the original is kept as-is.
    pub oracle_unroutable: bool,
}

impl CompressionOutcome {
    /// Joins the current texts of `indices` (ascending original order).
    pub fn assemble(&self, indices: &[usize]) -> String {
        indices
            .iter()
            .map(|&i| self.unit_texts[i].as_str())
            .collect::<Vec<_>>()
            .join(UNIT_SEPARATOR)
    }

    pub fn deleted(&self) -> Vec<usize> {
        (0..self.units.len())
            .filter(|i| !self.kept.contains(i))
            .collect()
    }
}

#[derive(Deserialize)]
struct SegmentReply {
    clauses: Vec<String>,
}

#[derive(Deserialize)]
struct ParaphraseReply {
    rewrite: String,
}

#[derive(Deserialize)]
struct PolishReply {
    polished: String,
}

/// Splits a description into deletable clauses via the compressor model.
/// A reply that loses content words is retried once; persistent failure
/// degrades to a single-unit set (paraphrase-only compression).
pub fn segment_description(gateway: &Gateway, desc: &str) -> Result<UnitSet, Stage1Error> {
    let request = CompletionRequest::new(
        ModelRole::Compressor,
        prompts::SEGMENT_SYSTEM,
        prompts::segment_user(desc),
    )
    .with_schema(prompts::SEGMENT_SCHEMA);

    for attempt in 0..2 {
        let reply: SegmentReply = match gateway.complete_structured(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        let clauses: Vec<String> = reply
            .clauses
            .iter()
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if !clauses.is_empty() && covers_content(desc, &clauses) {
            return Ok(UnitSet::new(clauses)?);
        }
        log::debug!("segmentation attempt {attempt}: clause set loses content words, retrying");
    }
    // Degenerate but safe: deletion can't operate on one unit, paraphrase
    // and polish still can.
    Ok(UnitSet::new(vec![desc.to_string()])?)
}

/// Every content word of `desc` must survive somewhere in the clause set.
fn covers_content(desc: &str, clauses: &[String]) -> bool {
    let union = clauses.join(" ");
    let union_words = content_words(&union);
    content_words(desc).is_subset(&union_words)
}

fn content_words(text: &str) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Runs the full fast-compression pass for one description. The returned
/// `d_fast` never exceeds the original's token count and always passes the
/// oracle (unless `oracle_unroutable`, in which case it *is* the original).
pub fn compress_description(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    oracle: &RoutingOracle<'_>,
    desc: &str,
) -> Result<CompressionOutcome, Stage1Error> {
    if !oracle.passes(desc)? {
        log::warn!("oracle does not route the original description; keeping it verbatim");
        return Ok(CompressionOutcome {
            units: vec![desc.to_string()],
            kept: vec![0],
            unit_texts: vec![desc.to_string()],
            d_fast: desc.to_string(),
            oracle_unroutable: true,
        });
    }

    let units = segment_description(gateway, desc)?;
    let kept = minimize_units(&units, oracle)?;

    let mut unit_texts: Vec<String> = units.units().to_vec();
    paraphrase_units(gateway, tokenizer, oracle, &kept, &mut unit_texts)?;

    let assembly = join_units(&kept, &unit_texts);
    let mut d_fast = polish(gateway, tokenizer, oracle, &assembly)?;

    // Joins and polish operate on text, not tokens; guard the contract
    // that compression never costs tokens.
    if tokenizer.count(&d_fast) > tokenizer.count(desc) {
        d_fast = desc.to_string();
    }

    Ok(CompressionOutcome {
        units: units.units().to_vec(),
        kept,
        unit_texts,
        d_fast,
        oracle_unroutable: false,
    })
}

/// Delta-debugging deletion: finds a 1-minimal clause subset that still
/// routes every query. The empty subset is rejected without consulting the
/// oracle, and oracle failures abort the run instead of masquerading as
/// verdicts.
fn minimize_units(units: &UnitSet, oracle: &RoutingOracle<'_>) -> Result<Vec<usize>, Stage1Error> {
    let error: RefCell<Option<Stage1Error>> = RefCell::new(None);
    let run = ddmin(units, |kept: &[&str]| {
        if kept.is_empty() || error.borrow().is_some() {
            return false;
        }
        match oracle.passes(&kept.join(UNIT_SEPARATOR)) {
            Ok(verdict) => verdict,
            Err(e) => {
                *error.borrow_mut() = Some(e);
                false
            }
        }
    });
    if let Some(e) = error.into_inner() {
        return Err(e);
    }
    match run {
        Ok((minimized, _trace)) => Ok(minimized.kept_indices()),
        // The clause join can route differently than the raw text (lost
        // punctuation, reordered whitespace). Deletion is then unsafe;
        // keep every clause and let paraphrase/polish do the work.
        Err(DdError::PredicateFailsOnFullSet) => Ok((0..units.len()).collect()),
        Err(e) => Err(e.into()),
    }
}

/// Rewrites each surviving clause; a rewrite is adopted only when strictly
/// shorter in tokens *and* the patched assembly still routes everything.
fn paraphrase_units(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    oracle: &RoutingOracle<'_>,
    kept: &[usize],
    unit_texts: &mut [String],
) -> Result<(), Stage1Error> {
    for &idx in kept {
        let current = unit_texts[idx].clone();
        let request = CompletionRequest::new(
            ModelRole::Compressor,
            prompts::PARAPHRASE_SYSTEM,
            prompts::paraphrase_user(&current),
        )
        .with_schema(prompts::PARAPHRASE_SCHEMA);
        let reply: ParaphraseReply = match gateway.complete_structured(&request) {
            Ok(reply) => reply,
            Err(GatewayError::FailedAfterRetries { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let rewrite = reply.rewrite.trim().to_string();
        if rewrite.is_empty() || tokenizer.count(&rewrite) >= tokenizer.count(&current) {
            continue;
        }
        unit_texts[idx] = rewrite;
        if !oracle.passes(&join_units(kept, unit_texts))? {
            unit_texts[idx] = current;
        }
    }
    Ok(())
}

/// Fluency pass over the assembled description; adopted only when it costs
/// no tokens and preserves the oracle verdict.
fn polish(
    gateway: &Gateway,
    tokenizer: &Tokenizer,
    oracle: &RoutingOracle<'_>,
    assembly: &str,
) -> Result<String, Stage1Error> {
    let request = CompletionRequest::new(
        ModelRole::Compressor,
        prompts::POLISH_SYSTEM,
        prompts::polish_user(assembly),
    )
    .with_schema(prompts::POLISH_SCHEMA);
    let reply: PolishReply = match gateway.complete_structured(&request) {
        Ok(reply) => reply,
        Err(GatewayError::FailedAfterRetries { .. }) => return Ok(assembly.to_string()),
        Err(e) => return Err(e.into()),
    };
    let polished = reply.polished.trim().to_string();
    if polished.is_empty()
        || tokenizer.count(&polished) > tokenizer.count(assembly)
        || !oracle.passes(&polished)?
    {
        return Ok(assembly.to_string());
    }
    Ok(polished)
}

fn join_units(kept: &[usize], unit_texts: &[String]) -> String {
    kept.iter()
        .map(|&i| unit_texts[i].as_str())
        .collect::<Vec<_>>()
        .join(UNIT_SEPARATOR)
}
