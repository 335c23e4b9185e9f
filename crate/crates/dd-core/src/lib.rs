//! Delta-debugging minimization (ddmin) over an ordered list of text units.
//!
//! Given a set of units and a predicate that holds on the full set, `ddmin`
//! finds a 1-minimal subset: the predicate still holds, but removing any
//! single retained unit breaks it. The classical algorithm partitions the
//! current set into increasingly many chunks and tests each chunk and each
//! chunk complement, reducing whenever a test passes.
//!
//! Predicates are typically expensive (each test is a round of model
//! calls), so results are memoized per run and the trace records exactly
//! how many distinct predicate invocations were made.

use std::collections::HashMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DdError {
    #[error("predicate does not hold on the full unit set")]
    PredicateFailsOnFullSet,
    #[error("unit {index} is empty")]
    EmptyUnit { index: usize },
}

/// An ordered list of opaque text units plus a kept/deleted marking.
/// Minimization never reorders units; subsets are always reported in the
/// original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitSet {
    units: Vec<String>,
    kept_mask: Vec<bool>,
}

impl UnitSet {
    /// Builds a unit set with every unit kept. Units must be non-empty.
    pub fn new(units: Vec<String>) -> Result<Self, DdError> {
        if let Some(index) = units.iter().position(|u| u.is_empty()) {
            return Err(DdError::EmptyUnit { index });
        }
        let kept_mask = vec![true; units.len()];
        Ok(UnitSet { units, kept_mask })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn unit(&self, index: usize) -> &str {
        &self.units[index]
    }

    pub fn is_kept(&self, index: usize) -> bool {
        self.kept_mask[index]
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.kept_mask[i]).collect()
    }

    pub fn deleted_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.kept_mask[i]).collect()
    }

    pub fn kept_units(&self) -> Vec<&str> {
        self.kept_indices()
            .into_iter()
            .map(|i| self.units[i].as_str())
            .collect()
    }

    pub fn deleted_units(&self) -> Vec<&str> {
        self.deleted_indices()
            .into_iter()
            .map(|i| self.units[i].as_str())
            .collect()
    }

    /// Returns a copy marked to keep exactly `indices`.
    pub fn with_kept(&self, indices: &[usize]) -> Self {
        let mut kept_mask = vec![false; self.len()];
        for &i in indices {
            kept_mask[i] = true;
        }
        UnitSet {
            units: self.units.clone(),
            kept_mask,
        }
    }

    /// Joins the units at `indices` (assumed sorted) with a separator.
    pub fn join(&self, indices: &[usize], sep: &str) -> String {
        indices
            .iter()
            .map(|&i| self.units[i].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

/// One predicate evaluation: which original indices were kept, and the
/// verdict. The final entry always restates the result with its passing
/// verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub tested: Vec<usize>,
    pub verdict: bool,
}

/// Accounting for one minimization run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimizationTrace {
    /// Distinct predicate invocations (memoized repeats are free).
    pub predicate_calls: usize,
    pub result_indices: Vec<usize>,
    pub steps: Vec<TraceStep>,
}

/// Minimizes `units` to a 1-minimal subset satisfying `predicate`.
///
/// The predicate receives the kept units in their original order. It must
/// hold on the full set and be deterministic for the duration of the run.
/// The result keeps the relative order of units and satisfies:
///
/// - soundness: `predicate(result)` is true;
/// - 1-minimality: removing any single retained unit falsifies it.
pub fn ddmin<P>(units: &UnitSet, mut predicate: P) -> Result<(UnitSet, MinimizationTrace), DdError>
where
    P: FnMut(&[&str]) -> bool,
{
    let n_total = units.len();
    let mut memo: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut calls = 0usize;

    let mut test = |indices: &[usize],
                    memo: &mut HashMap<Vec<usize>, bool>,
                    steps: &mut Vec<TraceStep>,
                    calls: &mut usize|
     -> bool {
        if let Some(&verdict) = memo.get(indices) {
            return verdict;
        }
        let texts: Vec<&str> = indices.iter().map(|&i| units.unit(i)).collect();
        let verdict = predicate(&texts);
        *calls += 1;
        memo.insert(indices.to_vec(), verdict);
        steps.push(TraceStep {
            tested: indices.to_vec(),
            verdict,
        });
        verdict
    };

    let full: Vec<usize> = (0..n_total).collect();
    if !test(&full, &mut memo, &mut steps, &mut calls) {
        return Err(DdError::PredicateFailsOnFullSet);
    }

    let mut current = full;
    if test(&[], &mut memo, &mut steps, &mut calls) {
        current = Vec::new();
    } else {
        let mut granularity = 2usize;
        while current.len() >= 2 {
            let chunks = partition(&current, granularity);

            let passing_chunk = chunks
                .iter()
                .find(|chunk| test(chunk, &mut memo, &mut steps, &mut calls));
            if let Some(chunk) = passing_chunk {
                current = chunk.clone();
                granularity = 2;
                continue;
            }

            let passing_complement = chunks.iter().find_map(|chunk| {
                let complement: Vec<usize> = current
                    .iter()
                    .copied()
                    .filter(|i| !chunk.contains(i))
                    .collect();
                test(&complement, &mut memo, &mut steps, &mut calls)
                    .then_some(complement)
            });
            if let Some(complement) = passing_complement {
                granularity = (granularity - 1).max(2);
                current = complement;
                continue;
            }

            if granularity >= current.len() {
                // Fully granular: every single-unit removal just failed,
                // so the current set is 1-minimal.
                break;
            }
            granularity = (granularity * 2).min(current.len());
        }
    }

    // Close the trace with the result and its (memoized) passing verdict.
    let verdict = memo[&current];
    debug_assert!(verdict, "minimization result must satisfy the predicate");
    steps.push(TraceStep {
        tested: current.clone(),
        verdict,
    });

    let trace = MinimizationTrace {
        predicate_calls: calls,
        result_indices: current.clone(),
        steps,
    };
    Ok((units.with_kept(&current), trace))
}

/// Splits `indices` into `parts` contiguous chunks whose sizes differ by at
/// most one. Requires `2 <= parts <= indices.len()`.
fn partition(indices: &[usize], parts: usize) -> Vec<Vec<usize>> {
    debug_assert!(parts >= 2 && parts <= indices.len());
    let len = indices.len();
    (0..parts)
        .map(|i| indices[i * len / parts..(i + 1) * len / parts].to_vec())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_units_are_rejected() {
        assert_eq!(
            UnitSet::new(vec!["a".into(), String::new()]),
            Err(DdError::EmptyUnit { index: 1 })
        );
    }

    #[test]
    fn partition_covers_without_overlap() {
        let indices: Vec<usize> = (0..7).collect();
        for parts in 2..=7 {
            let chunks = partition(&indices, parts);
            assert_eq!(chunks.len(), parts);
            let flat: Vec<usize> = chunks.iter().flatten().copied().collect();
            assert_eq!(flat, indices, "parts = {parts}");
            let max = chunks.iter().map(Vec::len).max().unwrap();
            let min = chunks.iter().map(Vec::len).min().unwrap();
            assert!(max - min <= 1, "parts = {parts}");
        }
    }

    #[test]
    fn kept_and_deleted_partition_the_set() {
        let set = UnitSet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let marked = set.with_kept(&[0, 2]);
        assert_eq!(marked.kept_units(), vec!["a", "c"]);
        assert_eq!(marked.deleted_units(), vec!["b"]);
        assert_eq!(marked.join(&[0, 2], " "), "a c");
    }
}
