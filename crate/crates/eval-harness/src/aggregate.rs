//! Corpus-level metrics over per-skill gate reports.

use serde::{Deserialize, Serialize};

use crate::gate2::GateReport;

/// One skill's contribution to the corpus rollup.
pub struct SkillOutcome<'a> {
    /// Body compression achieved for the skill, in [0,1].
    pub compression_ratio: f64,
    pub report: &'a GateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetMetrics {
    pub skills: usize,
    /// Fraction of skills whose mean compressed score is at least the
    /// mean inline baseline.
    pub pass_rate: f64,
    /// Fraction strictly above the baseline.
    pub improvement_rate: f64,
    pub mean_retention: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionBin {
    pub label: String,
    pub skills: usize,
    pub mean_retention: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetrics {
    pub all: SubsetMetrics,
    /// Same metrics restricted to skills where some condition scored
    /// below 1.0 — the cases where compression could possibly matter.
    pub non_ceiling: SubsetMetrics,
    /// Mean retention grouped by how aggressively each skill was compressed.
    pub retention_by_compression: Vec<RetentionBin>,
}

const BIN_LABELS: [&str; 5] = ["<20%", "20-40%", "40-60%", "60-80%", ">80%"];

/// Bin label for a compression ratio in [0,1].
pub fn compression_bin(ratio: f64) -> &'static str {
    if ratio < 0.2 {
        BIN_LABELS[0]
    } else if ratio < 0.4 {
        BIN_LABELS[1]
    } else if ratio < 0.6 {
        BIN_LABELS[2]
    } else if ratio < 0.8 {
        BIN_LABELS[3]
    } else {
        BIN_LABELS[4]
    }
}

fn subset_metrics<'a>(outcomes: impl Iterator<Item = &'a SkillOutcome<'a>>) -> SubsetMetrics {
    let mut skills = 0usize;
    let mut passed = 0usize;
    let mut improved = 0usize;
    let mut retention_sum = 0.0;
    for outcome in outcomes {
        skills += 1;
        if outcome.report.mean_score_c >= outcome.report.mean_score_a {
            passed += 1;
        }
        if outcome.report.improvement {
            improved += 1;
        }
        retention_sum += outcome.report.mean_retention;
    }
    if skills == 0 {
        return SubsetMetrics {
            skills: 0,
            pass_rate: 0.0,
            improvement_rate: 0.0,
            mean_retention: 0.0,
        };
    }
    SubsetMetrics {
        skills,
        pass_rate: passed as f64 / skills as f64,
        improvement_rate: improved as f64 / skills as f64,
        mean_retention: retention_sum / skills as f64,
    }
}

/// Roll per-skill gate reports up into corpus metrics. An empty input yields
/// all-zero metrics so a run over an empty corpus still produces a summary.
pub fn aggregate_report(outcomes: &[SkillOutcome<'_>]) -> CorpusMetrics {
    let all = subset_metrics(outcomes.iter());
    let non_ceiling = subset_metrics(outcomes.iter().filter(|o| !o.report.ceiling));
    let retention_by_compression = BIN_LABELS
        .iter()
        .map(|label| {
            let members: Vec<&SkillOutcome> = outcomes
                .iter()
                .filter(|o| compression_bin(o.compression_ratio) == *label)
                .collect();
            let mean_retention = if members.is_empty() {
                0.0
            } else {
                members.iter().map(|o| o.report.mean_retention).sum::<f64>()
                    / members.len() as f64
            };
            RetentionBin {
                label: (*label).to_string(),
                skills: members.len(),
                mean_retention,
            }
        })
        .collect();
    CorpusMetrics {
        all,
        non_ceiling,
        retention_by_compression,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_edges_follow_interval_membership() {
        assert_eq!(compression_bin(0.0), "<20%");
        assert_eq!(compression_bin(0.2), "20-40%");
        assert_eq!(compression_bin(0.43), "40-60%");
        assert_eq!(compression_bin(0.6), "60-80%");
        assert_eq!(compression_bin(0.95), ">80%");
    }

    #[test]
    fn empty_corpus_aggregates_to_zeros() {
        let metrics = aggregate_report(&[]);
        assert_eq!(metrics.all.skills, 0);
        assert_eq!(metrics.all.pass_rate, 0.0);
        assert_eq!(metrics.retention_by_compression.len(), 5);
        assert!(metrics.retention_by_compression.iter().all(|b| b.skills == 0));
    }
}
