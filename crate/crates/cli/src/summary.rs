//! Report data model shared by `optimize` and `report`: per-skill JSON
//! reports and the corpus summary folded from them. Every summary number is
//! recomputed from the per-skill reports alone, so `report` can re-render a
//! run without any other state.

use eval_harness::{aggregate_report, CorpusMetrics, GateReport, SkillOutcome};
use serde::{Deserialize, Serialize};
use stage1_routing::Stage1Report;
use stage2_body::{Gate2Status, Stage2Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillStatus {
    Optimized,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleTokens {
    pub path: String,
    pub tokens: usize,
}

/// Exact token ledger for one skill, measured on the serialized output (so
/// the numbers can be re-derived from the emitted files).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAccounting {
    pub description_before: usize,
    pub description_after: usize,
    pub body_before: usize,
    pub core_after: usize,
    /// Original reference files.
    pub references_before: usize,
    /// Reference modules carried over from original files (deduplicated or
    /// kept verbatim); body-derived modules are counted separately because
    /// they never load unless asked for.
    pub references_after: usize,
    /// body + references.
    pub total_before: usize,
    /// core + carried-over reference modules.
    pub total_after: usize,
    /// description + body: what one invocation used to inject.
    pub invocation_before: usize,
    /// description + core: what one invocation injects now.
    pub invocation_after: usize,
    /// On-demand modules split out of the body.
    pub ondemand_modules: Vec<ModuleTokens>,
}

/// Everything recorded about one skill's run; serialized to
/// `reports/<skill>.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkillReport {
    pub skill: String,
    pub status: SkillStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage1: Option<Stage1Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage2: Option<Stage2Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<GateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<TokenAccounting>,
}

impl SkillReport {
    pub fn failed(skill: impl Into<String>, error: impl Into<String>) -> Self {
        SkillReport {
            skill: skill.into(),
            status: SkillStatus::Failed,
            error: Some(error.into()),
            stage1: None,
            stage2: None,
            eval: None,
            tokens: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusTokens {
    pub description_before: usize,
    pub description_after: usize,
    pub body_before: usize,
    pub core_after: usize,
    pub references_before: usize,
    pub references_after: usize,
    pub total_before: usize,
    pub total_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeforeAfter {
    pub before: usize,
    pub after: usize,
}

/// One row of the per-skill table inside the summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkillLine {
    pub skill: String,
    pub status: SkillStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<BeforeAfter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BeforeAfter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate1_passed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate2: Option<Gate2Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_rounds: Option<usize>,
}

/// The corpus summary written to `summary.json` / `summary.md`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub skills_total: usize,
    pub optimized: usize,
    pub failed: usize,
    pub tokens: CorpusTokens,
    /// Retention rollup over skills whose task gate actually ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retention: Option<CorpusMetrics>,
    pub skills: Vec<SkillLine>,
}

pub fn build_summary(reports: &[SkillReport]) -> RunSummary {
    let mut tokens = CorpusTokens::default();
    let mut lines = Vec::with_capacity(reports.len());
    let mut outcomes = Vec::new();

    for report in reports {
        if let Some(ledger) = &report.tokens {
            tokens.description_before += ledger.description_before;
            tokens.description_after += ledger.description_after;
            tokens.body_before += ledger.body_before;
            tokens.core_after += ledger.core_after;
            tokens.references_before += ledger.references_before;
            tokens.references_after += ledger.references_after;
            tokens.total_before += ledger.total_before;
            tokens.total_after += ledger.total_after;
        }
        if let (Some(stage2), Some(eval)) = (&report.stage2, &report.eval) {
            outcomes.push(SkillOutcome {
                compression_ratio: stage2.compression_ratio,
                report: eval,
            });
        }
        lines.push(SkillLine {
            skill: report.skill.clone(),
            status: report.status,
            error: report.error.clone(),
            description: report.stage1.as_ref().map(|s| BeforeAfter {
                before: s.original_tokens,
                after: s.final_tokens,
            }),
            body: report.stage2.as_ref().map(|s| BeforeAfter {
                before: s.core_tokens_before,
                after: s.core_tokens_after,
            }),
            gate1_passed: report.stage2.as_ref().map(|s| s.gate1.all_passed()),
            gate2: report.stage2.as_ref().map(|s| s.gate2.status),
            feedback_rounds: report.stage2.as_ref().map(|s| s.feedback.len()),
        });
    }

    RunSummary {
        skills_total: reports.len(),
        optimized: reports.iter().filter(|r| r.status == SkillStatus::Optimized).count(),
        failed: reports.iter().filter(|r| r.status == SkillStatus::Failed).count(),
        tokens,
        retention: if outcomes.is_empty() { None } else { Some(aggregate_report(&outcomes)) },
        skills: lines,
    }
}

fn saved(before: usize, after: usize) -> String {
    if before == 0 {
        return "n/a".to_string();
    }
    format!("{:.1}%", 100.0 * (1.0 - after as f64 / before as f64))
}

fn before_after(pair: &Option<BeforeAfter>) -> String {
    match pair {
        Some(BeforeAfter { before, after }) => format!("{before} → {after}"),
        None => "—".to_string(),
    }
}

fn gate2_name(status: Gate2Status) -> &'static str {
    match status {
        Gate2Status::Pass => "pass",
        Gate2Status::Fail => "fail",
        Gate2Status::NotRun => "not run",
    }
}

pub fn render_markdown(summary: &RunSummary) -> String {
    let mut md = String::from("# Skill optimization summary\n\n");
    md.push_str(&format!(
        "- Skills: {} total — {} optimized, {} failed\n",
        summary.skills_total, summary.optimized, summary.failed
    ));
    let t = &summary.tokens;
    md.push_str(&format!(
        "- Description tokens: {} → {} ({} saved)\n",
        t.description_before,
        t.description_after,
        saved(t.description_before, t.description_after)
    ));
    md.push_str(&format!(
        "- Body tokens: {} → {} ({} saved)\n",
        t.body_before,
        t.core_after,
        saved(t.body_before, t.core_after)
    ));
    md.push_str(&format!(
        "- Reference tokens: {} → {} ({} saved)\n",
        t.references_before,
        t.references_after,
        saved(t.references_before, t.references_after)
    ));
    md.push_str(&format!(
        "- Body + references: {} → {} ({} saved)\n",
        t.total_before,
        t.total_after,
        saved(t.total_before, t.total_after)
    ));

    md.push_str("\n| skill | status | description | body | gate 1 | gate 2 | feedback |\n");
    md.push_str("| --- | --- | --- | --- | --- | --- | --- |\n");
    for line in &summary.skills {
        let status = match (&line.status, &line.error) {
            (SkillStatus::Failed, Some(error)) => format!("failed ({error})"),
            (SkillStatus::Failed, None) => "failed".to_string(),
            (SkillStatus::Optimized, _) => "optimized".to_string(),
        };
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            line.skill,
            status.replace('|', "/"),
            before_after(&line.description),
            before_after(&line.body),
            line.gate1_passed.map_or("—".into(), |p: bool| if p { "pass".to_string() } else { "rolled back".to_string() }),
            line.gate2.map_or("—", gate2_name),
            line.feedback_rounds.map_or("—".to_string(), |n| n.to_string()),
        ));
    }

    if let Some(retention) = &summary.retention {
        md.push_str("\n## Retention evaluation\n\n");
        for (label, subset) in [("All gated skills", &retention.all), ("Non-ceiling skills", &retention.non_ceiling)] {
            if subset.skills == 0 {
                md.push_str(&format!("- {label}: none\n"));
            } else {
                md.push_str(&format!(
                    "- {label} (n={}): pass rate {:.1}%, improvement rate {:.1}%, mean retention {:.3}\n",
                    subset.skills,
                    100.0 * subset.pass_rate,
                    100.0 * subset.improvement_rate,
                    subset.mean_retention
                ));
            }
        }
        md.push_str("- Retention by body compression: ");
        let bins: Vec<String> = retention
            .retention_by_compression
            .iter()
            .map(|bin| {
                if bin.skills == 0 {
                    format!("{} —", bin.label)
                } else {
                    format!("{} {:.3} (n={})", bin.label, bin.mean_retention, bin.skills)
                }
            })
            .collect();
        md.push_str(&bins.join(" | "));
        md.push('\n');
    }

    md
}
