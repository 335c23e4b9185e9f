//! The `report` command: rebuild summary.json and summary.md for a finished
//! run from its per-skill reports. Useful after hand-inspecting or pruning
//! individual reports  — the summary carries no state of its own.

use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;

use crate::summary::{build_summary, render_markdown, SkillReport};

pub fn rerender(run_dir: &Path) -> anyhow::Result<ExitCode> {
    let reports_dir = run_dir.join("reports");
    if !reports_dir.is_dir() {
        anyhow::bail!(
            "{} has no reports/ directory; is it an optimize output?",
            run_dir.display()
        );
    }

    let mut paths: Vec<_> = std::fs::read_dir(&reports_dir)?
        .filter_map(Result::ok)
        .map(|entry| entry.path())
        .filter(|path| path.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();

    let mut reports = Vec::with_capacity(paths.len());
    for path in &paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let report: SkillReport = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        reports.push(report);
    }

    let summary = build_summary(&reports);
    std::fs::write(
        run_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    std::fs::write(run_dir.join("summary.md"), render_markdown(&summary))?;
    println!(
        "re-rendered summary for {} skills at {}",
        summary.skills_total,
        run_dir.join("summary.md").display()
    );
    Ok(ExitCode::SUCCESS)
}
