//! The `analyze` command: offline corpus statistics. The tokens and files
//! reports never touch the model gateway; the taxonomy report classifies
//! every body item and therefore needs one (replayable from fixtures).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use llm_gateway::{Gateway, GatewayError};
use skill_model::{parse_skill, Tokenizer};
use stage2_body::{classify_items, cross_validate, segment_body, ContentLabel};

use crate::config::PipelineConfig;
use crate::pipeline::discover_skills;
use crate::{ConfigProblem, ReportKind};

/// Matches the parser's reference-exclusion list so the files report and the
/// optimizer agree on what counts as a script.
const SCRIPT_EXTENSIONS: &[&str] = &[
    "sh", "bash", "zsh", "py", "js", "ts", "rb", "pl", "ps1", "exe", "bin", "so", "dylib",
];

const DESC_BINS: &[(&str, usize, usize)] = &[
    ("1-20", 1, 20),
    ("21-40", 21, 40),
    ("41-80", 41, 80),
    ("81-160", 81, 160),
    (">160", 161, usize::MAX),
];

const BODY_BINS: &[(&str, usize, usize)] = &[
    ("<500", 0, 499),
    ("500-1999", 500, 1999),
    ("2000-4999", 2000, 4999),
    (">=5000", 5000, usize::MAX),
];

const LABEL_ORDER: [ContentLabel; 5] = [
    ContentLabel::CoreRule,
    ContentLabel::Background,
    ContentLabel::Example,
    ContentLabel::Template,
    ContentLabel::Redundant,
];

pub fn analyze(corpus: &Path, report: ReportKind, config: &PipelineConfig) -> anyhow::Result<ExitCode> {
    let skills = discover_skills(corpus)?;
    let output = match report {
        ReportKind::Tokens => tokens_report(&skills),
        ReportKind::Files => files_report(&skills),
        ReportKind::Taxonomy => {
            let gateway = Gateway::new(config.gateway_config()).map_err(|err| match err {
                GatewayError::InvalidConfig(msg) => anyhow::Error::new(ConfigProblem(msg)),
                other => anyhow::Error::new(other).context("starting model gateway"),
            })?;
            taxonomy_report(&skills, &gateway)?
        }
    };
    print!("{output}");
    Ok(ExitCode::SUCCESS)
}

fn percent(part: usize, whole: usize) -> String {
    if whole == 0 {
        "n/a".to_string()
    } else {
        format!("{:.1}%", 100.0 * part as f64 / whole as f64)
    }
}

fn histogram(counts: &[(&str, usize)], total: usize) -> String {
    let mut out = String::new();
    for (label, count) in counts {
        out.push_str(&format!("  {label:<10} {count:>5}  {}\n", percent(*count, total)));
    }
    out
}

fn tokens_report(skills: &[(String, PathBuf)]) -> String {
    let tokenizer = Tokenizer::bundled();
    let mut unreadable = 0usize;
    let mut missing_desc = 0usize;
    let mut short_desc = 0usize;
    let mut desc_counts: Vec<(&str, usize)> = DESC_BINS.iter().map(|(l, _, _)| (*l, 0)).collect();
    let mut body_counts: Vec<(&str, usize)> = BODY_BINS.iter().map(|(l, _, _)| (*l, 0)).collect();
    let mut parsed = 0usize;

    for (key, dir) in skills {
        let skill = match parse_skill(dir) {
            Ok(skill) => skill,
            Err(err) => {
                log::warn!("skipping unreadable skill {key}: {err}");
                unreadable += 1;
                continue;
            }
        };
        parsed += 1;
        let desc_tokens = tokenizer.count(&skill.description);
        if desc_tokens == 0 {
            missing_desc += 1;
        } else {
            if desc_tokens <= 40 {
                short_desc += 1;
            }
            for ((_, lo, hi), slot) in DESC_BINS.iter().zip(&mut desc_counts) {
                if (*lo..=*hi).contains(&desc_tokens) {
                    slot.1 += 1;
                    break;
                }
            }
        }
        let body_tokens = tokenizer.count(&skill.body);
        for ((_, lo, hi), slot) in BODY_BINS.iter().zip(&mut body_counts) {
            if (*lo..=*hi).contains(&body_tokens) {
                slot.1 += 1;
                break;
            }
        }
    }

    let mut out = format!("# Token report — {parsed} skills analyzed ({unreadable} unreadable)\n\n");
    out.push_str(&format!(
        "Missing descriptions: {missing_desc}/{parsed} ({})\n",
        percent(missing_desc, parsed)
    ));
    out.push_str(&format!(
        "Short descriptions (1-40 tokens): {short_desc}/{parsed} ({})\n",
        percent(short_desc, parsed)
    ));
    out.push_str("\nDescription tokens (excluding missing):\n");
    out.push_str(&histogram(&desc_counts, parsed - missing_desc));
    out.push_str("\nBody tokens:\n");
    out.push_str(&histogram(&body_counts, parsed));
    out
}

/// True when the file would be treated as a script (and so excluded from
/// reference text) by the optimizer.
fn is_script(path: &Path) -> bool {
    if let Some(ext) = path.extension().and_then(|e| e.to_str()) {
        if SCRIPT_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) {
            return true;
        }
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        if let Ok(meta) = path.metadata() {
            return meta.permissions().mode() & 0o111 != 0;
        }
    }
    false
}

fn files_report(skills: &[(String, PathBuf)]) -> String {
    let mut single_file = 0usize;
    let mut with_references = 0usize;
    let mut with_scripts = 0usize;
    let total = skills.len();

    for (_, dir) in skills {
        let mut references = false;
        let mut scripts = false;
        for entry in walkdir::WalkDir::new(dir).into_iter().filter_map(Result::ok) {
            let path = entry.path();
            if !entry.file_type().is_file()
                || path == dir.join("SKILL.md")
                || path.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.'))
            {
                continue;
            }
            if is_script(path) {
                scripts = true;
            } else {
                references = true;
            }
        }
        if !references && !scripts {
            single_file += 1;
        }
        if references {
            with_references += 1;
        }
        if scripts {
            with_scripts += 1;
        }
    }

    format!(
        "# File composition — {total} skills\n\n\
         Single-file (SKILL.md only): {single_file} ({})\n\
         With reference files: {with_references} ({})\n\
         With scripts: {with_scripts} ({})\n",
        percent(single_file, total),
        percent(with_references, total),
        percent(with_scripts, total),
    )
}

fn taxonomy_report(skills: &[(String, PathBuf)], gateway: &Gateway) -> anyhow::Result<String> {
    let mut counts = [0usize; 5];
    let mut items_total = 0usize;
    let mut classified_skills = 0usize;
    let mut skipped = 0usize;

    for (key, dir) in skills {
        let skill = match parse_skill(dir) {
            Ok(skill) => skill,
            Err(err) => {
                log::warn!("skipping unreadable skill {key}: {err}");
                skipped += 1;
                continue;
            }
        };
        let items = segment_body(&skill.body);
        if items.is_empty() {
            skipped += 1;
            continue;
        }
        let mut body = match classify_items(gateway, items) {
            Ok(body) => body,
            Err(err @ (GatewayError::ProviderUnreachable { .. } | GatewayError::MissingFixture { .. })) => {
                return Err(anyhow::Error::new(err).context(format!("classifying {key}")));
            }
            Err(err) => {
                log::warn!("classifier gave up on {key}: {err}");
                skipped += 1;
                continue;
            }
        };
        // One neighbour-aware pass smooths out single-item misreads.
        if let Err(err) = cross_validate(gateway, &mut body, 1) {
            log::warn!("cross-validation incomplete for {key}: {err}");
        }
        classified_skills += 1;
        for item in &body.items {
            items_total += 1;
            let slot = LABEL_ORDER.iter().position(|l| *l == item.label).expect("label covered");
            counts[slot] += 1;
        }
    }

    let mut out = format!(
        "# Content taxonomy — {classified_skills} skills, {items_total} items ({skipped} skipped)\n\n"
    );
    for (label, count) in LABEL_ORDER.iter().zip(counts) {
        out.push_str(&format!(
            "  {:<12} {count:>5}  {}\n",
            label.as_str(),
            percent(count, items_total)
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use llm_gateway::{CompletionRequest, GatewayConfig, Mode, Provider};

    fn write_skill(root: &Path, name: &str, description: &str, body: &str) -> PathBuf {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("SKILL.md"),
            format!("---\nname: {name}\ndescription: {description}\n---\n\n{body}"),
        )
        .unwrap();
        dir
    }

    #[test]
    fn tokens_report_counts_missing_descriptions() {
        let tmp = tempfile::tempdir().unwrap();
        write_skill(
            tmp.path(),
            "a",
            "Handles invoice exports for the billing team.",
            "Use the export API.\n",
        );
        write_skill(tmp.path(), "b", "", "Check the ledger.\n");
        write_skill(tmp.path(), "c", "Audits access logs.", "Read the audit log daily.\n");

        let skills = discover_skills(tmp.path()).unwrap();
        let report = tokens_report(&skills);
        assert!(report.contains("3 skills analyzed (0 unreadable)"));
        assert!(report.contains("Missing descriptions: 1/3 (33.3%)"));
        assert!(report.contains("Short descriptions (1-40 tokens): 2/3"));
    }

    #[test]
    fn files_report_classifies_composition() {
        let tmp = tempfile::tempdir().unwrap();
        write_skill(tmp.path(), "bare", "One.", "Body.\n");
        let with_ref = write_skill(tmp.path(), "library", "Two.", "Body.\n");
        std::fs::create_dir_all(with_ref.join("references")).unwrap();
        std::fs::write(with_ref.join("references/guide.md"), "More detail.\n").unwrap();
        let with_script = write_skill(tmp.path(), "tooling", "Three.", "Body.\n");
        std::fs::write(with_script.join("run.py"), "print('hi')\n").unwrap();

        let skills = discover_skills(tmp.path()).unwrap();
        let report = files_report(&skills);
        assert!(report.contains("Single-file (SKILL.md only): 1 (33.3%)"));
        assert!(report.contains("With reference files: 1 (33.3%)"));
        assert!(report.contains("With scripts: 1 (33.3%)"));
    }

    /// Classifier scripted by keyword: items mentioning "example" are
    /// examples, everything else core rules. Only the item under the prompt
    /// marker counts — cross-validation prompts also quote the neighbours.
    struct KeywordClassifier;

    impl Provider for KeywordClassifier {
        fn complete(&self, _model: &str, request: &CompletionRequest) -> Result<String, String> {
            let target = request
                .user
                .split("Item to re-label:")
                .last()
                .unwrap()
                .split("Label this item:")
                .last()
                .unwrap();
            let label = if target.to_lowercase().contains("example") {
                "example"
            } else {
                "core_rule"
            };
            Ok(format!("{{\"label\": \"{label}\"}}"))
        }

        fn kind(&self) -> &'static str {
            "keyword-classifier"
        }
    }

    #[test]
    fn taxonomy_report_matches_hand_count() {
        let tmp = tempfile::tempdir().unwrap();
        write_skill(
            tmp.path(),
            "toy",
            "Classifies things.",
            "Always validate the input first.\n\nExample: validating a form.\n\nNever retry more than twice.\n",
        );
        let skills = discover_skills(tmp.path()).unwrap();

        let gateway = Gateway::with_provider(
            GatewayConfig { mode: Mode::Live, ..GatewayConfig::default() },
            Box::new(KeywordClassifier),
        )
        .unwrap();

        let report = taxonomy_report(&skills, &gateway).unwrap();
        assert!(report.contains("1 skills, 3 items (0 skipped)"));
        let rule_line = report.lines().find(|l| l.contains("core_rule")).unwrap();
        assert!(rule_line.contains("66.7%"), "2 of 3 items are rules: {rule_line}");
        let example_line = report.lines().find(|l| l.contains("example")).unwrap();
        assert!(example_line.contains("33.3%"), "1 of 3 items is an example: {example_line}");
    }
}
