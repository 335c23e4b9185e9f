//! The `validate` command: parse one skill directory and check the
//! structural contracts, without running any pipeline stage.

use std::path::Path;
use std::process::ExitCode;

use skill_model::{parse_optimized, parse_skill, Tokenizer};

/// Collects contract violations for a directory. An optimized layout is
/// checked module by module; a plain skill only has to parse (and carry a
/// description — a skill the router cannot see is flagged, not failed).
fn check(dir: &Path, tokenizer: &Tokenizer) -> Result<Vec<String>, String> {
    let optimized = parse_optimized(dir).map_err(|err| err.to_string())?;
    let mut violations = Vec::new();

    if optimized.name.trim().is_empty() {
        violations.push("missing skill name".to_string());
    }
    if optimized.description.trim().is_empty() {
        violations.push("missing description: the skill cannot be routed to".to_string());
    }
    if optimized.core.trim().is_empty() {
        violations.push("empty body".to_string());
    }
    for module in &optimized.reference_modules {
        if let Err(problem) = module.validate(tokenizer) {
            violations.push(problem);
        }
    }
    Ok(violations)
}

pub fn validate(skill_dir: &Path) -> anyhow::Result<ExitCode> {
    let tokenizer = Tokenizer::bundled();
    match check(skill_dir, &tokenizer) {
        Ok(violations) if violations.is_empty() => {
            let skill = parse_skill(skill_dir)?;
            println!(
                "ok: {} ({} reference files)",
                skill.name,
                skill.references.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Ok(violations) => {
            for violation in &violations {
                println!("violation: {violation}");
            }
            println!("{}: {} violations", skill_dir.display(), violations.len());
            Ok(ExitCode::from(1))
        }
        Err(parse_error) => {
            println!("unparseable: {parse_error}");
            Ok(ExitCode::from(1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_skill_with_description_passes() {
        let tmp = tempfile::tempdir().unwrap();
        std::fs::write(
            tmp.path().join("SKILL.md"),
            "---\nname: tidy\ndescription: Cleans workspace directories.\n---\n\nDelete stale builds.\n",
        )
        .unwrap();
        let tokenizer = Tokenizer::bundled();
        assert!(check(tmp.path(), &tokenizer).unwrap().is_empty());
    }

    #[test]
    fn missing_description_and_bad_module_are_reported() {
        let tmp = tempfile::tempdir().unwrap();
        std::fs::write(
            tmp.path().join("SKILL.md"),
            "---\nname: quiet\ndescription:\n---\n\nBody text.\n",
        )
        .unwrap();
        std::fs::create_dir_all(tmp.path().join("references")).unwrap();
        // A module with frontmatter but too few topics and a tiny body.
        std::fs::write(
            tmp.path().join("references/notes.md"),
            "---\nwhen: you need notes\ntopics: [one]\norigin: external\n---\n\nShort.\n",
        )
        .unwrap();

        let tokenizer = Tokenizer::bundled();
        let violations = check(tmp.path(), &tokenizer).unwrap();
        assert!(violations.iter().any(|v| v.contains("missing description")));
        assert!(violations.iter().any(|v| v.contains("references/notes.md")));
    }

    #[test]
    fn directory_without_skill_file_is_unparseable() {
        let tmp = tempfile::tempdir().unwrap();
        let tokenizer = Tokenizer::bundled();
        assert!(check(tmp.path(), &tokenizer).is_err());
    }
}
