//! On-disk skill format: a directory holding `SKILL.md` (frontmatter +
//! Markdown body) plus any number of reference files. Optimized skills use
//! the same layout with `references/<name>.md` modules that carry `when:` /
//! `topics:` routing metadata in their own frontmatter.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::SkillError;

/// File extensions treated as executable scripts and excluded from parsing.
const SCRIPT_EXTENSIONS: &[&str] = &[
    "sh", "bash", "zsh", "py", "js", "ts", "rb", "pl", "ps1", "exe", "bin", "so", "dylib",
];

/// A parsed skill: routing description, always-loaded body, and the
/// reference files an agent may open on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Skill {
    pub name: String,
    pub description: String,
    pub body: String,
    pub references: Vec<Reference>,
    pub source_dir: PathBuf,
    /// Frontmatter keys other than name/description, preserved in order.
    pub extra_frontmatter: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// Path relative to the skill directory, `/`-separated.
    pub path: String,
    pub text: String,
}

impl Skill {
    pub fn has_empty_body(&self) -> bool {
        self.body.trim().is_empty()
    }

    pub fn has_description(&self) -> bool {
        !self.description.trim().is_empty()
    }
}

/// Where a reference module came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModuleOrigin {
    BodyDerivedExamples,
    BodyDerivedTemplates,
    BodyDerivedBackground,
    External,
}

impl fmt::Display for ModuleOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModuleOrigin::BodyDerivedExamples => "body-derived-examples",
            ModuleOrigin::BodyDerivedTemplates => "body-derived-templates",
            ModuleOrigin::BodyDerivedBackground => "body-derived-background",
            ModuleOrigin::External => "external",
        };
        f.write_str(s)
    }
}

/// An on-demand module with the metadata the routing layer shows the agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModule {
    pub path: String,
    pub content: String,
    /// One-sentence condition describing when the module should be loaded.
    pub when_clause: String,
    /// 3–5 keywords summarizing the module.
    pub topics: Vec<String>,
    pub origin: ModuleOrigin,
}

impl ReferenceModule {
    /// Checks the structural constraints every emitted module must satisfy.
    pub fn validate(&self, tokenizer: &crate::Tokenizer) -> Result<(), String> {
        if self.when_clause.trim().is_empty() {
            return Err(format!("{}: empty when-clause", self.path));
        }
        if !(3..=5).contains(&self.topics.len()) {
            return Err(format!(
                "{}: {} topics (expected 3-5)",
                self.path,
                self.topics.len()
            ));
        }
        let tokens = tokenizer.count(&self.content);
        if tokens < 30 {
            return Err(format!("{}: {} tokens (min 30)", self.path, tokens));
        }
        Ok(())
    }
}

/// The output of the restructuring pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedSkill {
    pub name: String,
    pub description: String,
    /// Always-loaded core body.
    pub core: String,
    pub reference_modules: Vec<ReferenceModule>,
    /// Ordered log of every transformation applied.
    pub provenance: Vec<String>,
    #[serde(default)]
    pub extra_frontmatter: Vec<(String, String)>,
}

/// Parses a skill directory. Frontmatter is the block between the first two
/// `---` lines; every other file under the directory becomes a reference,
/// except executables and dotfiles.
pub fn parse_skill(dir: impl AsRef<Path>) -> Result<Skill, SkillError> {
    let dir = dir.as_ref();
    let skill_md = dir.join("SKILL.md");
    if !skill_md.is_file() {
        return Err(SkillError::MissingSkillFile(dir.to_path_buf()));
    }
    let raw = std::fs::read_to_string(&skill_md)?;
    let (fm, body) = split_frontmatter(&raw, &skill_md)?;

    let mut name = String::new();
    let mut description = String::new();
    let mut extra = Vec::new();
    for (key, value) in fm {
        match key.as_str() {
            "name" => name = value,
            "description" => description = value,
            _ => extra.push((key, value)),
        }
    }
    if name.is_empty() {
        // Directory name is the conventional fallback identifier.
        name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "unnamed-skill".into());
    }

    let mut references = Vec::new();
    collect_references(dir, dir, &mut references)?;
    references.sort_by(|a, b| a.path.cmp(&b.path));

    Ok(Skill {
        name,
        description,
        body: body.to_string(),
        references,
        source_dir: dir.to_path_buf(),
        extra_frontmatter: extra,
    })
}

fn collect_references(
    root: &Path,
    dir: &Path,
    out: &mut Vec<Reference>,
) -> Result<(), SkillError> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        let file_name = entry.file_name();
        let file_name = file_name.to_string_lossy();
        if file_name.starts_with('.') {
            continue;
        }
        if path.is_dir() {
            collect_references(root, &path, out)?;
            continue;
        }
        if dir == root && file_name == "SKILL.md" {
            continue;
        }
        if is_executable(&path) {
            continue;
        }
        // Binary files are not loadable reference text; skip them.
        let Ok(text) = std::fs::read_to_string(&path) else {
            continue;
        };
        let rel = path
            .strip_prefix(root)
            .expect("entry is under the walk root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        out.push(Reference { path: rel, text });
    }
    Ok(())
}

fn is_executable(path: &Path) -> bool {
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

/// Splits a file into frontmatter pairs and the body. The body is the text
/// after the closing `---`, minus one canonical blank separator line.
fn split_frontmatter<'a>(
    raw: &'a str,
    path: &Path,
) -> Result<(Vec<(String, String)>, &'a str), SkillError> {
    let Some(rest) = raw.strip_prefix("---\n").or_else(|| raw.strip_prefix("---\r\n")) else {
        // No frontmatter block at all: the whole file is body.
        return Ok((Vec::new(), raw));
    };
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut offset = raw.len() - rest.len();
    let mut line_no = 1usize;
    let mut closed = false;
    for line in rest.split_inclusive('\n') {
        line_no += 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        offset += line.len();
        if trimmed == "---" {
            closed = true;
            break;
        }
        if trimmed.trim().is_empty() {
            continue;
        }
        if trimmed.starts_with(' ') || trimmed.starts_with('\t') {
            // Continuation of the previous value.
            match pairs.last_mut() {
                Some((_, value)) => {
                    if !value.is_empty() {
                        value.push(' ');
                    }
                    value.push_str(trimmed.trim());
                }
                None => {
                    return Err(SkillError::MalformedFrontmatter {
                        path: path.to_path_buf(),
                        line: line_no,
                        reason: "continuation line before any key".into(),
                    })
                }
            }
            continue;
        }
        let Some((key, value)) = trimmed.split_once(':') else {
            return Err(SkillError::MalformedFrontmatter {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!("expected `key: value`, got {trimmed:?}"),
            });
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    if !closed {
        return Err(SkillError::MalformedFrontmatter {
            path: path.to_path_buf(),
            line: line_no,
            reason: "unterminated frontmatter block (missing closing ---)".into(),
        });
    }
    let mut body = &raw[offset..];
    // serialize_* writes one blank line between frontmatter and content;
    // strip exactly that much so round-trips are stable.
    if let Some(stripped) = body.strip_prefix("\r\n").or_else(|| body.strip_prefix("\n")) {
        body = stripped;
    }
    Ok((pairs, body))
}

/// Writes an optimized skill to `out_dir`: `SKILL.md` with the compressed
/// description and core, one `references/<name>.md` per module, and a
/// machine-readable provenance log.
pub fn serialize_optimized(
    skill: &OptimizedSkill,
    out_dir: impl AsRef<Path>,
) -> Result<PathBuf, SkillError> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;

    let mut skill_md = String::new();
    skill_md.push_str("---\n");
    push_fm_line(&mut skill_md, "name", &skill.name);
    push_fm_line(&mut skill_md, "description", &skill.description);
    for (key, value) in &skill.extra_frontmatter {
        push_fm_line(&mut skill_md, key, value);
    }
    skill_md.push_str("---\n\n");
    skill_md.push_str(&skill.core);
    if !skill.core.ends_with('\n') {
        skill_md.push('\n');
    }
    std::fs::write(out_dir.join("SKILL.md"), &skill_md)?;

    for module in &skill.reference_modules {
        let rel = Path::new(&module.path);
        if rel.is_absolute() || module.path.contains("..") {
            return Err(SkillError::UnknownReference(module.path.clone()));
        }
        let target = out_dir.join(rel);
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut text = String::new();
        text.push_str("---\n");
        push_fm_line(&mut text, "when", &module.when_clause);
        push_fm_line(&mut text, "topics", &format!("[{}]", module.topics.join(", ")));
        push_fm_line(&mut text, "origin", &module.origin.to_string());
        text.push_str("---\n\n");
        text.push_str(&module.content);
        if !module.content.ends_with('\n') {
            text.push('\n');
        }
        std::fs::write(target, &text)?;
    }

    if !skill.provenance.is_empty() {
        let log = serde_json::to_string_pretty(&skill.provenance)
            .expect("provenance serializes as a JSON array");
        std::fs::write(out_dir.join("provenance.json"), log + "\n")?;
    }

    Ok(out_dir.to_path_buf())
}

/// Reads back a directory produced by [`serialize_optimized`].
pub fn parse_optimized(dir: impl AsRef<Path>) -> Result<OptimizedSkill, SkillError> {
    let dir = dir.as_ref();
    let skill = parse_skill(dir)?;
    let mut modules = Vec::new();
    for reference in &skill.references {
        if reference.path == "provenance.json" {
            continue;
        }
        let full = dir.join(&reference.path);
        let (fm, content) = split_frontmatter(&reference.text, &full)?;
        let mut when_clause = String::new();
        let mut topics = Vec::new();
        let mut origin = ModuleOrigin::External;
        for (key, value) in fm {
            match key.as_str() {
                "when" => when_clause = value,
                "topics" => {
                    topics = value
                        .trim_start_matches('[')
                        .trim_end_matches(']')
                        .split(',')
                        .map(|t| t.trim().trim_matches('"').to_string())
                        .filter(|t| !t.is_empty())
                        .collect();
                }
                "origin" => {
                    origin = match value.as_str() {
                        "body-derived-examples" => ModuleOrigin::BodyDerivedExamples,
                        "body-derived-templates" => ModuleOrigin::BodyDerivedTemplates,
                        "body-derived-background" => ModuleOrigin::BodyDerivedBackground,
                        _ => ModuleOrigin::External,
                    };
                }
                _ => {}
            }
        }
        modules.push(ReferenceModule {
            path: reference.path.clone(),
            content: content.to_string(),
            when_clause,
            topics,
            origin,
        });
    }
    let provenance = match std::fs::read_to_string(dir.join("provenance.json")) {
        Ok(raw) => serde_json::from_str(&raw).unwrap_or_default(),
        Err(_) => Vec::new(),
    };
    Ok(OptimizedSkill {
        name: skill.name,
        description: skill.description,
        core: skill.body,
        reference_modules: modules,
        provenance,
        extra_frontmatter: skill.extra_frontmatter,
    })
}

fn single_line(text: &str) -> String {
    text.replace(['\r', '\n'], " ").trim().to_string()
}

fn push_fm_line(buf: &mut String, key: &str, value: &str) {
    let key = single_line(key);
    let value = single_line(value);
    if value.is_empty() {
        buf.push_str(&format!("{key}:\n"));
    } else {
        buf.push_str(&format!("{key}: {value}\n"));
    }
}

/// Deterministic summary of reference token sizes, used by reports.
pub fn reference_token_map(
    skill: &Skill,
    tokenizer: &crate::Tokenizer,
) -> BTreeMap<String, usize> {
    skill
        .references
        .iter()
        .map(|r| (r.path.clone(), tokenizer.count(&r.text)))
        .collect()
}
