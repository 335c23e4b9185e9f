//! Phase-2 ground truth: does a live agent actually invoke the skill for a
//! query? The adapter abstraction keeps this stage agnostic to any one
//! agent CLI — production wires a command template, tests wire a script.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use skill_model::Skill;

use crate::error::Stage1Error;

/// Issues one query against an agent with the skill (under a candidate
/// description) deployed, and reports whether the skill got invoked.
pub trait TriggerAdapter: Send + Sync {
    /// False when no agent runtime is configured; phase 2 is then skipped
    /// and outcomes are reported as unvalidated.
    fn available(&self) -> bool;

    fn trigger(&self, query: &str, desc: &str, skill: &Skill) -> Result<bool, Stage1Error>;
}

/// Default adapter: no agent runtime configured.
#[derive(Debug, Default)]
pub struct UnavailableAdapter;

impl TriggerAdapter for UnavailableAdapter {
    fn available(&self) -> bool {
        false
    }

    fn trigger(&self, _query: &str, _desc: &str, _skill: &Skill) -> Result<bool, Stage1Error> {
        Err(Stage1Error::AdapterUnavailable)
    }
}

/// Test double: verdicts come from a closure over `(query, desc)`.
pub struct ScriptedAdapter<F>
where
    F: Fn(&str, &str) -> bool + Send + Sync,
{
    verdict: F,
}

impl<F> ScriptedAdapter<F>
where
    F: Fn(&str, &str) -> bool + Send + Sync,
{
    pub fn new(verdict: F) -> Self {
        ScriptedAdapter { verdict }
    }
}

impl<F> TriggerAdapter for ScriptedAdapter<F>
where
    F: Fn(&str, &str) -> bool + Send + Sync,
{
    fn available(&self) -> bool {
        true
    }

    fn trigger(&self, query: &str, desc: &str, _skill: &Skill) -> Result<bool, Stage1Error> {
        Ok((self.verdict)(query, desc))
    }
}

/// Runs a configurable agent CLI. The skill is deployed into a sandbox
/// directory, the command template is expanded (`{query}`, `{skill_dir}`),
/// and stdout is parsed as a JSONL event stream.
pub struct CommandAdapter {
    /// Shell command with `{query}` and `{skill_dir}` placeholders.
    pub command_template: String,
    pub timeout: Duration,
    /// JSON field naming the event type in each stream line.
    pub event_type_field: String,
    /// Event type emitted when a skill is invoked.
    pub invocation_event: String,
    /// JSON field carrying the invoked skill's name.
    pub skill_field: String,
}

impl CommandAdapter {
    pub fn new(command_template: impl Into<String>) -> Self {
        CommandAdapter {
            command_template: command_template.into(),
            timeout: Duration::from_secs(120),
            event_type_field: "type".into(),
            invocation_event: "skill_invoked".into(),
            skill_field: "skill".into(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn deploy(&self, dir: &Path, desc: &str, skill: &Skill) -> Result<(), Stage1Error> {
        let skill_dir = dir.join("skills").join(&skill.name);
        std::fs::create_dir_all(&skill_dir)?;
        // Frontmatter values are line-oriented; a candidate description is
        // prose and may contain newlines only if something upstream went
        // wrong, so flatten defensively.
        let flat_desc = desc.replace(['\r', '\n'], " ");
        let contents = format!(
            "---\nname: {}\ndescription: {}\n---\n\n{}",
            skill.name, flat_desc, skill.body
        );
        std::fs::write(skill_dir.join("SKILL.md"), contents)?;
        Ok(())
    }

    fn run(&self, command: &str) -> Result<String, Stage1Error> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;

        // Drain stdout on a separate thread so a chatty agent can't fill
        // the pipe and deadlock against the timeout poll.
        let mut stdout = child.stdout.take().expect("stdout was piped");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            stdout.read_to_string(&mut buf).map(|_| buf)
        });

        let started = Instant::now();
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if started.elapsed() > self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                let _ = reader.join();
                return Err(Stage1Error::AgentTimeout {
                    timeout: self.timeout,
                });
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let output = reader
            .join()
            .expect("stdout reader does not panic")
            .map_err(Stage1Error::AdapterIo)?;
        Ok(output)
    }

    fn stream_shows_invocation(&self, output: &str, skill_name: &str) -> Result<bool, Stage1Error> {
        for line in output.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let event: serde_json::Value = serde_json::from_str(line).map_err(|e| {
                Stage1Error::MalformedEventStream(format!(
                    "unparseable event line {:?}: {e}",
                    line.chars().take(120).collect::<String>()
                ))
            })?;
            if event.get(&self.event_type_field).and_then(|v| v.as_str())
                == Some(self.invocation_event.as_str())
                && event.get(&self.skill_field).and_then(|v| v.as_str()) == Some(skill_name)
            {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

impl TriggerAdapter for CommandAdapter {
    fn available(&self) -> bool {
        true
    }

    fn trigger(&self, query: &str, desc: &str, skill: &Skill) -> Result<bool, Stage1Error> {
        let sandbox = tempfile::tempdir()?;
        self.deploy(sandbox.path(), desc, skill)?;
        let command = self
            .command_template
            .replace("{query}", &shell_quote(query))
            .replace(
                "{skill_dir}",
                &shell_quote(&sandbox.path().join("skills").to_string_lossy()),
            );
        let output = self.run(&command)?;
        self.stream_shows_invocation(&output, &skill.name)
    }
}

fn shell_quote(text: &str) -> String {
    format!("'{}'", text.replace('\'', r"'\''"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_quoting_survives_embedded_quotes() {
        assert_eq!(shell_quote("it's"), r"'it'\''s'");
    }

    #[test]
    fn invocation_match_requires_type_and_name() {
        let adapter = CommandAdapter::new("true");
        let stream = concat!(
            "{\"type\":\"turn_start\"}\n",
            "{\"type\":\"skill_invoked\",\"skill\":\"other\"}\n",
            "{\"type\":\"skill_invoked\",\"skill\":\"target\"}\n",
        );
        assert!(adapter.stream_shows_invocation(stream, "target").unwrap());
        assert!(!adapter.stream_shows_invocation(stream, "absent").unwrap());
    }

    #[test]
    fn malformed_line_is_an_error_not_a_false() {
        let adapter = CommandAdapter::new("true");
        let err = adapter
            .stream_shows_invocation("not json\n", "target")
            .unwrap_err();
        assert!(matches!(err, Stage1Error::MalformedEventStream(_)));
    }
}
