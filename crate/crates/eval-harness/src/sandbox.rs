//! Process-isolated execution of verifier scripts.
//!
//! A verifier is a standalone interpreted test file: it receives the path of
//! the submitted artifact as its only argument and encodes pass/fail in its
//! exit status. Each run gets a throwaway working directory and a wall-clock
//! timeout; the interpreter runs in isolated mode so user site-packages and
//! environment hooks cannot leak in.

use std::fs;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::EvalError;

/// Wall-clock budget for one verifier run.
pub const VERIFIER_TIMEOUT: Duration = Duration::from_secs(30);

const POLL_INTERVAL: Duration = Duration::from_millis(25);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierOutcome {
    pub passed: bool,
    /// Present when the run ended abnormally (timeout, crash, interpreter
    /// failure) — carried into the report so a zero score is explainable.
    pub diagnostic: Option<String>,
}

/// Run `verifier` against `artifact` in a fresh temp dir, mapping exit
/// status 0 to pass and anything else (including timeout or crash) to fail.
pub fn run_verifier(verifier: &str, artifact: &str) -> Result<VerifierOutcome, EvalError> {
    let dir = tempfile::tempdir()?;
    let verifier_path = dir.path().join("verifier.py");
    let artifact_path = dir.path().join("artifact");
    fs::write(&verifier_path, verifier)?;
    fs::write(&artifact_path, artifact)?;

    let mut child = Command::new("python3")
        .arg("-I")
        .arg(&verifier_path)
        .arg(&artifact_path)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()?;

    let started = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if started.elapsed() >= VERIFIER_TIMEOUT {
            child.kill().ok();
            child.wait().ok();
            return Ok(VerifierOutcome {
                passed: false,
                diagnostic: Some(format!(
                    "verifier exceeded the {}s wall-clock budget",
                    VERIFIER_TIMEOUT.as_secs()
                )),
            });
        }
        std::thread::sleep(POLL_INTERVAL);
    };

    if status.success() {
        return Ok(VerifierOutcome {
            passed: true,
            diagnostic: None,
        });
    }
    let stderr = child
        .stderr
        .take()
        .and_then(|mut pipe| {
            use std::io::Read;
            let mut buf = String::new();
            pipe.read_to_string(&mut buf).ok().map(|_| buf)
        })
        .unwrap_or_default();
    let tail: String = stderr.lines().rev().take(3).collect::<Vec<_>>().into_iter().rev().collect::<Vec<_>>().join("\n");
    Ok(VerifierOutcome {
        passed: false,
        diagnostic: match status.code() {
            Some(1) if tail.is_empty() => None,
            Some(code) => Some(format!("exit {code}: {tail}")),
            None => Some(format!("killed by signal: {tail}")),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passing_verifier_scores_pass() {
        let outcome = run_verifier(
            "import sys\nsys.exit(0 if open(sys.argv[1]).read().strip() == 'ok' else 1)\n",
            "ok",
        )
        .unwrap();
        assert!(outcome.passed);
        assert!(outcome.diagnostic.is_none());
    }

    #[test]
    fn failing_assertion_scores_fail() {
        let outcome = run_verifier(
            "import sys\nsys.exit(0 if open(sys.argv[1]).read().strip() == 'ok' else 1)\n",
            "wrong",
        )
        .unwrap();
        assert!(!outcome.passed);
    }

    #[test]
    fn crashing_verifier_reports_diagnostic() {
        let outcome = run_verifier("raise RuntimeError('boom')\n", "anything").unwrap();
        assert!(!outcome.passed);
        let diagnostic = outcome.diagnostic.expect("crash carries a diagnostic");
        assert!(diagnostic.contains("boom"));
    }
}
