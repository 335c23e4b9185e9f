//! Append-only JSONL fixture store: one recorded request/response per line.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::GatewayError;
use crate::request::Fixture;

/// Loads a store into a digest → response map. Later lines win, so a
/// re-recorded run simply supersedes earlier entries.
pub fn load_fixture_map(path: &Path) -> Result<HashMap<String, String>, GatewayError> {
    let raw = std::fs::read_to_string(path).map_err(|e| GatewayError::FixtureStoreCorrupt {
        path: path.to_path_buf(),
        line: 0,
        reason: format!("unreadable: {e}"),
    })?;
    let mut map = HashMap::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fixture: Fixture =
            serde_json::from_str(line).map_err(|e| GatewayError::FixtureStoreCorrupt {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })?;
        map.insert(fixture.request_digest, fixture.response);
    }
    Ok(map)
}

/// Open (creating if needed) a store for appending.
pub fn open_for_append(path: &Path) -> Result<File, GatewayError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(OpenOptions::new().create(true).append(true).open(path)?)
}

pub fn append_fixture(file: &mut File, fixture: &Fixture) -> Result<(), GatewayError> {
    let line = serde_json::to_string(fixture).expect("fixtures serialize");
    file.write_all(line.as_bytes())?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

/// Counts fixtures in a store, tolerating blank lines.
pub fn fixture_count(path: &Path) -> Result<usize, GatewayError> {
    Ok(load_lines(path)?.len())
}

fn load_lines(path: &Path) -> Result<Vec<String>, GatewayError> {
    let raw = std::fs::read_to_string(path).map_err(|e| GatewayError::FixtureStoreCorrupt {
        path: path.to_path_buf(),
        line: 0,
        reason: format!("unreadable: {e}"),
    })?;
    Ok(raw
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

/// Convenience wrapper tying a path to its parsed entries, used by tests
/// and the CLI `report` command.
pub struct FixtureStore {
    pub path: PathBuf,
}

impl FixtureStore {
    pub fn entries(&self) -> Result<Vec<Fixture>, GatewayError> {
        load_lines(&self.path)?
            .iter()
            .enumerate()
            .map(|(i, line)| {
                serde_json::from_str(line).map_err(|e| GatewayError::FixtureStoreCorrupt {
                    path: self.path.clone(),
                    line: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect()
    }
}
