//! Pipeline settings: defaults, `key: value` config file, and
//! `SKILLDEBLOAT_*` environment overrides.

use std::path::{Path, PathBuf};

use llm_gateway::{GatewayConfig, Mode, RoleModels};
use stage1_routing::Stage1Config;
use stage2_body::{Stage2Config, MIN_MODULE_TOKENS};

use crate::ConfigProblem;

/// Everything the pipeline needs to run, resolved from defaults, an optional
/// config file, environment variables, and command-line flags (in that
/// order, later sources winning).
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub fixture_path: Option<PathBuf>,
    pub models: RoleModels,
    /// Probe queries per skill for the routing oracle.
    pub k_queries: usize,
    /// Maximum greedy restore steps after over-deletion.
    pub restore_cap: usize,
    /// Maximum retention-gate feedback iterations (0, 1, or 2).
    pub max_feedback: usize,
    /// Descriptions at or below this token count are regenerated instead of
    /// compressed.
    pub desc_threshold_tokens: usize,
    /// Minimum token size for an emitted reference module.
    pub ref_min_tokens: usize,
    /// Skills processed concurrently.
    pub worker_count: usize,
    /// Command template for the real-trigger adapter, with `{query}` and
    /// `{skill_dir}` placeholders. Empty means no adapter (restore
    /// unvalidated).
    pub adapter: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let stage1 = Stage1Config::default();
        PipelineConfig {
            mode: Mode::Replay,
            fixture_path: None,
            models: RoleModels::default(),
            k_queries: stage1.k_queries,
            restore_cap: stage1.restore_cap,
            max_feedback: Stage2Config::default().max_feedback_iterations,
            desc_threshold_tokens: stage1.desc_threshold_tokens,
            ref_min_tokens: MIN_MODULE_TOKENS,
            worker_count: 4,
            adapter: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigProblem(msg.into()))
}

fn parse_mode(value: &str) -> anyhow::Result<Mode> {
    match value {
        "live" => Ok(Mode::Live),
        "record" => Ok(Mode::Record),
        "replay" => Ok(Mode::Replay),
        other => Err(config_err(format!(
            "mode must be live, record, or replay, not `{other}`"
        ))),
    }
}

fn parse_count(key: &str, value: &str) -> anyhow::Result<usize> {
    value
        .parse()
        .map_err(|_| config_err(format!("{key} must be a non-negative integer, not `{value}`")))
}

impl PipelineConfig {
    /// Defaults plus environment overrides.
    pub fn from_env() -> anyhow::Result<Self> {
        let mut config = PipelineConfig::default();
        config.apply_env()?;
        Ok(config)
    }

    /// Reads a config file of `key: value` lines (`#` comments and blank
    /// lines ignored), then applies environment overrides on top.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| config_err(format!("cannot read config file {}: {err}", path.display())))?;
        let mut config = PipelineConfig::default();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| {
                config_err(format!(
                    "{} line {}: expected `key: value`, got `{line}`",
                    path.display(),
                    number + 1
                ))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        config.apply_env()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        match key {
            "mode" => self.mode = parse_mode(value)?,
            "fixtures" => self.fixture_path = Some(PathBuf::from(value)),
            "model_compressor" => self.models.compressor = value.to_string(),
            "model_oracle" => self.models.oracle = value.to_string(),
            "model_evaluator" => self.models.evaluator = value.to_string(),
            "model_judge" => self.models.judge = value.to_string(),
            "k_queries" => self.k_queries = parse_count(key, value)?,
            "restore_cap" => self.restore_cap = parse_count(key, value)?,
            "max_feedback" => self.max_feedback = parse_count(key, value)?,
            "desc_threshold_tokens" => self.desc_threshold_tokens = parse_count(key, value)?,
            "ref_min_tokens" => self.ref_min_tokens = parse_count(key, value)?,
            "worker_count" => self.worker_count = parse_count(key, value)?,
            "adapter" => {
                self.adapter = if value.is_empty() { None } else { Some(value.to_string()) }
            }
            other => return Err(config_err(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    fn apply_env(&mut self) -> anyhow::Result<()> {
        for (key, var) in [
            ("mode", "SKILLDEBLOAT_MODE"),
            ("fixtures", "SKILLDEBLOAT_FIXTURES"),
            ("model_compressor", "SKILLDEBLOAT_MODEL_COMPRESSOR"),
            ("model_oracle", "SKILLDEBLOAT_MODEL_ORACLE"),
            ("model_evaluator", "SKILLDEBLOAT_MODEL_EVALUATOR"),
            ("model_judge", "SKILLDEBLOAT_MODEL_JUDGE"),
            ("k_queries", "SKILLDEBLOAT_K_QUERIES"),
            ("restore_cap", "SKILLDEBLOAT_RESTORE_CAP"),
            ("max_feedback", "SKILLDEBLOAT_MAX_FEEDBACK"),
            ("desc_threshold_tokens", "SKILLDEBLOAT_DESC_THRESHOLD_TOKENS"),
            ("ref_min_tokens", "SKILLDEBLOAT_REF_MIN_TOKENS"),
            ("worker_count", "SKILLDEBLOAT_WORKER_COUNT"),
            ("adapter", "SKILLDEBLOAT_ADAPTER"),
        ] {
            if let Ok(value) = std::env::var(var) {
                self.set(key, value.trim())
                    .map_err(|err| config_err(format!("{var}: {err}")))?;
            }
        }
        Ok(())
    }

    /// Rejects combinations the pipeline cannot run with.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.max_feedback > 2 {
            return Err(config_err(format!(
                "max_feedback must be 0, 1, or 2, not {}",
                self.max_feedback
            )));
        }
        if self.k_queries == 0 {
            return Err(config_err("k_queries must be at least 1"));
        }
        if self.desc_threshold_tokens == 0 {
            return Err(config_err("desc_threshold_tokens must be positive"));
        }
        if self.worker_count == 0 {
            return Err(config_err("worker_count must be at least 1"));
        }
        if self.ref_min_tokens < MIN_MODULE_TOKENS {
            return Err(config_err(format!(
                "ref_min_tokens must be at least {MIN_MODULE_TOKENS} (the reference-module floor)"
            )));
        }
        if matches!(self.mode, Mode::Record | Mode::Replay) && self.fixture_path.is_none() {
            return Err(config_err(format!(
                "{:?} mode needs a fixture file (--fixtures or `fixtures:` in the config)",
                self.mode
            )));
        }
        if self.models.compressor == self.models.evaluator {
            return Err(config_err(
                "compressor and evaluator must be different models (the evaluator \
                 must not score its own compressions)",
            ));
        }
        Ok(())
    }

    pub fn gateway_config(&self) -> GatewayConfig {
        GatewayConfig {
            mode: self.mode,
            fixture_path: self.fixture_path.clone(),
            models: self.models.clone(),
            ..GatewayConfig::default()
        }
    }

    pub fn stage1_config(&self) -> Stage1Config {
        Stage1Config {
            k_queries: self.k_queries,
            desc_threshold_tokens: self.desc_threshold_tokens,
            restore_cap: self.restore_cap,
            ..Stage1Config::default()
        }
    }

    pub fn stage2_config(&self) -> Stage2Config {
        Stage2Config {
            cross_validate_rounds: 0,
            max_feedback_iterations: self.max_feedback,
            min_module_tokens: self.ref_min_tokens,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_stage_constants() {
        let config = PipelineConfig::default();
        assert_eq!(config.k_queries, 6);
        assert_eq!(config.restore_cap, 3);
        assert_eq!(config.max_feedback, 2);
        assert_eq!(config.desc_threshold_tokens, 40);
        assert_eq!(config.ref_min_tokens, 30);
        assert!(matches!(config.mode, Mode::Replay));
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.conf");
        std::fs::write(
            &path,
            "# pipeline settings\n\
             mode: record\n\
             fixtures: /tmp/fixtures.jsonl\n\
             model_compressor: big-model\n\
             max_feedback: 1\n\
             worker_count: 2\n\
             adapter: trigger-probe --query {query} --skills {skill_dir}\n",
        )
        .unwrap();
        let config = PipelineConfig::from_file(&path).unwrap();
        assert!(matches!(config.mode, Mode::Record));
        assert_eq!(config.fixture_path.as_deref(), Some(Path::new("/tmp/fixtures.jsonl")));
        assert_eq!(config.models.compressor, "big-model");
        assert_eq!(config.max_feedback, 1);
        assert_eq!(config.worker_count, 2);
        assert_eq!(
            config.adapter.as_deref(),
            Some("trigger-probe --query {query} --skills {skill_dir}")
        );
        // Untouched keys keep their defaults.
        assert_eq!(config.k_queries, 6);
        config.validate().unwrap();
    }

    #[test]
    fn unknown_key_and_bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");

        std::fs::write(&path, "workers: 3\n").unwrap();
        let err = PipelineConfig::from_file(&path).unwrap_err();
        assert!(err.is::<ConfigProblem>());
        assert!(err.to_string().contains("unknown config key"));

        std::fs::write(&path, "k_queries: six\n").unwrap();
        let err = PipelineConfig::from_file(&path).unwrap_err();
        assert!(err.to_string().contains("k_queries"));

        std::fs::write(&path, "just a line\n").unwrap();
        let err = PipelineConfig::from_file(&path).unwrap_err();
        assert!(err.to_string().contains("expected `key: value`"));
    }

    #[test]
    fn validation_rejects_inconsistent_settings() {
        let mut config = PipelineConfig::default();
        config.fixture_path = Some(PathBuf::from("f.jsonl"));
        config.validate().unwrap();

        config.max_feedback = 3;
        assert!(config.validate().is_err());
        config.max_feedback = 2;

        config.ref_min_tokens = 10;
        assert!(config.validate().unwrap_err().to_string().contains("ref_min_tokens"));
        config.ref_min_tokens = 30;

        config.fixture_path = None;
        assert!(config.validate().unwrap_err().to_string().contains("fixture"));
        config.mode = Mode::Live;
        config.validate().unwrap();

        config.models.evaluator = config.models.compressor.clone();
        assert!(config.validate().unwrap_err().to_string().contains("evaluator"));
    }

    // Environment overrides live in one test: the variables are process-wide.
    #[test]
    fn environment_overrides_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.conf");
        std::fs::write(&path, "worker_count: 2\nmode: live\n").unwrap();

        std::env::set_var("SKILLDEBLOAT_WORKER_COUNT", "7");
        std::env::set_var("SKILLDEBLOAT_MODE", "replay");
        let config = PipelineConfig::from_file(&path);
        std::env::remove_var("SKILLDEBLOAT_WORKER_COUNT");
        std::env::remove_var("SKILLDEBLOAT_MODE");

        let config = config.unwrap();
        assert_eq!(config.worker_count, 7);
        assert!(matches!(config.mode, Mode::Replay));
    }
}
