//! Batch front-end for the skill debloating toolchain.
//!
//! `optimize` runs the two-stage pipeline over a corpus directory and writes
//! optimized skills plus JSON/Markdown reports; `analyze` produces offline
//! corpus statistics; `validate` checks a single (optimized or plain) skill
//! directory against the structural contracts; `report` re-renders the
//! summary for a finished run from its per-skill reports.

mod analyze;
mod config;
mod pipeline;
mod report;
mod summary;
mod validate;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::PipelineConfig;

/// A problem with flags, the config file, or their combination. Exits with
/// code 2 so scripts can tell misconfiguration from infrastructure failure.
#[derive(Debug)]
pub struct ConfigProblem(pub String);

impl fmt::Display for ConfigProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigProblem {}

#[derive(Parser)]
#[command(
    name = "skilldebloat",
    version,
    about = "Build-time debloating for LLM agent skills",
    long_about = "Compresses skill routing descriptions against a simulated routing oracle \
                  and restructures bodies into an always-loaded core plus on-demand \
                  reference modules, with faithfulness and task-retention gates.\n\n\
                  Precedence for settings: built-in defaults < config file < \
                  SKILLDEBLOAT_* environment variables < command-line flags.\n\
                  Exit codes: 0 success, 1 infrastructure or validation failure, 2 configuration error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    /// Call the configured provider directly.
    Live,
    /// Call the provider and append every exchange to the fixture file.
    Record,
    /// Serve every request from the fixture file; no network access.
    Replay,
}

impl From<ModeArg> for llm_gateway::Mode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Live => llm_gateway::Mode::Live,
            ModeArg::Record => llm_gateway::Mode::Record,
            ModeArg::Replay => llm_gateway::Mode::Replay,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub(crate) enum ReportKind {
    /// Token-count histograms plus missing/short-description rates.
    Tokens,
    /// Five-category content taxonomy via the classifier (needs a gateway).
    Taxonomy,
    /// Single-file / with-references / with-scripts composition rates.
    Files,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every skill under <IN_DIR> and write results under --out.
    Optimize {
        /// Corpus directory (each child with a SKILL.md is one skill), or a
        /// single skill directory.
        in_dir: PathBuf,
        /// Output directory; receives skills/, reports/, summary.json, summary.md.
        #[arg(long)]
        out: PathBuf,
        /// Config file of `key: value` lines mirroring the pipeline settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Gateway mode (overrides config file and environment).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Fixture file for record/replay modes.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Produce offline statistics for a corpus directory.
    Analyze {
        /// Corpus directory to scan.
        corpus: PathBuf,
        /// Which report to produce.
        #[arg(long, value_enum)]
        report: ReportKind,
        /// Config file (used by the taxonomy report's classifier gateway).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Gateway mode for the taxonomy report.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Fixture file for record/replay taxonomy runs.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Parse one skill directory and check the structural contracts.
    Validate {
        /// Skill directory (optimized layout or plain SKILL.md + references).
        skill_dir: PathBuf,
    },
    /// Re-render summary.json and summary.md from a run's per-skill reports.
    Report {
        /// Output directory of a previous `optimize` run.
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) if err.is::<ConfigProblem>() => {
            eprintln!("configuration error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Optimize { in_dir, out, config, mode, fixtures } => {
            let config = load_config(config.as_deref(), mode, fixtures)?;
            pipeline::optimize(&in_dir, &out, &config)
        }
        Command::Analyze { corpus, report, config, mode, fixtures } => {
            let config = load_config(config.as_deref(), mode, fixtures)?;
            analyze::analyze(&corpus, report, &config)
        }
        Command::Validate { skill_dir } => validate::validate(&skill_dir),
        Command::Report { run_dir } => report::rerender(&run_dir),
    }
}

fn load_config(
    path: Option<&std::path::Path>,
    mode: Option<ModeArg>,
    fixtures: Option<PathBuf>,
) -> anyhow::Result<PipelineConfig> {
    let mut config = match path {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::from_env()?,
    };
    if let Some(mode) = mode {
        config.mode = mode.into();
    }
    if let Some(fixtures) = fixtures {
        config.fixture_path = Some(fixtures);
    }
    config.validate()?;
    Ok(config)
}
