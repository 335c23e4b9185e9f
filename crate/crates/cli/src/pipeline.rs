//! The `optimize` command: run both pipeline stages over every skill in a
//! directory, write the optimized layouts, and fold per-skill reports into a
//! corpus summary.
//!
//! Skills are processed by a small worker pool. Each skill is fully
//! isolated: its optimized files and report depend only on its own inputs,
//! and one skill's failure is recorded in its report without touching the
//! others. Only infrastructure breakage (provider unreachable, fixture
//! missing, output directory unwritable) aborts the run with exit code 1.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use anyhow::Context;
use eval_harness::{gate2, generate_tasks, EvalError, EvalTask, GateReport};
use llm_gateway::{Gateway, GatewayError};
use skill_model::{
    parse_optimized, parse_skill, serialize_optimized, ModuleOrigin, OptimizedSkill, Skill,
    Tokenizer,
};
use stage1_routing::{
    run_stage1, CommandAdapter, SkillStub, Stage1Run, TriggerAdapter, UnavailableAdapter,
};
use stage2_body::{restructure_with_feedback, Gate2Outcome, Gate2Runner, Stage2Run};

use crate::config::PipelineConfig;
use crate::summary::{
    build_summary, render_markdown, ModuleTokens, SkillReport, SkillStatus, TokenAccounting,
};
use crate::ConfigProblem;

/// Drives the task-retention gate for the body stage: generates the task
/// set once per skill and reuses it across feedback iterations, so a
/// promotion is judged against exactly the tasks that failed before it.
struct EvalRunner<'a> {
    gateway: &'a Gateway,
    tokenizer: &'a Tokenizer,
    tasks: Option<Vec<EvalTask>>,
    /// Full report of the most recent gate run, kept for the skill report.
    last_report: Option<GateReport>,
    /// Set when the gate died of infrastructure failure rather than a task
    /// outcome; the pipeline aborts the whole run.
    fatal: Option<String>,
}

impl<'a> EvalRunner<'a> {
    fn new(gateway: &'a Gateway, tokenizer: &'a Tokenizer) -> Self {
        EvalRunner { gateway, tokenizer, tasks: None, last_report: None, fatal: None }
    }

    fn record_if_fatal(&mut self, err: &GatewayError) {
        if matches!(
            err,
            GatewayError::ProviderUnreachable { .. } | GatewayError::MissingFixture { .. }
        ) {
            self.fatal = Some(err.to_string());
        }
    }
}

impl Gate2Runner for EvalRunner<'_> {
    fn run(&mut self, original: &Skill, optimized: &OptimizedSkill) -> Result<Gate2Outcome, String> {
        if self.tasks.is_none() {
            match generate_tasks(self.gateway, original, optimized) {
                Ok(tasks) => self.tasks = Some(tasks),
                Err(err) => {
                    if let EvalError::Gateway(gateway_err) = &err {
                        self.record_if_fatal(gateway_err);
                    }
                    return Err(err.to_string());
                }
            }
        }
        let tasks = self.tasks.as_ref().expect("tasks cached above");
        match gate2(self.gateway, self.tokenizer, original, optimized, tasks) {
            Ok(report) => {
                let outcome = Gate2Outcome {
                    pass: report.pass,
                    mean_retention: report.mean_retention,
                    per_task_retention: report
                        .tasks
                        .iter()
                        .map(|t| t.retention.unwrap_or(0.0))
                        .collect(),
                    failed_criteria: report.failed_criteria.clone(),
                };
                self.last_report = Some(report);
                Ok(outcome)
            }
            Err(err) => {
                if let EvalError::Gateway(gateway_err) = &err {
                    self.record_if_fatal(gateway_err);
                }
                Err(err.to_string())
            }
        }
    }
}

/// Locates skill directories: `in_dir` itself when it holds a SKILL.md,
/// otherwise its direct children that do. Sorted by directory name so runs
/// are deterministic.
pub(crate) fn discover_skills(in_dir: &Path) -> anyhow::Result<Vec<(String, PathBuf)>> {
    if !in_dir.is_dir() {
        anyhow::bail!("input directory {} does not exist", in_dir.display());
    }
    if in_dir.join("SKILL.md").is_file() {
        let name = in_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "skill".to_string());
        return Ok(vec![(name, in_dir.to_path_buf())]);
    }
    let mut found = Vec::new();
    for entry in std::fs::read_dir(in_dir)
        .with_context(|| format!("cannot read input directory {}", in_dir.display()))?
    {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() && path.join("SKILL.md").is_file() {
            found.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    found.sort();
    Ok(found)
}

fn is_fatal(err: &GatewayError) -> bool {
    matches!(
        err,
        GatewayError::ProviderUnreachable { .. } | GatewayError::MissingFixture { .. }
    )
}

/// Measures the token ledger on the files actually written, so every
/// reported number can be recomputed from the output directory.
fn measure_tokens(
    tokenizer: &Tokenizer,
    original: &Skill,
    out_dir: &Path,
) -> anyhow::Result<TokenAccounting> {
    let written = parse_optimized(out_dir)
        .with_context(|| format!("re-reading optimized output {}", out_dir.display()))?;

    let description_before = tokenizer.count(&original.description);
    let description_after = tokenizer.count(&written.description);
    let body_before = tokenizer.count(&original.body);
    let core_after = tokenizer.count(&written.core);
    let references_before: usize =
        original.references.iter().map(|r| tokenizer.count(&r.text)).sum();
    let references_after: usize = written
        .reference_modules
        .iter()
        .filter(|m| m.origin == ModuleOrigin::External)
        .map(|m| tokenizer.count(&m.content))
        .sum();
    let ondemand_modules = written
        .reference_modules
        .iter()
        .filter(|m| m.origin != ModuleOrigin::External)
        .map(|m| ModuleTokens { path: m.path.clone(), tokens: tokenizer.count(&m.content) })
        .collect();

    Ok(TokenAccounting {
        description_before,
        description_after,
        body_before,
        core_after,
        references_before,
        references_after,
        total_before: body_before + references_before,
        total_after: core_after + references_after,
        invocation_before: description_before + body_before,
        invocation_after: description_after + core_after,
        ondemand_modules,
    })
}

struct RunContext<'a> {
    gateway: Gateway,
    tokenizer: Tokenizer,
    config: &'a PipelineConfig,
    out_dir: &'a Path,
    library: Vec<SkillStub>,
    /// First infrastructure failure; once set, unstarted skills are skipped.
    fatal: Mutex<Option<String>>,
}

impl RunContext<'_> {
    fn mark_fatal(&self, message: String) {
        let mut fatal = self.fatal.lock().expect("fatal flag lock");
        if fatal.is_none() {
            *fatal = Some(message);
        }
    }

    fn is_aborted(&self) -> bool {
        self.fatal.lock().expect("fatal flag lock").is_some()
    }
}

fn process_skill(ctx: &RunContext<'_>, key: &str, skill: &Skill) -> SkillReport {
    let adapter: Box<dyn TriggerAdapter> = match &ctx.config.adapter {
        Some(template) => Box::new(CommandAdapter::new(template.clone())),
        None => Box::new(UnavailableAdapter),
    };

    let stage1: Stage1Run = match run_stage1(
        &ctx.gateway,
        &ctx.tokenizer,
        adapter.as_ref(),
        skill,
        &ctx.library,
        &ctx.config.stage1_config(),
    ) {
        Ok(run) => run,
        Err(err) => {
            if let stage1_routing::Stage1Error::Gateway(gateway_err) = &err {
                if is_fatal(gateway_err) {
                    ctx.mark_fatal(gateway_err.to_string());
                }
            }
            return SkillReport::failed(&skill.name, format!("description stage: {err}"));
        }
    };

    let mut runner = EvalRunner::new(&ctx.gateway, &ctx.tokenizer);
    let stage2: Stage2Run = match restructure_with_feedback(
        &ctx.gateway,
        &ctx.tokenizer,
        skill,
        &stage1.final_description,
        &mut runner,
        &ctx.config.stage2_config(),
    ) {
        Ok(run) => run,
        Err(err) => {
            if let stage2_body::Stage2Error::Gateway(gateway_err) = &err {
                if is_fatal(gateway_err) {
                    ctx.mark_fatal(gateway_err.to_string());
                }
            }
            return SkillReport::failed(&skill.name, format!("body stage: {err}"));
        }
    };
    // The retention gate swallows its own errors into a not-run status;
    // infrastructure failures must still stop the run.
    if let Some(message) = runner.fatal.take() {
        ctx.mark_fatal(message.clone());
        return SkillReport::failed(&skill.name, format!("retention gate: {message}"));
    }

    let skill_out = ctx.out_dir.join("skills").join(key);
    if let Err(err) = serialize_optimized(&stage2.optimized, &skill_out) {
        ctx.mark_fatal(format!("cannot write {}: {err}", skill_out.display()));
        return SkillReport::failed(&skill.name, format!("writing output: {err}"));
    }

    let tokens = match measure_tokens(&ctx.tokenizer, skill, &skill_out) {
        Ok(tokens) => tokens,
        Err(err) => {
            ctx.mark_fatal(err.to_string());
            return SkillReport::failed(&skill.name, format!("token accounting: {err:#}"));
        }
    };

    SkillReport {
        skill: skill.name.clone(),
        status: SkillStatus::Optimized,
        error: None,
        stage1: Some(stage1.report),
        stage2: Some(stage2.report),
        eval: runner.last_report,
        tokens: Some(tokens),
    }
}

pub fn optimize(in_dir: &Path, out_dir: &Path, config: &PipelineConfig) -> anyhow::Result<ExitCode> {
    let skills = discover_skills(in_dir)?;

    let gateway = Gateway::new(config.gateway_config()).map_err(|err| match err {
        GatewayError::InvalidConfig(msg) => anyhow::Error::new(ConfigProblem(msg)),
        other => anyhow::Error::new(other).context("starting model gateway"),
    })?;
    let tokenizer = Tokenizer::bundled();

    std::fs::create_dir_all(out_dir.join("reports"))
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    // Parse everything up front: parsing is offline, and the description
    // stage ranks each skill against the rest of the corpus.
    let parsed: Vec<(String, Result<Skill, skill_model::SkillError>)> = skills
        .iter()
        .map(|(key, dir)| (key.clone(), parse_skill(dir)))
        .collect();
    let library: Vec<SkillStub> = parsed
        .iter()
        .filter_map(|(_, result)| result.as_ref().ok())
        .map(|skill| SkillStub::new(&skill.name, &skill.description))
        .collect();

    let ctx = RunContext {
        gateway,
        tokenizer,
        config,
        out_dir,
        library,
        fatal: Mutex::new(None),
    };

    let slots: Vec<OnceLock<SkillReport>> = parsed.iter().map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    let workers = config.worker_count.min(parsed.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= parsed.len() {
                    break;
                }
                let (key, result) = &parsed[index];
                let report = if ctx.is_aborted() {
                    SkillReport::failed(key, "not attempted: run aborted after infrastructure failure")
                } else {
                    match result {
                        Ok(skill) => process_skill(&ctx, key, skill),
                        Err(err) => SkillReport::failed(key, format!("parsing: {err}")),
                    }
                };
                slots[index].set(report).expect("each slot is written once");
            });
        }
    });

    let reports: Vec<SkillReport> = slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("worker pool filled every slot"))
        .collect();

    for ((key, _), report) in skills.iter().zip(&reports) {
        let path = out_dir.join("reports").join(format!("{key}.json"));
        let json = serde_json::to_string_pretty(report)?;
        std::fs::write(&path, json + "\n")
            .with_context(|| format!("cannot write report {}", path.display()))?;
    }

    let summary = build_summary(&reports);
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    std::fs::write(out_dir.join("summary.md"), render_markdown(&summary))?;

    println!(
        "{} skills: {} optimized, {} failed; summary at {}",
        summary.skills_total,
        summary.optimized,
        summary.failed,
        out_dir.join("summary.md").display()
    );

    if let Some(message) = ctx.fatal.into_inner().expect("fatal flag lock") {
        anyhow::bail!("infrastructure failure: {message}");
    }
    Ok(ExitCode::SUCCESS)
}
