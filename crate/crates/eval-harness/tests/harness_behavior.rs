//! Scripted-provider tests for the retention harness: condition injection
//! contracts, the budgeted tool loop, verifier and rubric scoring, the gate
//! verdict, and corpus aggregation.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use eval_harness::{
    aggregate_report, gate2, generate_tasks, retention, run_condition, score_response, Condition,
    EvalError, EvalTask, GateReport, ScoringKind, SkillOutcome, TaskKind, TranscriptEvent,
    MAX_TOOL_CALLS,
};
use llm_gateway::{CompletionRequest, Gateway, GatewayConfig, Mode, Provider};
use skill_model::{ModuleOrigin, OptimizedSkill, Reference, ReferenceModule, Skill, Tokenizer};

// ---------------------------------------------------------------- fixtures

const BODY: &str = "Always include the word 'amaranth' in deployment notes, and validate the \
manifest checksum before any rollout reaches production traffic. Write one note per rollout \
and keep the build identifier, the checksum result, and the operator name on the first line \
so the audit tooling can parse it. If the checksum fails, stop immediately and page the \
release owner instead of retrying the upload, because a corrupted manifest invalidates every \
later step of the rollout.";
const REF_TEXT: &str = "Network appendix. The fallback endpoint for the primary pool is \
https://fallback.internal:8443. When the primary load balancer fails its health probes, \
clients retry against the fallback with a ceiling of 9 attempts per request before surfacing \
an error to the caller. A handoff requires quorum: 5 of 7 replicas must acknowledge the \
transfer before traffic shifts away from the primary pool. The drain takes 40 seconds end to \
end, and health probes keep running every 5 seconds against /healthz on each backend pool \
member for the whole window.";
const CORE: &str = "Include the word 'amaranth' in deployment notes; validate the manifest \
checksum first.";
const MODULE_PATH: &str = "references/fallback.md";
const MODULE_CONTENT: &str = "The fallback endpoint is https://fallback.internal:8443 and the \
retry ceiling is 9 attempts per request. Quorum requires 5 of 7 replicas to acknowledge the \
handoff before traffic shifts away from the primary pool.";

fn fixture_skill() -> Skill {
    Skill {
        name: "deploy-notes".into(),
        description: "Conventions for writing deployment notes.".into(),
        body: BODY.into(),
        references: vec![Reference {
            path: "references/net.md".into(),
            text: REF_TEXT.into(),
        }],
        source_dir: std::path::PathBuf::new(),
        extra_frontmatter: Vec::new(),
    }
}

fn fixture_optimized() -> OptimizedSkill {
    OptimizedSkill {
        name: "deploy-notes".into(),
        description: "Conventions for writing deployment notes.".into(),
        core: CORE.into(),
        reference_modules: vec![ReferenceModule {
            path: MODULE_PATH.into(),
            content: MODULE_CONTENT.into(),
            when_clause: "you need the fallback endpoint details".into(),
            topics: vec!["fallback".into(), "retries".into(), "quorum".into()],
            origin: ModuleOrigin::External,
        }],
        provenance: Vec::new(),
        extra_frontmatter: Vec::new(),
    }
}

// ---------------------------------------------------------------- harness

type CallLog = Arc<Mutex<Vec<(String, String, String)>>>;

struct ScriptProvider<F: Fn(&CompletionRequest) -> Result<String, String> + Send + Sync> {
    rule: F,
    calls: CallLog,
}

impl<F: Fn(&CompletionRequest) -> Result<String, String> + Send + Sync> Provider
    for ScriptProvider<F>
{
    fn complete(&self, _model: &str, request: &CompletionRequest) -> Result<String, String> {
        self.calls.lock().unwrap().push((
            request.schema.clone().unwrap_or_default(),
            request.system.clone(),
            request.user.clone(),
        ));
        (self.rule)(request)
    }

    fn kind(&self) -> &'static str {
        "script"
    }
}

fn gateway_with<F>(rule: F) -> (Gateway, CallLog)
where
    F: Fn(&CompletionRequest) -> Result<String, String> + Send + Sync + 'static,
{
    let calls: CallLog = Arc::new(Mutex::new(Vec::new()));
    let provider = ScriptProvider { rule, calls: Arc::clone(&calls) };
    let config = GatewayConfig {
        mode: Mode::Live,
        transport_attempts: 1,
        retry_base: Duration::from_millis(1),
        ..GatewayConfig::default()
    };
    (Gateway::with_provider(config, Box::new(provider)).unwrap(), calls)
}

/// Which harness call a request is, judged by its reply contract.
fn is_judge(request: &CompletionRequest) -> bool {
    request.schema.as_deref().unwrap_or("").contains("satisfied")
}
fn is_task_generation(request: &CompletionRequest) -> bool {
    request.schema.as_deref().unwrap_or("").contains("tasks")
}
fn is_tool_turn(request: &CompletionRequest) -> bool {
    request.schema.as_deref().unwrap_or("").contains("read_reference")
}

fn answer(text: &str) -> Result<String, String> {
    Ok(serde_json::to_string(&serde_json::json!({ "answer": text })).unwrap())
}

fn tool_call(path: &str) -> Result<String, String> {
    Ok(serde_json::to_string(&serde_json::json!({ "tool": "read_reference", "path": path })).unwrap())
}

fn rubric_task(prompt: &str, criteria: &[&str]) -> EvalTask {
    EvalTask {
        prompt: prompt.into(),
        kind: TaskKind::CoreOnly,
        scoring: ScoringKind::Rubric,
        rubric: criteria.iter().map(|c| c.to_string()).collect(),
        verifier: None,
    }
}

fn code_task(prompt: &str, verifier: &str) -> EvalTask {
    EvalTask {
        prompt: prompt.into(),
        kind: TaskKind::CoreOnly,
        scoring: ScoringKind::CodeExecution,
        rubric: Vec::new(),
        verifier: Some(verifier.into()),
    }
}

// ---------------------------------------------------------------- conditions

#[test]
fn bare_condition_injects_zero_skill_tokens() {
    let saw_skill_text = Arc::new(AtomicBool::new(false));
    let saw = Arc::clone(&saw_skill_text);
    let (gateway, _) = gateway_with(move |request| {
        if request.user.contains("amaranth") || request.user.contains("load balancer") {
            saw.store(true, Ordering::SeqCst);
        }
        answer("no idea")
    });
    let tokenizer = Tokenizer::bundled();
    let task = rubric_task("Which word must deployment notes include?", &["names the word"]);
    let run = run_condition(
        &gateway,
        &tokenizer,
        &task,
        Condition::D,
        &fixture_skill(),
        &fixture_optimized(),
    )
    .unwrap();

    assert_eq!(run.injected_tokens, 0);
    assert_eq!(run.tool_calls, 0);
    assert!(run.loaded_refs.is_empty());
    assert_eq!(run.final_answer, "no idea");
    assert!(matches!(
        run.transcript[0],
        TranscriptEvent::ContextInjected { tokens: 0, .. }
    ));
    assert!(!saw_skill_text.load(Ordering::SeqCst), "no skill content may reach the agent");
}

#[test]
fn inline_condition_injects_body_and_every_reference() {
    let saw_body = Arc::new(AtomicBool::new(false));
    let saw_reference = Arc::new(AtomicBool::new(false));
    let (b, r) = (Arc::clone(&saw_body), Arc::clone(&saw_reference));
    let (gateway, _) = gateway_with(move |request| {
        if request.user.contains(BODY) {
            b.store(true, Ordering::SeqCst);
        }
        if request.user.contains(REF_TEXT) {
            r.store(true, Ordering::SeqCst);
        }
        answer("amaranth")
    });
    let tokenizer = Tokenizer::bundled();
    let skill = fixture_skill();
    let task = rubric_task("Which word must deployment notes include?", &["names the word"]);
    let run = run_condition(
        &gateway,
        &tokenizer,
        &task,
        Condition::A,
        &skill,
        &fixture_optimized(),
    )
    .unwrap();

    assert!(saw_body.load(Ordering::SeqCst));
    assert!(saw_reference.load(Ordering::SeqCst));
    assert!(run.loaded_refs.is_empty(), "inline injection is not tool loading");
    assert_eq!(run.tool_calls, 0);
    let expected_context = format!(
        "Skill instructions:\n{}\n\nReference {}:\n{}\n",
        BODY, "references/net.md", REF_TEXT
    );
    assert_eq!(run.injected_tokens, tokenizer.count(&expected_context));
}

#[test]
fn injected_volume_is_monotone_across_conditions() {
    let (gateway, _) = gateway_with(move |request| {
        if is_tool_turn(request) && !request.user.contains("[content of") {
            return tool_call(MODULE_PATH);
        }
        answer("amaranth everywhere")
    });
    let tokenizer = Tokenizer::bundled();
    let skill = fixture_skill();
    let optimized = fixture_optimized();
    let task = rubric_task("Summarize the rollout rules.", &["mentions the checksum"]);

    let d = run_condition(&gateway, &tokenizer, &task, Condition::D, &skill, &optimized).unwrap();
    let a = run_condition(&gateway, &tokenizer, &task, Condition::A, &skill, &optimized).unwrap();
    let c = run_condition(&gateway, &tokenizer, &task, Condition::C, &skill, &optimized).unwrap();

    assert_eq!(d.injected_tokens, 0);
    assert!(c.injected_tokens > 0);
    assert!(
        c.injected_tokens <= a.injected_tokens,
        "compressed injection ({}) must not exceed inline injection ({})",
        c.injected_tokens,
        a.injected_tokens
    );
}

#[test]
fn tool_loop_serves_requested_module_content() {
    let (gateway, _) = gateway_with(move |request| {
        if is_tool_turn(request) {
            if let Some(start) = request.user.find("[content of references/fallback.md]") {
                let served = &request.user[start..];
                assert!(served.contains("retry ceiling is 9 attempts"));
                return answer("the retry ceiling is 9");
            }
            return tool_call(MODULE_PATH);
        }
        unreachable!("only tool-turn requests expected");
    });
    let tokenizer = Tokenizer::bundled();
    let run = run_condition(
        &gateway,
        &tokenizer,
        &rubric_task("What is the retry ceiling?", &["states 9"]),
        Condition::C,
        &fixture_skill(),
        &fixture_optimized(),
    )
    .unwrap();

    assert_eq!(run.tool_calls, 1);
    assert_eq!(run.loaded_refs, vec![MODULE_PATH.to_string()]);
    assert_eq!(run.final_answer, "the retry ceiling is 9");
    assert!(run
        .transcript
        .iter()
        .any(|e| matches!(e, TranscriptEvent::ToolResult { found: true, tokens, .. } if *tokens > 0)));
}

#[test]
fn unknown_module_lookup_consumes_budget() {
    let (gateway, _) = gateway_with(move |request| {
        if is_tool_turn(request) {
            if request.user.contains("[no module at references/ghost.md]") {
                return answer("gave up");
            }
            return tool_call("references/ghost.md");
        }
        unreachable!("only tool-turn requests expected");
    });
    let tokenizer = Tokenizer::bundled();
    let run = run_condition(
        &gateway,
        &tokenizer,
        &rubric_task("What is in the ghost file?", &["anything"]),
        Condition::C,
        &fixture_skill(),
        &fixture_optimized(),
    )
    .unwrap();

    assert_eq!(run.tool_calls, 1, "a hallucinated path still costs a call");
    assert!(run.loaded_refs.is_empty());
    assert!(run
        .transcript
        .iter()
        .any(|e| matches!(e, TranscriptEvent::ToolResult { found: false, .. })));
}

#[test]
fn seventh_tool_call_is_refused_and_budget_stays_at_six() {
    let (gateway, _) = gateway_with(move |request| {
        if is_tool_turn(request) {
            return tool_call("references/ghost.md");
        }
        answer("done after refusal")
    });
    let tokenizer = Tokenizer::bundled();
    let run = run_condition(
        &gateway,
        &tokenizer,
        &rubric_task("Exhaust the budget.", &["anything"]),
        Condition::C,
        &fixture_skill(),
        &fixture_optimized(),
    )
    .unwrap();

    assert_eq!(run.tool_calls, MAX_TOOL_CALLS);
    let refusals = run
        .transcript
        .iter()
        .filter(|e| matches!(e, TranscriptEvent::BudgetRefusal { .. }))
        .count();
    assert_eq!(refusals, 1);
    let served = run
        .transcript
        .iter()
        .filter(|e| matches!(e, TranscriptEvent::ToolCall { .. }))
        .count();
    assert_eq!(served, MAX_TOOL_CALLS);
    assert_eq!(run.final_answer, "done after refusal");
}

#[test]
fn protocol_breakdown_ends_the_run_with_an_empty_answer() {
    let (gateway, _) = gateway_with(|_| Ok(r#"{"noise": true}"#.to_string()));
    let tokenizer = Tokenizer::bundled();
    let run = run_condition(
        &gateway,
        &tokenizer,
        &rubric_task("Anything.", &["anything"]),
        Condition::C,
        &fixture_skill(),
        &fixture_optimized(),
    )
    .unwrap();

    assert_eq!(run.final_answer, "");
    assert!(run
        .transcript
        .iter()
        .any(|e| matches!(e, TranscriptEvent::ProtocolError { .. })));
}

// ---------------------------------------------------------------- scoring

struct VerifierFixture {
    name: &'static str,
    verifier: &'static str,
    answer: &'static str,
    expected: f64,
    expects_diagnostic: bool,
}

const VERIFIER_FIXTURES: [VerifierFixture; 10] = [
    VerifierFixture {
        name: "exact-match-pass",
        verifier: "import sys\nsys.exit(0 if open(sys.argv[1]).read().strip() == 'deploy 421' else 1)\n",
        answer: "deploy 421",
        expected: 1.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "exact-match-fail",
        verifier: "import sys\nsys.exit(0 if open(sys.argv[1]).read().strip() == 'deploy 421' else 1)\n",
        answer: "deploy 999",
        expected: 0.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "last-fenced-block-wins",
        verifier: "import sys\nsys.exit(0 if open(sys.argv[1]).read().strip() == 'x = 2' else 1)\n",
        answer: "Draft:\n```python\nx = 1\n```\nFinal:\n```python\nx = 2\n```",
        expected: 1.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "json-artifact-valid",
        verifier: "import json, sys\nblob = json.load(open(sys.argv[1]))\nsys.exit(0 if blob.get('retries') == 9 else 1)\n",
        answer: "Here is the config:\n```json\n{\"retries\": 9}\n```",
        expected: 1.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "json-artifact-invalid",
        verifier: "import json, sys\njson.load(open(sys.argv[1]))\nsys.exit(0)\n",
        answer: "not json at all",
        expected: 0.0,
        expects_diagnostic: true,
    },
    VerifierFixture {
        name: "verifier-crash",
        verifier: "raise RuntimeError('boom')\n",
        answer: "anything",
        expected: 0.0,
        expects_diagnostic: true,
    },
    VerifierFixture {
        name: "function-behavior",
        verifier: "import sys\nscope = {}\nexec(open(sys.argv[1]).read(), scope)\nsys.exit(0 if scope['double'](2) == 4 else 1)\n",
        answer: "```python\ndef double(x):\n    return x * 2\n```",
        expected: 1.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "regex-check",
        verifier: "import re, sys\nsys.exit(0 if re.search(r'amaranth', open(sys.argv[1]).read()) else 1)\n",
        answer: "The note must contain amaranth somewhere.",
        expected: 1.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "line-count-fail",
        verifier: "import sys\nlines = open(sys.argv[1]).read().splitlines()\nsys.exit(0 if len(lines) == 3 else 1)\n",
        answer: "only one line",
        expected: 0.0,
        expects_diagnostic: false,
    },
    VerifierFixture {
        name: "substring-gate",
        verifier: "import sys\nsys.exit(0 if 'quorum' in open(sys.argv[1]).read() else 1)\n",
        answer: "Traffic shifts once quorum acknowledges.",
        expected: 1.0,
        expects_diagnostic: false,
    },
];

#[test]
fn verifier_fixtures_score_deterministically_without_a_model() {
    let (gateway, calls) = gateway_with(|_| panic!("code scoring must not call the model"));
    for fixture in &VERIFIER_FIXTURES {
        let task = code_task("produce the artifact", fixture.verifier);
        let first = score_response(&gateway, &task, fixture.answer).unwrap();
        let second = score_response(&gateway, &task, fixture.answer).unwrap();
        assert_eq!(
            first.value,
            Some(fixture.expected),
            "fixture {} scored {:?} (diagnostic {:?})",
            fixture.name,
            first.value,
            first.diagnostic
        );
        assert_eq!(first.value, second.value, "fixture {} must be deterministic", fixture.name);
        assert_eq!(
            first.diagnostic.is_some(),
            fixture.expects_diagnostic,
            "fixture {} diagnostic presence",
            fixture.name
        );
    }
    assert!(calls.lock().unwrap().is_empty());
}

#[test]
fn rubric_score_is_the_satisfied_fraction() {
    let (gateway, _) = gateway_with(|request| {
        assert!(is_judge(request));
        Ok(r#"{"satisfied": [true, true, true, false]}"#.to_string())
    });
    let task = rubric_task(
        "Write a rollout note.",
        &["names the build", "lists the checksum", "mentions canary", "cites the pager owner"],
    );
    let outcome = score_response(&gateway, &task, "a note").unwrap();
    assert_eq!(outcome.value, Some(0.75));
    assert_eq!(outcome.unsatisfied, vec!["cites the pager owner".to_string()]);
}

#[test]
fn judge_length_mismatch_is_retried_once() {
    let (gateway, calls) = gateway_with(|request| {
        if request.user.contains("Attempt 2") {
            Ok(r#"{"satisfied": [true, false]}"#.to_string())
        } else {
            Ok(r#"{"satisfied": [true]}"#.to_string())
        }
    });
    let task = rubric_task("Two criteria.", &["first", "second"]);
    let outcome = score_response(&gateway, &task, "an answer").unwrap();
    assert_eq!(outcome.value, Some(0.5));
    assert_eq!(outcome.unsatisfied, vec!["second".to_string()]);
    assert_eq!(calls.lock().unwrap().len(), 2);
}

#[test]
fn unusable_judge_leaves_the_task_unscored() {
    let (gateway, _) = gateway_with(|_| Ok(r#"{"satisfied": "always"}"#.to_string()));
    let task = rubric_task("Anything.", &["anything"]);
    let outcome = score_response(&gateway, &task, "an answer").unwrap();
    assert_eq!(outcome.value, None);
    assert!(outcome.diagnostic.unwrap().contains("judge"));
}

// ---------------------------------------------------------------- task generation

fn scripted_task_list() -> String {
    serde_json::json!({
        "tasks": [
            {"prompt": "Which word must every deployment note include?", "kind": "core_only",
             "scoring": "rubric", "rubric": ["names amaranth"], "verifier": null},
            {"prompt": "What is the retry ceiling of the fallback endpoint?", "kind": "core_only",
             "scoring": "rubric", "rubric": ["states 9 attempts"], "verifier": null},
            {"prompt": "State the quorum rule for replica acknowledgement.", "kind": "needs_reference",
             "scoring": "rubric", "rubric": ["5 of 7 replicas"], "verifier": null},
            {"prompt": "Write a note that passes the checksum validation rule.", "kind": "needs_reference",
             "scoring": "code_execution", "rubric": [],
             "verifier": "import sys\nsys.exit(0 if 'amaranth' in open(sys.argv[1]).read() else 1)\n"},
            {"prompt": "Explain when the manifest checksum is validated.", "kind": "core_only",
             "scoring": "rubric", "rubric": ["before rollout"], "verifier": null}
        ]
    })
    .to_string()
}

#[test]
fn generated_tasks_are_validated_and_kinds_rederived() {
    let (gateway, _) = gateway_with(|request| {
        assert!(is_task_generation(request));
        Ok(scripted_task_list())
    });
    let tasks = generate_tasks(&gateway, &fixture_skill(), &fixture_optimized()).unwrap();
    assert_eq!(tasks.len(), 5);
    // "retry ceiling" and "fallback endpoint" live only in the module, so the
    // mislabeled core_only task comes back as needs_reference.
    assert_eq!(tasks[1].kind, TaskKind::NeedsReference);
    // "checksum" and "manifest" are core vocabulary: stays core_only even
    // though the generator claimed otherwise.
    assert_eq!(tasks[4].kind, TaskKind::CoreOnly);
}

#[test]
fn malformed_task_lists_exhaust_attempts_and_error() {
    let (gateway, calls) = gateway_with(|_| {
        Ok(serde_json::json!({"tasks": [
            {"prompt": "only", "kind": "core_only", "scoring": "rubric", "rubric": ["x"], "verifier": null}
        ]})
        .to_string())
    });
    let err = generate_tasks(&gateway, &fixture_skill(), &fixture_optimized()).unwrap_err();
    match err {
        EvalError::TaskGeneration { skill, reason } => {
            assert_eq!(skill, "deploy-notes");
            assert!(reason.contains("expected 5"), "reason was: {reason}");
        }
        other => panic!("unexpected error: {other}"),
    }
    assert_eq!(calls.lock().unwrap().len(), 3, "three generation attempts");
}

// ---------------------------------------------------------------- the gate

#[test]
fn perfect_runs_pass_the_gate_at_ceiling() {
    let (gateway, _) = gateway_with(move |request| {
        if is_judge(request) {
            return Ok(r#"{"satisfied": [true, true]}"#.to_string());
        }
        if is_tool_turn(request) && !request.user.contains("[content of") {
            return tool_call(MODULE_PATH);
        }
        answer("amaranth, checksum validated")
    });
    let tokenizer = Tokenizer::bundled();
    let tasks = vec![
        code_task(
            "Write a deployment note.",
            "import sys\nsys.exit(0 if 'amaranth' in open(sys.argv[1]).read() else 1)\n",
        ),
        rubric_task("Summarize the rules.", &["mentions amaranth", "mentions the checksum"]),
    ];
    let report = gate2(&gateway, &tokenizer, &fixture_skill(), &fixture_optimized(), &tasks).unwrap();

    assert!(report.pass);
    assert!(report.ceiling);
    assert!(!report.improvement, "equal means are not an improvement");
    assert!(!report.inconclusive);
    assert_eq!(report.mean_retention, 1.0);
    assert!(report.failed_criteria.is_empty());
    for result in &report.tasks {
        for score in [&result.d, &result.a, &result.c] {
            assert!(score.tool_calls <= MAX_TOOL_CALLS);
        }
        assert!(result.d.loaded_refs.is_empty());
        assert!(result.a.loaded_refs.is_empty());
        assert_eq!(result.d.injected_tokens, 0);
        assert!(result.c.injected_tokens <= result.a.injected_tokens);
    }
}

#[test]
fn regression_under_the_compressed_condition_fails_and_forwards_criteria() {
    let (gateway, _) = gateway_with(move |request| {
        if is_judge(request) {
            if request.user.contains("the right answer") {
                return Ok(r#"{"satisfied": [true, true]}"#.to_string());
            }
            if request.user.contains("a poor answer") {
                return Ok(r#"{"satisfied": [true, false]}"#.to_string());
            }
            return Ok(r#"{"satisfied": [false, false]}"#.to_string());
        }
        if request.system.contains("no additional reference material") {
            return answer("bare guess");
        }
        if request.system.contains("every reference file") {
            return answer("the right answer");
        }
        answer("a poor answer")
    });
    let tokenizer = Tokenizer::bundled();
    let tasks = vec![rubric_task(
        "Describe the rollout sequence.",
        &["names the checksum step", "mentions the endpoint"],
    )];
    let report = gate2(&gateway, &tokenizer, &fixture_skill(), &fixture_optimized(), &tasks).unwrap();

    assert!(!report.pass);
    assert!(!report.ceiling);
    assert!(!report.inconclusive);
    assert_eq!(report.tasks[0].retention, Some(0.5));
    assert_eq!(report.mean_score_a, 1.0);
    assert_eq!(report.mean_score_c, 0.5);
    assert_eq!(report.failed_criteria, vec!["mentions the endpoint".to_string()]);
}

#[test]
fn unscorable_task_makes_the_gate_inconclusive() {
    let (gateway, _) = gateway_with(|request| {
        if is_judge(request) {
            return Ok(r#"{"satisfied": 3}"#.to_string());
        }
        answer("an answer")
    });
    let tokenizer = Tokenizer::bundled();
    let tasks = vec![rubric_task("Anything.", &["anything"])];
    let report = gate2(&gateway, &tokenizer, &fixture_skill(), &fixture_optimized(), &tasks).unwrap();

    assert!(report.inconclusive);
    assert!(!report.pass);
    assert_eq!(report.tasks[0].retention, None);
    assert_eq!(report.failed_criteria, vec!["unscored: Anything.".to_string()]);
}

#[test]
fn agent_breakdown_leaves_the_task_unscored() {
    let (gateway, _) = gateway_with(|request| {
        if is_judge(request) {
            return Ok(r#"{"satisfied": [true]}"#.to_string());
        }
        if request.system.contains("fetched with a tool") {
            // Never parseable: the compressed-condition agent produces noise
            // until the gateway gives up.
            return Ok("### not json ###".to_string());
        }
        answer("fine")
    });
    let tokenizer = Tokenizer::bundled();
    let tasks = vec![rubric_task("Anything.", &["anything"])];
    let report = gate2(&gateway, &tokenizer, &fixture_skill(), &fixture_optimized(), &tasks).unwrap();

    assert!(report.inconclusive);
    let c = &report.tasks[0].c;
    assert_eq!(c.value, None);
    assert!(c.diagnostic.as_deref().unwrap().contains("agent run failed"));
    assert_eq!(report.tasks[0].a.value, Some(1.0), "baseline still scored");
}

// ---------------------------------------------------------------- aggregation

fn summary_report(name: &str, mean_a: f64, mean_c: f64, retention_mean: f64, ceiling: bool) -> GateReport {
    GateReport {
        skill: name.into(),
        tasks: Vec::new(),
        pass: retention_mean >= 1.0,
        ceiling,
        improvement: mean_c > mean_a,
        inconclusive: false,
        mean_retention: retention_mean,
        mean_score_a: mean_a,
        mean_score_c: mean_c,
        failed_criteria: Vec::new(),
    }
}

#[test]
fn corpus_rollup_computes_rates_and_compression_bins() {
    let improved = summary_report("a", 0.8, 0.9, 1.0, false);
    let regressed = summary_report("b", 0.9, 0.7, 0.78, false);
    let ceiling = summary_report("c", 1.0, 1.0, 1.0, true);
    let outcomes = vec![
        SkillOutcome { compression_ratio: 0.43, report: &improved },
        SkillOutcome { compression_ratio: 0.70, report: &regressed },
        SkillOutcome { compression_ratio: 0.15, report: &ceiling },
    ];
    let metrics = aggregate_report(&outcomes);

    assert_eq!(metrics.all.skills, 3);
    assert!((metrics.all.pass_rate - 2.0 / 3.0).abs() < 1e-12);
    assert!((metrics.all.improvement_rate - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(metrics.non_ceiling.skills, 2);
    assert!((metrics.non_ceiling.pass_rate - 0.5).abs() < 1e-12);

    let bin = |label: &str| {
        metrics
            .retention_by_compression
            .iter()
            .find(|b| b.label == label)
            .unwrap()
    };
    assert_eq!(bin("40-60%").skills, 1);
    assert!((bin("40-60%").mean_retention - 1.0).abs() < 1e-12);
    assert_eq!(bin("60-80%").skills, 1);
    assert_eq!(bin("<20%").skills, 1);
    assert_eq!(bin("20-40%").skills, 0);
    assert_eq!(bin(">80%").skills, 0);
}

#[test]
fn retention_pairs_used_by_the_gate_match_the_metric() {
    // The gate's per-task retention must agree with the standalone metric.
    assert_eq!(retention(0.93, 1.0), 1.0);
    assert_eq!(retention(0.0, 0.0), 1.0);
    assert_eq!(retention(1.0, 0.75), 0.75);
}
