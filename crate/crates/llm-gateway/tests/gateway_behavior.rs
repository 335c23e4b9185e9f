//! Record/replay semantics, retry accounting, structured-output
//! validation, and the per-role concurrency cap.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use llm_gateway::{
    fixture_count, CompletionRequest, Gateway, GatewayConfig, GatewayError, Mode, ModelRole,
    Provider, ScriptedProvider, SequenceProvider,
};
use serde::Deserialize;

fn config(mode: Mode, fixtures: Option<std::path::PathBuf>) -> GatewayConfig {
    GatewayConfig {
        mode,
        fixture_path: fixtures,
        retry_base: Duration::from_millis(1),
        ..GatewayConfig::default()
    }
}

/// Provider that panics if anything reaches the network layer.
struct PanicProvider;

impl Provider for PanicProvider {
    fn complete(&self, _: &str, _: &CompletionRequest) -> Result<String, String> {
        panic!("replay mode must never invoke a provider");
    }
    fn kind(&self) -> &'static str {
        "panic"
    }
}

/// Provider that fails a fixed number of times, then echoes.
struct Flaky {
    failures: AtomicUsize,
}

impl Provider for Flaky {
    fn complete(&self, _: &str, request: &CompletionRequest) -> Result<String, String> {
        if self.failures.load(Ordering::SeqCst) > 0 {
            self.failures.fetch_sub(1, Ordering::SeqCst);
            return Err("simulated transport failure".into());
        }
        Ok(format!("echo: {}", request.user))
    }
    fn kind(&self) -> &'static str {
        "flaky"
    }
}

#[test]
fn record_then_replay_round_trips_every_response() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("fixtures.jsonl");

    let requests: Vec<CompletionRequest> = (0..3)
        .map(|i| CompletionRequest::new(ModelRole::Oracle, "system", format!("query {i}")))
        .collect();

    let recorded: Vec<String> = {
        let provider = ScriptedProvider::new(|req, _| Some(format!("answer to: {}", req.user)));
        let gw =
            Gateway::with_provider(config(Mode::Record, Some(store.clone())), Box::new(provider))
                .unwrap();
        requests.iter().map(|r| gw.complete(r).unwrap()).collect()
    };
    assert_eq!(fixture_count(&store).unwrap(), 3);

    let gw = Gateway::with_provider(config(Mode::Replay, Some(store.clone())), Box::new(PanicProvider))
        .unwrap();
    for (request, expected) in requests.iter().zip(&recorded) {
        assert_eq!(&gw.complete(request).unwrap(), expected);
    }
    assert_eq!(gw.network_calls(), 0);
    assert_eq!(gw.replay_hits(), 3);
}

#[test]
fn replay_with_empty_store_reports_missing_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("empty.jsonl");
    std::fs::write(&store, "").unwrap();
    let gw =
        Gateway::with_provider(config(Mode::Replay, Some(store)), Box::new(PanicProvider)).unwrap();
    let req = CompletionRequest::new(ModelRole::Judge, "s", "u");
    match gw.complete(&req) {
        Err(GatewayError::MissingFixture { role, .. }) => assert_eq!(role, "judge"),
        other => panic!("expected MissingFixture, got {other:?}"),
    }
}

#[test]
fn corrupt_store_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("broken.jsonl");
    std::fs::write(&store, "{\"request_digest\": \"ok-but-incomplete\"}\n").unwrap();
    match Gateway::with_provider(config(Mode::Replay, Some(store)), Box::new(PanicProvider)) {
        Err(GatewayError::FixtureStoreCorrupt { line, .. }) => assert_eq!(line, 1),
        other => panic!("expected FixtureStoreCorrupt, got {:?}", other.err()),
    }
}

#[test]
fn replay_mode_requires_store_path() {
    match Gateway::with_provider(config(Mode::Replay, None), Box::new(PanicProvider)) {
        Err(GatewayError::InvalidConfig(msg)) => assert!(msg.contains("fixture store")),
        other => panic!("expected InvalidConfig, got {:?}", other.err()),
    }
}

#[test]
fn compressor_and_evaluator_models_must_differ() {
    let mut cfg = config(Mode::Live, None);
    cfg.models.compressor = "same-model".into();
    cfg.models.evaluator = "same-model".into();
    match Gateway::with_provider(cfg, Box::new(PanicProvider)) {
        Err(GatewayError::InvalidConfig(msg)) => assert!(msg.contains("distinct")),
        other => panic!("expected InvalidConfig, got {:?}", other.err()),
    }
}

#[test]
fn transport_failures_are_retried_with_backoff() {
    let gw = Gateway::with_provider(
        config(Mode::Live, None),
        Box::new(Flaky {
            failures: AtomicUsize::new(2),
        }),
    )
    .unwrap();
    let req = CompletionRequest::new(ModelRole::Evaluator, "s", "hello");
    assert_eq!(gw.complete(&req).unwrap(), "echo: hello");
    assert_eq!(gw.network_calls(), 3);
}

#[test]
fn exhausted_transport_attempts_surface_provider_unreachable() {
    let gw = Gateway::with_provider(
        config(Mode::Live, None),
        Box::new(Flaky {
            failures: AtomicUsize::new(usize::MAX),
        }),
    )
    .unwrap();
    let req = CompletionRequest::new(ModelRole::Evaluator, "s", "hello");
    match gw.complete(&req) {
        Err(GatewayError::ProviderUnreachable { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("expected ProviderUnreachable, got {other:?}"),
    }
}

#[derive(Deserialize, Debug, PartialEq)]
struct Labels {
    labels: Vec<String>,
}

#[test]
fn structured_output_parses_on_first_valid_attempt() {
    let gw = Gateway::with_provider(
        config(Mode::Live, None),
        Box::new(SequenceProvider::of_ok(&[r#"{"labels": ["core_rule"]}"#])),
    )
    .unwrap();
    let req = CompletionRequest::new(ModelRole::Compressor, "s", "classify")
        .with_schema(r#"{"labels": ["string"]}"#);
    let parsed: Labels = gw.complete_structured(&req).unwrap();
    assert_eq!(parsed.labels, vec!["core_rule"]);
    assert_eq!(gw.network_calls(), 1);
}

#[test]
fn structured_output_retries_then_succeeds() {
    let gw = Gateway::with_provider(
        config(Mode::Live, None),
        Box::new(SequenceProvider::of_ok(&[
            "I cannot answer that.",
            "{\"labels\": [unquoted]}",
            "```json\n{\"labels\": [\"example\"]}\n```",
        ])),
    )
    .unwrap();
    let req = CompletionRequest::new(ModelRole::Compressor, "s", "classify");
    let parsed: Labels = gw.complete_structured(&req).unwrap();
    assert_eq!(parsed.labels, vec!["example"]);
    assert_eq!(gw.network_calls(), 3);
}

#[test]
fn structured_output_gives_up_after_three_attempts() {
    let gw = Gateway::with_provider(
        config(Mode::Live, None),
        Box::new(SequenceProvider::of_ok(&["nope", "still no", "never"])),
    )
    .unwrap();
    let req = CompletionRequest::new(ModelRole::Compressor, "s", "classify");
    match gw.complete_structured::<Labels>(&req) {
        Err(GatewayError::FailedAfterRetries { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("expected FailedAfterRetries, got {other:?}"),
    }
    assert_eq!(gw.network_calls(), 3);
}

#[test]
fn per_role_concurrency_cap_is_enforced() {
    struct Gauge {
        current: AtomicUsize,
        peak: AtomicUsize,
    }
    struct SlowProvider {
        gauge: Arc<Gauge>,
    }
    impl Provider for SlowProvider {
        fn complete(&self, _: &str, _: &CompletionRequest) -> Result<String, String> {
            let now = self.gauge.current.fetch_add(1, Ordering::SeqCst) + 1;
            self.gauge.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(25));
            self.gauge.current.fetch_sub(1, Ordering::SeqCst);
            Ok("done".into())
        }
        fn kind(&self) -> &'static str {
            "slow"
        }
    }

    let gauge = Arc::new(Gauge {
        current: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
    });
    let mut cfg = config(Mode::Live, None);
    cfg.max_concurrent = 2;
    let gw = Arc::new(
        Gateway::with_provider(
            cfg,
            Box::new(SlowProvider {
                gauge: Arc::clone(&gauge),
            }),
        )
        .unwrap(),
    );

    let handles: Vec<_> = (0..6)
        .map(|i| {
            let gw = Arc::clone(&gw);
            std::thread::spawn(move || {
                let req =
                    CompletionRequest::new(ModelRole::Oracle, "s", format!("q{i}"));
                gw.complete(&req).unwrap();
            })
        })
        .collect();
    for handle in handles {
        handle.join().unwrap();
    }
    assert!(
        gauge.peak.load(Ordering::SeqCst) <= 2,
        "peak concurrency {} exceeded the cap",
        gauge.peak.load(Ordering::SeqCst)
    );
}
