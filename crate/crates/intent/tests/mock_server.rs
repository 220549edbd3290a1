//! The client against a local axum server standing in for the
//! chat-completion service.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use dragflow_core::TaskKind;
use dragflow_intent::{request_intent, EndpointConfig, IntentError, IntentRequest};
use serde_json::Value;

const FIXTURE: &str = include_str!("../fixtures/chat_completion.json");

#[derive(Clone, Copy)]
enum Script {
    Ok,
    AlwaysFail,
    FailOnce,
    Slow,
    BadLabel,
    BadRequest,
}

#[derive(Clone)]
struct Mock {
    script: Script,
    hits: Arc<AtomicUsize>,
    last: Arc<Mutex<Option<(String, Value)>>>,
}

async fn handle(State(m): State<Mock>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, String) {
    let n = m.hits.fetch_add(1, Ordering::SeqCst);
    let auth = headers.get("authorization").and_then(|v| v.to_str().ok()).unwrap_or("").to_string();
    *m.last.lock().unwrap() = Some((auth, body));
    match m.script {
        Script::Ok => (StatusCode::OK, FIXTURE.to_string()),
        Script::AlwaysFail => (StatusCode::INTERNAL_SERVER_ERROR, "upstream exploded".into()),
        Script::FailOnce if n == 0 => (StatusCode::INTERNAL_SERVER_ERROR, "try again".into()),
        Script::FailOnce => (StatusCode::OK, FIXTURE.to_string()),
        Script::Slow => {
            tokio::time::sleep(Duration::from_millis(1500)).await;
            (StatusCode::OK, FIXTURE.to_string())
        }
        Script::BadLabel => {
            let reply = serde_json::json!({"choices": [{"message": {"content": "Label: scaling\n1. bigger"}}]});
            (StatusCode::OK, reply.to_string())
        }
        Script::BadRequest => (StatusCode::BAD_REQUEST, "bad model".into()),
    }
}

async fn serve(script: Script) -> (String, Mock) {
    let mock = Mock {
        script,
        hits: Arc::new(AtomicUsize::new(0)),
        last: Arc::new(Mutex::new(None)),
    };
    let app = Router::new().route("/v1/chat/completions", post(handle)).with_state(mock.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/chat/completions"), mock)
}

// Each test uses its own variable so parallel tests never race on the
// environment.
fn config(url: &str, key_env: &str) -> EndpointConfig {
    std::env::set_var(key_env, "test-key");
    EndpointConfig {
        url: url.into(),
        model: "mock-model".into(),
        api_key_env: key_env.into(),
        timeout: Duration::from_millis(400),
        max_retry_jitter: Duration::from_millis(20),
    }
}

fn request() -> IntentRequest {
    IntentRequest {
        original_png: vec![137, 80, 78, 71],
        overlay_png: vec![137, 80, 78, 71, 1],
        prompt: "describe the drag".into(),
    }
}

#[tokio::test]
async fn success_path() {
    let (url, mock) = serve(Script::Ok).await;
    let r = request_intent(&config(&url, "DF_KEY_OK"), &request()).await.unwrap();
    assert_eq!(r.label, TaskKind::Rotation);
    assert_eq!(r.candidates.len(), 10);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
    let (auth, body) = mock.last.lock().unwrap().clone().unwrap();
    assert_eq!(auth, "Bearer test-key");
    assert_eq!(body["model"], "mock-model");
    assert_eq!(body["messages"][0]["content"][0]["text"], "describe the drag");
    assert_eq!(body["messages"][0]["content"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn server_error_is_retried_once_then_surfaced() {
    let (url, mock) = serve(Script::AlwaysFail).await;
    let e = request_intent(&config(&url, "DF_KEY_500"), &request()).await.unwrap_err();
    assert!(matches!(e, IntentError::Http { status: 500, .. }), "{e:?}");
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2);
}

#[tokio::test]
async fn retry_recovers_from_one_failure() {
    let (url, mock) = serve(Script::FailOnce).await;
    let r = request_intent(&config(&url, "DF_KEY_ONCE"), &request()).await.unwrap();
    assert_eq!(r.label, TaskKind::Rotation);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2);
}

#[tokio::test]
async fn timeout_is_its_own_error() {
    let (url, mock) = serve(Script::Slow).await;
    let e = request_intent(&config(&url, "DF_KEY_SLOW"), &request()).await.unwrap_err();
    assert!(matches!(e, IntentError::Timeout(_)), "{e:?}");
    assert_eq!(e.kind(), "timeout");
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2);
}

#[tokio::test]
async fn unparseable_reply_is_a_parse_error() {
    let (url, mock) = serve(Script::BadLabel).await;
    let e = request_intent(&config(&url, "DF_KEY_PARSE"), &request()).await.unwrap_err();
    assert!(matches!(e, IntentError::Parse { .. }), "{e:?}");
    assert!(e.to_string().contains("scaling"));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn client_errors_are_not_retried() {
    let (url, mock) = serve(Script::BadRequest).await;
    let e = request_intent(&config(&url, "DF_KEY_400"), &request()).await.unwrap_err();
    assert!(matches!(e, IntentError::Http { status: 400, .. }), "{e:?}");
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn missing_key_fails_before_any_request() {
    let (url, mock) = serve(Script::Ok).await;
    let mut cfg = config(&url, "DF_KEY_UNUSED");
    cfg.api_key_env = "DF_KEY_DEFINITELY_UNSET".into();
    let e = request_intent(&cfg, &request()).await.unwrap_err();
    assert!(matches!(e, IntentError::Config(_)), "{e:?}");
    assert_eq!(mock.hits.load(Ordering::SeqCst), 0);
}

#[tokio::test]
async fn refused_connection_is_transport() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let cfg = config(&format!("http://{addr}/v1/chat/completions"), "DF_KEY_REFUSED");
    let e = request_intent(&cfg, &request()).await.unwrap_err();
    assert!(matches!(e, IntentError::Transport(_)), "{e:?}");
}
