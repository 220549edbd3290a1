use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::IntentError;
use crate::parse::{parse_response, IntentResult};

pub const DEFAULT_API_KEY_ENV: &str = "DRAGFLOW_INTENT_API_KEY";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Where and how to call the chat-completion service.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    /// Full URL of the chat-completions route.
    pub url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    #[serde(with = "millis")]
    pub timeout: Duration,
    /// Upper bound of the random pause before the single retry.
    #[serde(with = "millis")]
    pub max_retry_jitter: Duration,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout: DEFAULT_TIMEOUT,
            max_retry_jitter: Duration::from_millis(500),
        }
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

mod b64 {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        STANDARD.decode(s).map_err(serde::de::Error::custom)
    }
}

/// PNG bytes travel as base64 strings in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentRequest {
    #[serde(with = "b64")]
    pub original_png: Vec<u8>,
    #[serde(with = "b64")]
    pub overlay_png: Vec<u8>,
    pub prompt: String,
}

fn data_url(png: &[u8]) -> String {
    format!("data:image/png;base64,{}", STANDARD.encode(png))
}

fn request_body(config: &EndpointConfig, req: &IntentRequest) -> Value {
    json!({
        "model": config.model,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": req.prompt},
                {"type": "image_url", "image_url": {"url": data_url(&req.original_png)}},
                {"type": "image_url", "image_url": {"url": data_url(&req.overlay_png)}},
            ],
        }],
    })
}

fn reply_text(body: &str) -> Result<String, IntentError> {
    let v: Value = serde_json::from_str(body).map_err(|e| IntentError::parse(format!("response is not JSON: {e}"), body))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| IntentError::parse("response has no choices[0].message.content string", body))
}

enum Attempt {
    Done(Result<IntentResult, IntentError>),
    Retry(IntentError),
}

async fn attempt(client: &reqwest::Client, config: &EndpointConfig, key: &str, body: &Value) -> Attempt {
    let sent = client.post(&config.url).bearer_auth(key).json(body).send().await;
    let resp = match sent {
        Ok(r) => r,
        Err(e) if e.is_timeout() => return Attempt::Retry(IntentError::Timeout(config.timeout)),
        Err(e) => return Attempt::Retry(IntentError::Transport(e.to_string())),
    };
    let status = resp.status();
    let text = match resp.text().await {
        Ok(t) => t,
        Err(e) if e.is_timeout() => return Attempt::Retry(IntentError::Timeout(config.timeout)),
        Err(e) => return Attempt::Retry(IntentError::Transport(e.to_string())),
    };
    if !status.is_success() {
        let err = IntentError::Http {
            status: status.as_u16(),
            body: text,
        };
        return if status.is_server_error() || status.as_u16() == 429 {
            Attempt::Retry(err)
        } else {
            Attempt::Done(Err(err))
        };
    }
    Attempt::Done(reply_text(&text).and_then(|t| parse_response(&t)))
}

/// One chat-completion round trip, retried once after a jittered pause on
/// timeouts, transport failures, 5xx and 429. The API key is read before any
/// network traffic.
pub async fn request_intent(config: &EndpointConfig, req: &IntentRequest) -> Result<IntentResult, IntentError> {
    let key = std::env::var(&config.api_key_env)
        .ok()
        .filter(|k| !k.trim().is_empty())
        .ok_or_else(|| IntentError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
    let url = reqwest::Url::parse(&config.url).map_err(|e| IntentError::Config(format!("bad endpoint url {:?}: {e}", config.url)))?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(IntentError::Config(format!("unsupported url scheme {:?}", url.scheme())));
    }
    let client = reqwest::Client::builder()
        .timeout(config.timeout)
        .build()
        .map_err(|e| IntentError::Config(e.to_string()))?;
    let body = request_body(config, req);
    match attempt(&client, config, &key, &body).await {
        Attempt::Done(r) => r,
        Attempt::Retry(first) => {
            let cap = config.max_retry_jitter.as_millis() as u64;
            let pause = if cap == 0 { 0 } else { rand::rng().random_range(0..=cap) };
            tracing::warn!(error = %first, pause_ms = pause, "intent request failed, retrying once");
            tokio::time::sleep(Duration::from_millis(pause)).await;
            match attempt(&client, config, &key, &body).await {
                Attempt::Done(r) => r,
                Attempt::Retry(e) => Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_carries_prompt_and_both_images() {
        let req = IntentRequest {
            original_png: vec![1, 2, 3],
            overlay_png: vec![4, 5],
            prompt: "hello".into(),
        };
        let b = request_body(&EndpointConfig::default(), &req);
        assert_eq!(b["messages"][0]["content"][0]["text"], "hello");
        assert_eq!(b["messages"][0]["content"][1]["image_url"]["url"], "data:image/png;base64,AQID");
        assert_eq!(b["messages"][0]["content"][2]["image_url"]["url"], "data:image/png;base64,BAU=");
    }

    #[test]
    fn request_json_round_trips() {
        let req = IntentRequest {
            original_png: vec![0, 255, 7],
            overlay_png: vec![],
            prompt: "p".into(),
        };
        let s = serde_json::to_string(&req).unwrap();
        assert_eq!(serde_json::from_str::<IntentRequest>(&s).unwrap(), req);
    }

    #[test]
    fn reply_extraction() {
        assert_eq!(reply_text(r#"{"choices":[{"message":{"content":"x"}}]}"#).unwrap(), "x");
        assert!(matches!(reply_text("{}"), Err(IntentError::Parse { .. })));
        assert!(matches!(reply_text("<html>"), Err(IntentError::Parse { .. })));
    }
}
