use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum IntentError {
    /// Raised before any network traffic.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("request timed out after {0:?}")]
    Timeout(Duration),

    #[error("service returned HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("could not parse model response: {message}")]
    Parse { message: String, raw: String },

    #[error("transport error: {0}")]
    Transport(String),
}

impl IntentError {
    pub(crate) fn parse(message: impl Into<String>, raw: &str) -> Self {
        IntentError::Parse {
            message: message.into(),
            raw: raw.to_string(),
        }
    }

    /// Short stable name for logs and HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            IntentError::Config(_) => "config",
            IntentError::Timeout(_) => "timeout",
            IntentError::Http { .. } => "http",
            IntentError::Parse { .. } => "parse",
            IntentError::Transport(_) => "transport",
        }
    }

    /// Raw response text for parse errors.
    pub fn raw(&self) -> Option<&str> {
        match self {
            IntentError::Parse { raw, .. } => Some(raw),
            _ => None,
        }
    }
}
