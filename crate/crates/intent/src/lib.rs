//! Intent inference for drag instructions through any OpenAI-compatible
//! chat-completion endpoint.
//!
//! The model sees the original image plus an overlay (blue source region,
//! green estimated target, arrow) and answers with a task label and up to ten
//! candidate descriptions of the edited image. Nothing in `dragflow-core`
//! depends on this crate.

mod client;
mod error;
mod parse;
mod prompt;

pub use client::{request_intent, EndpointConfig, IntentRequest, DEFAULT_API_KEY_ENV, DEFAULT_TIMEOUT};
pub use error::IntentError;
pub use parse::{parse_response, render_response, IntentResult, MAX_CANDIDATES, MAX_CANDIDATE_WORDS};
pub use prompt::{build_prompt, PROTOCOL, RESPONSE_FORMAT};
