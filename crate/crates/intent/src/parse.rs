use std::sync::LazyLock;

use dragflow_core::TaskKind;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::IntentError;

pub const MAX_CANDIDATES: usize = 10;
pub const MAX_CANDIDATE_WORDS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntentResult {
    pub label: TaskKind,
    /// Between one and ten entries, each at most sixty words.
    pub candidates: Vec<String>,
    pub description: Option<String>,
    /// Indices of candidates that were cut to the word limit.
    pub truncated: Vec<usize>,
    /// Set when the reply listed more than ten guesses.
    pub dropped_candidates: usize,
    pub chosen_index: Option<usize>,
}

static LABEL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)^[\s>*#_-]*(?:task\s+)?(?:label|class|task)[*_]*\s*[:=\-][\s*_`\x22']*([A-Za-z]+)").unwrap()
});
static NUMBERED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:[*_]*(?:guess|candidate)\s*)?\(?(\d{1,2})[.):][*_]*\s+(.+)$").unwrap());
static DESCRIPTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)^[\s*_]*description[*_]*\s*:\s*(.+)$").unwrap());

fn clip_words(s: &str) -> (String, bool) {
    let words: Vec<&str> = s.split_whitespace().collect();
    if words.len() > MAX_CANDIDATE_WORDS {
        (words[..MAX_CANDIDATE_WORDS].join(" "), true)
    } else {
        (words.join(" "), false)
    }
}

/// Accepted reply conventions: a `Label:` (or `Class:` / `Task:`) line, and
/// guesses as a numbered list (`1.`, `1)`, `Guess 1:`). Markdown emphasis
/// around either is ignored. Numbered lines before the first guess header are
/// still taken as guesses, because models often skip the header.
pub fn parse_response(text: &str) -> Result<IntentResult, IntentError> {
    let caps = LABEL
        .captures(text)
        .ok_or_else(|| IntentError::parse("no task label line found", text))?;
    let word = caps[1].to_ascii_lowercase();
    let label: TaskKind = word.parse().map_err(|_| {
        IntentError::parse(
            format!("invalid task label \"{word}\"; expected one of relocation, deformation, rotation"),
            text,
        )
    })?;

    let mut candidates = Vec::new();
    let mut truncated = Vec::new();
    let mut dropped = 0;
    for line in text.lines() {
        let Some(c) = NUMBERED.captures(line) else { continue };
        let body = c[2].trim().trim_matches(|ch| ch == '"' || ch == '\u{201c}' || ch == '\u{201d}');
        if body.is_empty() {
            continue;
        }
        if candidates.len() == MAX_CANDIDATES {
            dropped += 1;
            continue;
        }
        let (clipped, cut) = clip_words(body);
        if cut {
            truncated.push(candidates.len());
        }
        candidates.push(clipped);
    }
    if candidates.is_empty() {
        return Err(IntentError::parse("no numbered guesses found", text));
    }
    if !truncated.is_empty() {
        tracing::warn!(count = truncated.len(), "candidates truncated to {MAX_CANDIDATE_WORDS} words");
    }
    let description = DESCRIPTION.captures(text).map(|c| c[1].trim().to_string());
    Ok(IntentResult {
        label,
        candidates,
        description,
        truncated,
        dropped_candidates: dropped,
        chosen_index: None,
    })
}

/// Writes a reply in the layout requested by the prompt.
pub fn render_response(label: TaskKind, description: &str, candidates: &[String]) -> String {
    let mut out = format!("Label: {label}\nDescription: {description}\nGuesses:\n");
    for (i, c) in candidates.iter().enumerate() {
        out.push_str(&format!("{}. {c}\n", i + 1));
    }
    out
}
