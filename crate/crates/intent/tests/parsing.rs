use std::fs;
use std::path::PathBuf;

use dragflow_core::benchio::parse_sample;
use dragflow_core::TaskKind;
use dragflow_intent::{build_prompt, parse_response, render_response, IntentError, MAX_CANDIDATE_WORDS, PROTOCOL};

fn fixture(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel);
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn sample_a() -> dragflow_core::benchio::BenchSample {
    let text = fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/red/sample_a/instructions.json"),
    )
    .unwrap();
    parse_sample(&text).unwrap()
}

#[test]
fn every_valid_fixture_parses() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/responses");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let r = parse_response(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!((1..=10).contains(&r.candidates.len()));
        assert!(r.candidates.iter().all(|c| c.split_whitespace().count() <= MAX_CANDIDATE_WORDS));
        n += 1;
    }
    assert_eq!(n, 4);
}

#[test]
fn ten_numbered_guesses() {
    let r = parse_response(&fixture("responses/rotation_ten.txt")).unwrap();
    assert_eq!(r.label, TaskKind::Rotation);
    assert_eq!(r.candidates.len(), 10);
    assert!(r.candidates[9].starts_with("The hand now rests"));
    assert!(r.description.unwrap().starts_with("A student"));
    assert!(r.truncated.is_empty());
    assert_eq!(r.chosen_index, None);
}

#[test]
fn markdown_and_paren_numbering() {
    let r = parse_response(&fixture("responses/relocation_markdown.md")).unwrap();
    assert_eq!(r.label, TaskKind::Relocation);
    assert_eq!(r.candidates.len(), 3);
    assert_eq!(r.candidates[0], "The red mug sits on the right end of the table beside the lamp.");
}

#[test]
fn three_guesses_are_accepted() {
    let r = parse_response(&fixture("responses/deformation_three.txt")).unwrap();
    assert_eq!(r.label, TaskKind::Deformation);
    assert_eq!(r.candidates.len(), 3);
}

#[test]
fn overlong_guesses_are_cut_and_flagged() {
    let r = parse_response(&fixture("responses/overlong.txt")).unwrap();
    assert_eq!(r.candidates.len(), 10);
    assert_eq!(r.truncated, vec![0]);
    assert_eq!(r.candidates[0].split_whitespace().count(), MAX_CANDIDATE_WORDS);
    assert!(r.candidates[0].ends_with("sixty"));
    assert_eq!(r.dropped_candidates, 2);
}

#[test]
fn invalid_label_is_named() {
    let raw = fixture("invalid/scaling.txt");
    let e = parse_response(&raw).unwrap_err();
    assert!(e.to_string().contains("\"scaling\""), "{e}");
    assert_eq!(e.raw(), Some(raw.as_str()));
}

#[test]
fn missing_label_or_guesses() {
    for f in ["invalid/no_label.txt", "invalid/no_guesses.txt"] {
        assert!(matches!(parse_response(&fixture(f)), Err(IntentError::Parse { .. })), "{f}");
    }
}

#[test]
fn render_then_parse_keeps_label() {
    let cands: Vec<String> = (1..=4).map(|i| format!("guess number {i}")).collect();
    for kind in TaskKind::ALL {
        let r = parse_response(&render_response(kind, "desc", &cands)).unwrap();
        assert_eq!(r.label, kind);
        assert_eq!(r.candidates, cands);
        assert_eq!(r.description.as_deref(), Some("desc"));
    }
}

#[test]
fn prompt_contains_protocol() {
    let p = build_prompt(&sample_a());
    assert!(p.contains("ten most possible guesses"));
    assert!(p.contains("{relocation, deformation, rotation}"));
    assert!(p.contains("blue starting region, estimated green target region"));
    assert!(p.contains("(a) You should first provide a detailed description"));
    assert!(p.contains("at most 60 words for each"));
    assert!(p.starts_with(PROTOCOL));
    assert!(p.len() > 400);
    assert!(p.contains("anchor (351, 256)"), "{p}");
    assert_eq!(p, build_prompt(&sample_a()));
}
