use super::*;
use crate::geometry::Mask2D;
use crate::schedule::full_params;

const SAMPLE_A: &str = include_str!("../../fixtures/red/sample_a/instructions.json");
const SAMPLE_B: &str = include_str!("../../fixtures/red/sample_b/instructions.json");

fn schema_path(r: Result<BenchSample>) -> String {
    match r {
        Err(Error::Schema { path, .. }) => path,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn parses_rotation_sample() {
    let s = parse_sample(SAMPLE_A).unwrap();
    let r = &s.region_operations[&0];
    assert_eq!(r.task, TaskKind::Rotation);
    assert_eq!(r.begin, Point2::new(337.0, 175.0));
    assert_eq!(r.target, Point2::new(379.0, 179.0));
    assert_eq!(r.anchor, Some(Point2::new(351.0, 256.0)));
    assert_eq!(s.point_operations.begin_points.len(), 2);
}

#[test]
fn parses_deformation_sample() {
    let s = parse_sample(SAMPLE_B).unwrap();
    assert_eq!(s.region_operations.len(), 3);
    assert!(s.region_operations.values().all(|r| r.task == TaskKind::Deformation && r.anchor.is_none()));
    assert_eq!(s.point_operations.target_points.len(), 6);
}

#[test]
fn serialization_is_byte_stable() {
    for text in [SAMPLE_A, SAMPLE_B] {
        let s = parse_sample(text).unwrap();
        let out = serialize_sample(&s);
        assert_eq!(out, text);
        assert_eq!(parse_sample(&out).unwrap(), s);
        assert_eq!(serialize_sample(&parse_sample(&out).unwrap()), out);
    }
}

#[test]
fn fractional_coordinates_survive() {
    let mut s = parse_sample(SAMPLE_A).unwrap();
    s.point_operations.begin_points[0] = Point2::new(326.25, 0.1);
    let out = serialize_sample(&s);
    assert!(out.contains("[326.25, 0.1]"));
    assert!(out.contains("[342, 190]"));
    assert_eq!(parse_sample(&out).unwrap(), s);
}

#[test]
fn mutations_report_their_path() {
    let cases: Vec<(&str, &str, &str)> = vec![
        ("\"anchors\": [351, 256]", "\"anchors\": null", "region_operations.0.anchors"),
        ("\"rotation\"", "\"scaling\"", "region_operations.0.task"),
        ("[[337, 175], [379, 179]]", "[[337, 175], [379, 179], [1, 1]]", "region_operations.0.centroids"),
        ("[[337, 175], [379, 179]]", "[[337, 175], [379]]", "region_operations.0.centroids.1"),
        ("[[337, 175], [379, 179]]", "[[337, 175], [379, \"a\"]]", "region_operations.0.centroids.1.1"),
        ("\"0\": {", "\"x\": {", "region_operations.x"),
        ("\"0\": {", "\"01\": {", "region_operations.01"),
        ("\"target_points\": [[400, 116], [376, 198]]", "\"target_points\": [[400, 116]]", "point_operations.target_points"),
        ("\"begin_points\"", "\"begin_pts\"", "point_operations.begin_pts"),
        ("\"anchors\": [351, 256]", "\"anchors\": [351, 256], \"extra\": 1", "region_operations.0.extra"),
        ("\"task\": \"rotation\",", "", "region_operations.0.task"),
    ];
    for (from, to, path) in cases {
        assert!(SAMPLE_A.contains(from), "fixture lacks {from}");
        let text = SAMPLE_A.replacen(from, to, 1);
        assert_eq!(schema_path(parse_sample(&text)), path, "mutation {from} -> {to}");
    }
}

#[test]
fn prompt_fields_are_checked() {
    let head = &SAMPLE_A[..SAMPLE_A.find(",\n    \"editing_prompt\"").unwrap()];
    assert_eq!(schema_path(parse_sample(&format!("{head}\n}}"))), "editing_prompt");
    assert_eq!(schema_path(parse_sample(&format!("{head},\n    \"editing_prompt\": 3\n}}"))), "editing_prompt");
}

#[test]
fn rotation_without_anchor_names_the_field() {
    let text = SAMPLE_A.replace("[351, 256]", "null");
    let err = parse_sample(&text).unwrap_err().to_string();
    assert!(err.starts_with("region_operations.0.anchors:"), "{err}");
}

#[test]
fn deformation_with_anchor_is_rejected() {
    let text = SAMPLE_B.replacen("\"anchors\": null", "\"anchors\": [1, 2]", 1);
    assert_eq!(schema_path(parse_sample(&text)), "region_operations.0.anchors");
}

#[test]
fn malformed_json_reports_position() {
    // the original listing of this record dropped a comma between two keys
    let text = SAMPLE_B.replacen("]],\n        \"target_points\"", "]]\n        \"target_points\"", 1);
    let err = parse_sample(&text).unwrap_err().to_string();
    assert!(err.contains("malformed JSON at line"), "{err}");
}

#[test]
fn unknown_task_message() {
    let text = SAMPLE_A.replace("\"rotation\"", "\"scaling\"");
    let err = parse_sample(&text).unwrap_err().to_string();
    assert!(err.contains("unknown task label \"scaling\""), "{err}");
}

#[test]
fn synthetic_dataset_validates() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("a", SAMPLE_A), ("b", SAMPLE_B)] {
        let s = parse_sample(text).unwrap();
        write_synthetic_assets(&dir.path().join(name), &s, 512, 512, 12.0).unwrap();
    }
    let report = validate_dataset(dir.path()).unwrap();
    assert_eq!(report.passed, 2, "{}", report.to_text());
    assert!(report.to_text().ends_with("2 passed, 0 failed\n"));
    let s = parse_sample(SAMPLE_A).unwrap();
    let masks = load_masks(&dir.path().join("a"), &s).unwrap();
    let ops = sample_region_ops(&s, &masks).unwrap();
    assert!(full_params(&ops[0]).is_ok());
}

#[test]
fn validation_reports_each_problem() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_sample(SAMPLE_B).unwrap();
    let sample = dir.path().join("b");
    write_synthetic_assets(&sample, &s, 512, 512, 12.0).unwrap();
    // mask 1 displaced by 10 px, mask 2 the wrong size, mask 0 missing
    Mask2D::disc(512, 512, Point2::new(291.0, 200.0), 12.0).save_png(sample.join("1.png")).unwrap();
    Mask2D::disc(256, 256, Point2::new(221.0, 200.0), 12.0).save_png(sample.join("2.png")).unwrap();
    std::fs::remove_file(sample.join("0.png")).unwrap();
    let r = validate_sample_dir(&sample);
    assert!(!r.passed);
    let text = r.reasons.join("\n");
    assert!(text.contains("0.png: unreadable"), "{text}");
    assert!(text.contains("region 1: mask centroid"), "{text}");
    assert!(text.contains("2.png: mask is 256x256 but image is 512x512"), "{text}");
}

#[test]
fn validation_flags_points_outside_image() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_sample(SAMPLE_A).unwrap();
    write_synthetic_assets(&dir.path().join("a"), &s, 384, 384, 12.0).unwrap();
    let r = validate_sample_dir(&dir.path().join("a"));
    assert!(r.reasons.iter().any(|m| m.starts_with("point_operations.target_points.0")), "{:?}", r.reasons);
}

#[test]
fn point_pairs_group_by_mask() {
    let pairs = parse_point_pairs(
        r#"{"handle_points": [[10, 10], [12, 10], [40, 40]], "target_points": [[20, 10], [24, 12], [40, 30]], "prompt": "move"}"#,
    )
    .unwrap();
    let masks = [
        Mask2D::rect(64, 64, 8, 8, 15, 13),
        Mask2D::disc(64, 64, Point2::new(40.0, 40.0), 3.0),
    ];
    let s = from_point_pairs(&pairs, &masks).unwrap();
    let r0 = &s.region_operations[&0];
    assert_eq!(r0.task, TaskKind::Relocation);
    assert!((r0.target - r0.begin).distance(Point2::new(11.0, 1.0)) < 1e-12);
    let r1 = &s.region_operations[&1];
    assert!((r1.target - r1.begin).distance(Point2::new(0.0, -10.0)) < 1e-12);
    assert_eq!(s.editing_prompt, "move");
    assert!(parse_sample(&serialize_sample(&s)).is_ok());
}

#[test]
fn point_pairs_errors() {
    let e = parse_point_pairs(r#"{"handle_points": [[1, 1]], "target_points": []}"#).unwrap_err();
    assert!(e.to_string().starts_with("target_points:"), "{e}");
    let e = parse_point_pairs(r#"{"handle_points": [[1, 1]], "target_points": [[1, "x"]]}"#).unwrap_err();
    assert!(matches!(e, Error::Schema { .. }));
    let pairs = parse_point_pairs(r#"{"handle_points": [[1, 1]], "target_points": [[2, 2]]}"#).unwrap();
    assert!(from_point_pairs(&pairs, &[Mask2D::rect(8, 8, 5, 5, 7, 7)]).is_err());
}
