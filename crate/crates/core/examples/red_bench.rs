//! Parses, round-trips and validates the two checked-in benchmark samples.
//! With `--regenerate` it first rewrites their placeholder image and masks.
//!
//! cargo run -p dragflow-core --example red_bench [-- --regenerate]

use std::path::PathBuf;

use dragflow_core::benchio::{parse_sample, serialize_sample, validate_dataset, write_synthetic_assets};

/// Image size and mask disc radius of the placeholder assets.
const SIZE: u32 = 512;
const MASK_RADIUS: f64 = 24.0;

fn main() -> dragflow_core::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/red");
    let regenerate = std::env::args().any(|a| a == "--regenerate");
    for name in ["sample_a", "sample_b"] {
        let dir = root.join(name);
        let text = std::fs::read_to_string(dir.join("instructions.json")).map_err(|e| dragflow_core::Error::Io {
            path: dir.join("instructions.json"),
            source: e,
        })?;
        let sample = parse_sample(&text)?;
        let stable = serialize_sample(&sample) == text;
        println!(
            "{name}: {} region op(s), {} point pair(s), byte-stable round trip: {stable}",
            sample.region_operations.len(),
            sample.point_operations.begin_points.len()
        );
        for (i, r) in &sample.region_operations {
            println!("  region {i}: {} from {} to {}", r.task, r.begin, r.target);
        }
        if regenerate {
            write_synthetic_assets(&dir, &sample, SIZE, SIZE, MASK_RADIUS)?;
        }
    }
    print!("{}", validate_dataset(&root)?.to_text());
    Ok(())
}
