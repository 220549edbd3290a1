//! Rotates a blob 60 degrees about the grid centre on blurred features, then
//! compares the hard-background and soft-background variants. The blur's
//! adjoint spreads gradient past the editable mask, which only the hard
//! variant blocks.
//!
//! cargo run --release -p dragflow-core --example rotate_region

use dragflow_core::engine::{run_drag, BackgroundMode, DragConfig};
use dragflow_core::extractors::ExtractorSpec;
use dragflow_core::synthetic::{content_centroid, drag_suite};

fn main() -> dragflow_core::Result<()> {
    let case = drag_suite()?.into_iter().find(|c| c.name == "rotate-2").expect("suite has rotate-2");
    let dest = case.op.destination()?;
    println!("rotate {} about {} to {dest}", case.op.begin(), case.op.anchor().expect("rotation has an anchor"));
    for (label, background) in [("hard", BackgroundMode::Hard), ("soft w=1", BackgroundMode::Soft { weight: 1.0 })] {
        let config = DragConfig {
            background,
            extractor: ExtractorSpec::GaussianBlur { sigma: 1.5 },
            ..DragConfig::default()
        };
        let r = run_drag(&case.z0, std::slice::from_ref(&case.op), &config)?;
        let outside = r.gradient_mask.complement();
        let frozen = case.z0.masked(&outside)?.max_abs_diff(&r.final_z.masked(&outside)?)?;
        let c = content_centroid(&r.final_z, &case.background)?;
        println!(
            "{label:>9}: centroid error {:.3}, max background change {frozen:.2e}",
            c.distance(dest)
        );
    }
    Ok(())
}
