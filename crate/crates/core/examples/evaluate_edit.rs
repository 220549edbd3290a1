//! Scores three edits of a blob: no edit, a perfect translation, and a
//! region-mode run.
//!
//! cargo run --release -p dragflow-core --example evaluate_edit

use dragflow_core::engine::{run_drag, DragConfig};
use dragflow_core::extractors::Identity;
use dragflow_core::geometry::{warp_field, AffineTransform, Point2};
use dragflow_core::metrics::{evaluate, render_table, EvalOptions};
use dragflow_core::synthetic::{disc_mask, gaussian_blob};
use dragflow_core::RegionOp;

fn main() -> dragflow_core::Result<()> {
    let n = 48;
    let b = Point2::new(16.0, 24.0);
    let x = gaussian_blob(1, n, n, b, 2.0, 1.0);
    let op = RegionOp::relocation(disc_mask(n, n, b, 5.0), Point2::new(28.0, 24.0))?;
    let ops = [op];
    let opts = EvalOptions::default();

    let shifted = warp_field(&x, &AffineTransform::translation(Point2::new(12.0, 0.0)))?;
    let dragged = run_drag(&x, &ops, &DragConfig::default())?.final_z;
    let rows = vec![
        ("identity edit".to_string(), evaluate(&x, &x, &ops, &Identity, &opts)?),
        ("perfect translation".to_string(), evaluate(&x, &shifted, &ops, &Identity, &opts)?),
        ("region drag".to_string(), evaluate(&x, &dragged, &ops, &Identity, &opts)?),
    ];
    print!("{}", render_table(&rows));
    Ok(())
}
