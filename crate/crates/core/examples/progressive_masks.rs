//! Prints the step-k target masks of a rotation as it sweeps from the
//! source region to the target.
//!
//! cargo run -p dragflow-core --example progressive_masks

use dragflow_core::geometry::{centroid, AffineTransform, Point2};
use dragflow_core::schedule::{full_params, interpolate, target_mask_at};
use dragflow_core::{Mask2D, RegionOp};

fn main() -> dragflow_core::Result<()> {
    let src = Mask2D::rect(24, 24, 15, 10, 20, 13);
    let anchor = Point2::new(11.5, 11.5);
    // a quarter turn: the target is the source centroid rotated about the anchor
    let target = AffineTransform::rotation(std::f64::consts::FRAC_PI_2, anchor).apply(centroid(&src)?);
    let op = RegionOp::rotation(src, target, anchor)?;
    let total = 4;
    let full = full_params(&op)?;
    for k in 0..=total + 1 {
        let m = target_mask_at(&op, k, total)?;
        println!("k = {k}  {:?}", interpolate(&full, k, total)?);
        for row in m.to_rows() {
            println!("  {}", row.replace('0', ".").replace('1', "#"));
        }
    }
    Ok(())
}
