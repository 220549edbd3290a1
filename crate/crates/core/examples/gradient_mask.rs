//! Builds the editable mask for two ops and prints it with the adaptive
//! region weights.
//!
//! cargo run -p dragflow-core --example gradient_mask

use dragflow_core::geometry::Point2;
use dragflow_core::region::{build_gradient_mask, region_weights, GradientMaskOptions};
use dragflow_core::{Mask2D, RegionOp};

fn main() -> dragflow_core::Result<()> {
    let (w, h) = (40, 24);
    let small = Mask2D::disc(w, h, Point2::new(6.0, 6.0), 2.5);
    let large = Mask2D::rect(w, h, 20, 12, 27, 19);
    let ops = vec![
        RegionOp::relocation(small.clone(), Point2::new(14.0, 8.0))?,
        RegionOp::rotation(large.clone(), Point2::new(31.0, 12.0), Point2::new(28.0, 19.0))?,
    ];
    for (label, sweep) in [("endpoints only", false), ("with sweep", true)] {
        let b = build_gradient_mask(&ops, w, h, 50, GradientMaskOptions { sweep })?;
        println!("{label}: {} of {} cells editable", b.mask.count(), w * h);
        for row in b.mask.to_rows() {
            println!("  {}", row.replace('0', ".").replace('1', "#"));
        }
    }
    let weights = region_weights(&[&small, &large])?;
    println!("region weights {:?}", weights.gammas());
    Ok(())
}
