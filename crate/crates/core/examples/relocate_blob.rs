//! Drags a Gaussian blob 12 cells right with region-level supervision and
//! reports how close the content lands.
//!
//! cargo run --release -p dragflow-core --example relocate_blob

use dragflow_core::engine::{run_drag, DragConfig};
use dragflow_core::synthetic::{content_centroid, drag_suite};

fn main() -> dragflow_core::Result<()> {
    let case = drag_suite()?.into_iter().find(|c| c.name == "relocate-0").expect("suite has relocate-0");
    let config = DragConfig::default();
    let result = run_drag(&case.z0, std::slice::from_ref(&case.op), &config)?;

    let dest = case.op.destination()?;
    let before = content_centroid(&case.z0, &case.background)?;
    let after = content_centroid(&result.final_z, &case.background)?;
    println!("source centroid  {before}");
    println!("destination      {dest}");
    println!("final centroid   {after}  (error {:.3} cells)", after.distance(dest));
    println!("iterations       {}", result.iterations_run);
    let traj = &result.centroid_trajectory[0];
    for it in [0, 9, 24, 49, traj.len() - 1] {
        println!("  tracked after iteration {:>2}: {}", it + 1, traj[it]);
    }
    Ok(())
}
