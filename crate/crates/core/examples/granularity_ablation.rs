//! Region-level supervision against the point baseline on a fine and a
//! compressed extractor, with matched budgets. Takes a few seconds in
//! release mode.
//!
//! cargo run --release -p dragflow-core --example granularity_ablation

use dragflow_core::suite::{granularity_ablation, render_ablation};

fn main() -> dragflow_core::Result<()> {
    let rows = granularity_ablation()?;
    print!("{}", render_ablation(&rows));
    println!();
    for row in &rows {
        println!("{}", row.label);
        for (r, p) in row.region.iter().zip(&row.point) {
            println!(
                "  {:<11} MD1 {:6.2} -> region {:6.2} (centroid err {:5.2}) | point {:6.2} (centroid err {:5.2})",
                r.name, r.md1_initial, r.md1_final, r.centroid_error, p.md1_final, p.centroid_error
            );
        }
    }
    Ok(())
}
