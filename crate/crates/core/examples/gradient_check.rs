//! Central finite differences against the adjoint gradient of a Huber loss
//! on features, for each toy extractor.
//!
//! cargo run --release -p dragflow-core --example gradient_check

use dragflow_core::engine::LossMode;
use dragflow_core::extractors::{fd_gradient_check, ExtractorSpec};
use dragflow_core::synthetic::random_field;
use dragflow_core::Field;

fn main() -> dragflow_core::Result<()> {
    let z = random_field(2, 32, 32, 3);
    let mode = LossMode::huber();
    for spec in [
        ExtractorSpec::Identity,
        ExtractorSpec::GaussianBlur { sigma: 1.0 },
        ExtractorSpec::PooledBlur { stride: 4, sigma: 1.0 },
    ] {
        let ex = spec.build()?;
        let target = ex.extract(&random_field(2, 32, 32, 4))?;
        let loss = |f: &Field| -> dragflow_core::Result<(f64, Field)> {
            let value = f.data().iter().zip(target.data()).map(|(a, b)| mode.eval(a - b).0).sum();
            Ok((value, f.zip_map(&target, |a, b| mode.eval(a - b).1)?))
        };
        let check = fd_gradient_check(ex.as_ref(), loss, &z, 1e-6, 64, 11)?;
        println!(
            "{:<40} max relative error {:.2e} over {} coordinates",
            format!("{spec:?}"),
            check.max_rel_error,
            check.coords_checked
        );
    }
    Ok(())
}
