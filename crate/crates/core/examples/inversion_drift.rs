//! Round-trip drift of rectified-flow and DDIM inversion at several step
//! counts.
//!
//! cargo run --release -p dragflow-core --example inversion_drift

use dragflow_core::flow::{
    roundtrip_drift, ConstantLinearNoise, ConstantVelocity, NoiseSchedule, SinVelocity, Solver,
    StepConsistentLinearNoise,
};
use dragflow_core::synthetic::texture;

fn main() -> dragflow_core::Result<()> {
    let z0 = texture(1, 32, 32, 1.0, 7)?;
    let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02)?;
    let consistent = StepConsistentLinearNoise {
        rho: 2.0,
        schedule: schedule.clone(),
    };
    let naive = ConstantLinearNoise { scale: 0.5 };
    println!("{:<28} {:>6} {:>12} {:>10} {:>8}", "solver", "steps", "MAE", "PSNR dB", "SSIM");
    for steps in [8, 16, 32, 64] {
        let rows = [
            ("rf, constant velocity", roundtrip_drift(&z0, steps, Solver::RectifiedFlow(&ConstantVelocity::Uniform(1.0)))?),
            ("rf, v = sin(z)", roundtrip_drift(&z0, steps, Solver::RectifiedFlow(&SinVelocity))?),
            (
                "ddim, step-consistent eps",
                roundtrip_drift(&z0, steps, Solver::Ddim { schedule: &schedule, predictor: &consistent })?,
            ),
            (
                "ddim, eps = 0.5 z",
                roundtrip_drift(&z0, steps, Solver::Ddim { schedule: &schedule, predictor: &naive })?,
            ),
        ];
        for (label, r) in rows {
            println!("{label:<28} {steps:>6} {:>12.3e} {:>10.2} {:>8.5}", r.mae, r.psnr_db, r.ssim);
        }
    }
    Ok(())
}
