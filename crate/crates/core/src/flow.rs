//! Rectified-flow and DDIM forward (inversion) and backward (denoising)
//! steps on pluggable predictors, plus round-trip drift measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::metrics::{psnr, ssim};

/// Time tolerance for `t + dt ≤ 1` style checks, so uniform grids built by
/// repeated addition are not rejected at the last step.
const TIME_EPS: f64 = 1e-9;

/// `β_1..β_T` with cumulative products `ᾱ_t`, using `ᾱ_0 = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alpha_bar: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    betas: Vec<f64>,
}

impl TryFrom<RawSchedule> for NoiseSchedule {
    type Error = Error;
    fn try_from(r: RawSchedule) -> Result<Self> {
        NoiseSchedule::new(r.betas)
    }
}

impl From<NoiseSchedule> for RawSchedule {
    fn from(s: NoiseSchedule) -> Self {
        RawSchedule { betas: s.betas }
    }
}

impl NoiseSchedule {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidSchedule("at least one beta is required".into()));
        }
        let mut alpha_bar = Vec::with_capacity(betas.len() + 1);
        alpha_bar.push(1.0);
        for (i, &b) in betas.iter().enumerate() {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidSchedule(format!("beta[{}] = {b} is outside (0, 1)", i + 1)));
            }
            let prev = alpha_bar[i];
            let next = prev * (1.0 - b);
            if !(next < prev && next > 0.0) {
                return Err(Error::InvalidSchedule(format!("alpha_bar is not strictly decreasing at t = {}", i + 1)));
            }
            alpha_bar.push(next);
        }
        Ok(NoiseSchedule { betas, alpha_bar })
    }

    pub fn uniform(steps: usize, beta: f64) -> Result<Self> {
        Self::new(vec![beta; steps])
    }

    /// Linearly spaced betas from `start` to `end` inclusive.
    pub fn linear(steps: usize, start: f64, end: f64) -> Result<Self> {
        let betas = (0..steps)
            .map(|i| {
                if steps == 1 {
                    start
                } else {
                    start + (end - start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect();
        Self::new(betas)
    }

    /// Number of steps `T`.
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `ᾱ_t` for `t` in `0..=T`.
    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        self.alpha_bar
            .get(t)
            .copied()
            .ok_or(Error::TimestepOutOfRange { t, max: self.len() })
    }
}

/// Velocity field `v(z, t)` of a rectified flow, `t ∈ [0, 1]`.
pub trait VelocityPredictor: Send + Sync {
    fn evaluate(&self, z: &Field, t: f64) -> Result<Field>;
}

/// Noise prediction `ε̂(z, t)` at integer step `t`.
pub trait NoisePredictor: Send + Sync {
    fn evaluate(&self, z: &Field, t: usize) -> Result<Field>;
}

/// Velocity that ignores `z` and `t`.
#[derive(Clone, Debug)]
pub enum ConstantVelocity {
    Uniform(f64),
    Field(Field),
}

impl VelocityPredictor for ConstantVelocity {
    fn evaluate(&self, z: &Field, _t: f64) -> Result<Field> {
        match self {
            ConstantVelocity::Uniform(v) => {
                let (c, h, w) = z.shape();
                Ok(Field::filled(c, h, w, *v))
            }
            ConstantVelocity::Field(f) => {
                z.check_shape(f)?;
                Ok(f.clone())
            }
        }
    }
}

/// `v(z, t) = sin(z)`: nonlinear, so Euler round trips drift at first order.
#[derive(Clone, Copy, Debug, Default)]
pub struct SinVelocity;

impl VelocityPredictor for SinVelocity {
    fn evaluate(&self, z: &Field, _t: f64) -> Result<Field> {
        Ok(z.map(f64::sin))
    }
}

/// `ε̂(z, t) = scale · z` regardless of `t`.
///
/// Not step-consistent: the implied clean latent changes between `t − 1` and
/// `t`, so invert-then-denoise leaves a small residual.
#[derive(Clone, Copy, Debug)]
pub struct ConstantLinearNoise {
    pub scale: f64,
}

impl NoisePredictor for ConstantLinearNoise {
    fn evaluate(&self, z: &Field, _t: usize) -> Result<Field> {
        Ok(z.map(|v| self.scale * v))
    }
}

/// `ε̂(z, t) = z / (ρ √ᾱ_t + √(1 − ᾱ_t))`.
///
/// This is the exact noise of the one-dimensional family
/// `z_t = (√ᾱ_t + √(1 − ᾱ_t)/ρ) x` with `ε = x/ρ`, so every step sees the same
/// clean latent and DDIM round trips are exact. At `t = 0` it reduces to
/// `z / ρ`; `ρ = 2` gives the linear toy `0.5 · z`.
#[derive(Clone, Debug)]
pub struct StepConsistentLinearNoise {
    pub rho: f64,
    pub schedule: NoiseSchedule,
}

impl NoisePredictor for StepConsistentLinearNoise {
    fn evaluate(&self, z: &Field, t: usize) -> Result<Field> {
        let ab = self.schedule.alpha_bar(t)?;
        let denom = self.rho * ab.sqrt() + (1.0 - ab).sqrt();
        Ok(z.map(|v| v / denom))
    }
}

fn check_rf_times(t: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t.is_finite() && (-TIME_EPS..=1.0 + TIME_EPS).contains(&t)) {
        return Err(Error::InvalidArgument(format!("t = {t} is outside [0, 1]")));
    }
    Ok(())
}

/// One explicit Euler step toward noise: `z + dt · v(z, t)`.
pub fn rf_forward_step(z: &Field, t: f64, dt: f64, v: &dyn VelocityPredictor) -> Result<Field> {
    check_rf_times(t, dt)?;
    if t + dt > 1.0 + TIME_EPS {
        return Err(Error::InvalidArgument(format!("t + dt = {} exceeds 1", t + dt)));
    }
    let vel = v.evaluate(z, t)?;
    let mut out = z.clone();
    out.add_scaled(&vel, dt)?;
    Ok(out)
}

/// One explicit Euler step toward data: `z − dt · v(z, t)`.
pub fn rf_backward_step(z: &Field, t: f64, dt: f64, v: &dyn VelocityPredictor) -> Result<Field> {
    check_rf_times(t, dt)?;
    if t - dt < -TIME_EPS {
        return Err(Error::InvalidArgument(format!("t - dt = {} is below 0", t - dt)));
    }
    let vel = v.evaluate(z, t)?;
    let mut out = z.clone();
    out.add_scaled(&vel, -dt)?;
    Ok(out)
}

/// Deterministic DDIM move from step `from` to step `to` (either direction),
/// predicting noise at `from`.
pub fn ddim_transition(z: &Field, from: usize, to: usize, sched: &NoiseSchedule, eps: &dyn NoisePredictor) -> Result<Field> {
    let ab_from = sched.alpha_bar(from)?;
    let ab_to = sched.alpha_bar(to)?;
    let e = eps.evaluate(z, from)?;
    z.check_shape(&e)?;
    let (sf, nf) = (ab_from.sqrt(), (1.0 - ab_from).sqrt());
    let (st, nt) = (ab_to.sqrt(), (1.0 - ab_to).sqrt());
    z.zip_map(&e, |zv, ev| st * ((zv - nf * ev) / sf) + nt * ev)
}

/// Inversion step `z_{t−1} → z_t`, `1 ≤ t ≤ T`.
pub fn ddim_invert_step(z_prev: &Field, t: usize, sched: &NoiseSchedule, eps: &dyn NoisePredictor) -> Result<Field> {
    if t == 0 || t > sched.len() {
        return Err(Error::TimestepOutOfRange { t, max: sched.len() });
    }
    ddim_transition(z_prev, t - 1, t, sched, eps)
}

/// Denoising step `z_t → z_{t−1}`, `1 ≤ t ≤ T`.
pub fn ddim_denoise_step(z_t: &Field, t: usize, sched: &NoiseSchedule, eps: &dyn NoisePredictor) -> Result<Field> {
    if t == 0 || t > sched.len() {
        return Err(Error::TimestepOutOfRange { t, max: sched.len() });
    }
    ddim_transition(z_t, t, t - 1, sched, eps)
}

#[derive(Clone, Copy)]
pub enum Solver<'a> {
    RectifiedFlow(&'a dyn VelocityPredictor),
    /// Uses `steps` timesteps spread evenly over the schedule.
    Ddim {
        schedule: &'a NoiseSchedule,
        predictor: &'a dyn NoisePredictor,
    },
}

impl Solver<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::RectifiedFlow(_) => "rf",
            Solver::Ddim { .. } => "ddim",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub ssim: f64,
    /// Capped at [`crate::metrics::PSNR_CAP_DB`] for exact recovery.
    pub psnr_db: f64,
    pub mae: f64,
    pub steps: usize,
    pub solver: String,
}

/// Inverts `z0` over the full time range and denoises it back.
pub fn roundtrip(z0: &Field, steps: usize, solver: Solver<'_>) -> Result<Field> {
    if steps == 0 {
        return Err(Error::InvalidArgument("round trip needs at least one step".into()));
    }
    match solver {
        Solver::RectifiedFlow(v) => {
            let dt = 1.0 / steps as f64;
            let mut z = z0.clone();
            for i in 0..steps {
                z = rf_forward_step(&z, i as f64 * dt, dt, v)?;
            }
            for i in (1..=steps).rev() {
                z = rf_backward_step(&z, i as f64 * dt, dt, v)?;
            }
            Ok(z)
        }
        Solver::Ddim { schedule, predictor } => {
            let total = schedule.len();
            if steps > total {
                return Err(Error::InvalidArgument(format!("{steps} steps exceed schedule length {total}")));
            }
            let grid: Vec<usize> = (0..=steps).map(|i| (i * total + steps / 2) / steps).collect();
            let mut z = z0.clone();
            for w in grid.windows(2) {
                z = ddim_transition(&z, w[0], w[1], schedule, predictor)?;
            }
            for w in grid.windows(2).rev() {
                z = ddim_transition(&z, w[1], w[0], schedule, predictor)?;
            }
            Ok(z)
        }
    }
}

pub fn roundtrip_drift(z0: &Field, steps: usize, solver: Solver<'_>) -> Result<DriftReport> {
    let z = roundtrip(z0, steps, solver)?;
    if !z.is_finite() {
        return Err(Error::NonFinite(format!("{} round trip over {steps} steps diverged", solver.name())));
    }
    let mae = z0.zip_map(&z, |a, b| (a - b).abs())?.mean();
    Ok(DriftReport {
        ssim: ssim(z0, &z)?,
        psnr_db: psnr(z0, &z)?,
        mae,
        steps,
        solver: solver.name().into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::PSNR_CAP_DB;
    use crate::synthetic::random_field;

    #[test]
    fn constant_velocity_steps() {
        let z = Field::zeros(1, 3, 3);
        let one = ConstantVelocity::Uniform(1.0);
        let f = rf_forward_step(&z, 0.0, 0.1, &one).unwrap();
        assert!(f.data().iter().all(|&v| v == 0.1));
        let b = rf_backward_step(&Field::filled(1, 3, 3, 1.0), 0.5, 0.25, &one).unwrap();
        assert!(b.data().iter().all(|&v| v == 0.75));
        let two = rf_forward_step(&rf_forward_step(&z, 0.0, 0.05, &one).unwrap(), 0.05, 0.05, &one).unwrap();
        assert!(two.max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn straight_path_lands_on_noise() {
        let z0 = random_field(2, 6, 6, 1);
        let eps = random_field(2, 6, 6, 2);
        let v = ConstantVelocity::Field(eps.zip_map(&z0, |e, x| e - x).unwrap());
        let mut z = z0.clone();
        for i in 0..10 {
            z = rf_forward_step(&z, i as f64 * 0.1, 0.1, &v).unwrap();
        }
        assert!(z.max_abs_diff(&eps).unwrap() < 1e-12);
    }

    #[test]
    fn rf_time_checks() {
        let z = Field::zeros(1, 2, 2);
        let v = SinVelocity;
        assert!(rf_forward_step(&z, 0.5, 0.0, &v).is_err());
        assert!(rf_forward_step(&z, 0.5, -0.1, &v).is_err());
        assert!(rf_forward_step(&z, 0.95, 0.1, &v).is_err());
        assert!(rf_backward_step(&z, 0.05, 0.1, &v).is_err());
    }

    #[test]
    fn constant_velocity_roundtrip_is_exact() {
        let z0 = random_field(1, 8, 8, 3);
        let v = ConstantVelocity::Field(random_field(1, 8, 8, 4));
        let r = roundtrip_drift(&z0, 16, Solver::RectifiedFlow(&v)).unwrap();
        assert!(r.mae <= 1e-12);
        let z = roundtrip(&z0, 16, Solver::RectifiedFlow(&v)).unwrap();
        assert!(z.max_abs_diff(&z0).unwrap() <= 1e-12);
    }

    #[test]
    fn sin_field_drift_halves() {
        let z0 = random_field(1, 16, 16, 5);
        let mae = |n| roundtrip_drift(&z0, n, Solver::RectifiedFlow(&SinVelocity)).unwrap().mae;
        let ratio = mae(16) / mae(32);
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
        let series: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| mae(n)).collect();
        for w in series.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{series:?}");
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(NoiseSchedule::new(vec![]).is_err());
        assert!(NoiseSchedule::new(vec![0.1, 0.0]).is_err());
        assert!(NoiseSchedule::new(vec![1.0]).is_err());
        let s = NoiseSchedule::linear(4, 1e-4, 0.02).unwrap();
        assert_eq!(s.alpha_bar(0).unwrap(), 1.0);
        assert!(s.alpha_bar(5).is_err());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<NoiseSchedule>(&json).unwrap(), s);
    }

    #[test]
    fn ddim_zero_noise_rescales() {
        let s = NoiseSchedule::uniform(4, 0.1).unwrap();
        let zero = ConstantLinearNoise { scale: 0.0 };
        let z = random_field(1, 4, 4, 6);
        let inv = ddim_invert_step(&z, 2, &s, &zero).unwrap();
        let expect = (s.alpha_bar(2).unwrap() / s.alpha_bar(1).unwrap()).sqrt();
        assert!(inv.max_abs_diff(&z.map(|v| v * expect)).unwrap() < 1e-15);
        let den = ddim_denoise_step(&z, 2, &s, &zero).unwrap();
        assert!(den.max_abs_diff(&z.map(|v| v / expect)).unwrap() < 1e-15);
        assert!(ddim_invert_step(&z, 0, &s, &zero).is_err());
        assert!(ddim_denoise_step(&z, 5, &s, &zero).is_err());
    }

    #[test]
    fn ddim_first_step_returns_clean_estimate() {
        let s = NoiseSchedule::uniform(4, 0.1).unwrap();
        let p = ConstantLinearNoise { scale: 0.5 };
        let z = random_field(1, 4, 4, 7);
        let ab = s.alpha_bar(1).unwrap();
        let x0 = z.map(|v| (v - (1.0 - ab).sqrt() * 0.5 * v) / ab.sqrt());
        let got = ddim_denoise_step(&z, 1, &s, &p).unwrap();
        assert!(got.max_abs_diff(&x0).unwrap() < 1e-14);
    }

    #[test]
    fn step_consistent_linear_roundtrip() {
        let s = NoiseSchedule::uniform(4, 0.02).unwrap();
        let p = StepConsistentLinearNoise { rho: 2.0, schedule: s.clone() };
        let z0 = random_field(3, 8, 8, 8);
        let e0 = p.evaluate(&z0, 0).unwrap();
        assert!(e0.max_abs_diff(&z0.map(|v| 0.5 * v)).unwrap() < 1e-15);
        let mut z = z0.clone();
        for t in 1..=4 {
            z = ddim_invert_step(&z, t, &s, &p).unwrap();
        }
        for t in (1..=4).rev() {
            z = ddim_denoise_step(&z, t, &s, &p).unwrap();
        }
        assert!(z.max_abs_diff(&z0).unwrap() <= 1e-6);
        let r = roundtrip_drift(&z0, 4, Solver::Ddim { schedule: &s, predictor: &p }).unwrap();
        assert_eq!(r.solver, "ddim");
        assert!(r.psnr_db > 100.0);
    }

    /// The time-invariant `0.5 · z` predictor is not step-consistent, so its
    /// round trip drifts by far more than the consistent predictor's.
    #[test]
    fn constant_linear_predictor_drifts() {
        let s = NoiseSchedule::uniform(4, 0.02).unwrap();
        let p = ConstantLinearNoise { scale: 0.5 };
        let z0 = random_field(1, 8, 8, 9);
        let z = roundtrip(&z0, 4, Solver::Ddim { schedule: &s, predictor: &p }).unwrap();
        assert!(z.max_abs_diff(&z0).unwrap() > 1e-4);
    }

    #[test]
    fn drift_report_json_and_sentinel() {
        let z0 = random_field(1, 8, 8, 10);
        let r = roundtrip_drift(&z0, 4, Solver::RectifiedFlow(&ConstantVelocity::Uniform(1.0))).unwrap();
        assert_eq!(r.psnr_db, PSNR_CAP_DB);
        assert_eq!(r.ssim, 1.0);
        assert_eq!(r.mae, 0.0);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["ssim", "psnr_db", "mae", "steps", "solver"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
