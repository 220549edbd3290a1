use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FeatureExtractor;
use crate::error::{Error, Result};
use crate::field::Field;

/// Denominator floor for relative errors, so coordinates where both the
/// analytic and numeric gradients vanish do not divide noise by noise.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Flat index of the worst coordinate.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub coords_checked: usize,
}

/// Up to `n` distinct flat indices in `0..len`, drawn deterministically.
pub fn sample_coordinates(len: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, len, n.min(len)).into_vec();
    idx.sort_unstable();
    idx
}

/// Central finite differences of `loss` at `z` on the listed coordinates,
/// compared against the analytic gradient that `loss` itself returns.
pub fn fd_check(
    loss: impl Fn(&Field) -> Result<(f64, Field)>,
    z: &Field,
    delta: f64,
    coords: &[usize],
) -> Result<GradCheck> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference delta must be positive, got {delta}")));
    }
    let (_, grad) = loss(z)?;
    z.check_shape(&grad)?;
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst_index: coords.first().copied().unwrap_or(0),
        analytic: 0.0,
        numeric: 0.0,
        coords_checked: coords.len(),
    };
    let mut probe = z.clone();
    for &i in coords {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + delta;
        let (up, _) = loss(&probe)?;
        probe.data_mut()[i] = orig - delta;
        let (down, _) = loss(&probe)?;
        probe.data_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * delta);
        let analytic = grad.data()[i];
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.analytic = analytic;
            report.numeric = numeric;
        }
    }
    Ok(report)
}

/// Checks `z ↦ loss_fn(F(z))` where `loss_fn` maps features to a loss and
/// its feature-space gradient; the latent gradient goes through the adjoint.
pub fn fd_gradient_check(
    extractor: &dyn FeatureExtractor,
    loss_fn: impl Fn(&Field) -> Result<(f64, Field)>,
    z: &Field,
    delta: f64,
    n_coords: usize,
    seed: u64,
) -> Result<GradCheck> {
    let coords = sample_coordinates(z.len(), n_coords, seed);
    fd_check(
        |zz| {
            let f = extractor.extract(zz)?;
            let (l, g) = loss_fn(&f)?;
            Ok((l, extractor.adjoint(&g, zz)?))
        },
        z,
        delta,
        &coords,
    )
}
