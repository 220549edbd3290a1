use crate::error::{Error, Result};
use crate::field::Field;

/// PSNR reported for exact (or numerically exact) recovery instead of ∞.
pub const PSNR_CAP_DB: f64 = 200.0;

/// Default SSIM window side.
pub const SSIM_WINDOW: usize = 7;

/// Joint dynamic range of two fields, falling back to 1 for constant inputs.
fn data_range(a: &Field, b: &Field) -> f64 {
    let (lo_a, hi_a) = a.min_max();
    let (lo_b, hi_b) = b.min_max();
    let r = hi_a.max(hi_b) - lo_a.min(lo_b);
    if r > 0.0 && r.is_finite() {
        r
    } else {
        1.0
    }
}

/// Mean SSIM with a uniform `window × window` filter over every fully
/// contained window, averaged over channels. Constants are the usual
/// `(0.01 L)²` and `(0.03 L)²` with `L` the joint range of both inputs,
/// which keeps the score symmetric.
pub fn ssim_windowed(a: &Field, b: &Field, window: usize) -> Result<f64> {
    a.check_shape(b)?;
    if window == 0 {
        return Err(Error::InvalidArgument("SSIM window must be at least 1".into()));
    }
    let (c, h, w) = a.shape();
    let mut win = window.min(h).min(w);
    if win % 2 == 0 {
        win -= 1;
    }
    let l = data_range(a, b);
    let c1 = (0.01 * l).powi(2);
    let c2 = (0.03 * l).powi(2);
    let n = (win * win) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for ch in 0..c {
        let (pa, pb) = (a.channel(ch), b.channel(ch));
        for y0 in 0..=h - win {
            for x0 in 0..=w - win {
                let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for y in y0..y0 + win {
                    for x in x0..x0 + win {
                        let (va, vb) = (pa[y * w + x], pb[y * w + x]);
                        sa += va;
                        sb += vb;
                        saa += va * va;
                        sbb += vb * vb;
                        sab += va * vb;
                    }
                }
                let (ma, mb) = (sa / n, sb / n);
                let va = saa / n - ma * ma;
                let vb = sbb / n - mb * mb;
                let cov = sab / n - ma * mb;
                let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
                let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
                total += num / den;
                count += 1;
            }
        }
    }
    Ok(total / count as f64)
}

pub fn ssim(a: &Field, b: &Field) -> Result<f64> {
    ssim_windowed(a, b, SSIM_WINDOW)
}

/// PSNR in dB with the peak taken as the reference's dynamic range,
/// capped at [`PSNR_CAP_DB`].
pub fn psnr(reference: &Field, test: &Field) -> Result<f64> {
    reference.check_shape(test)?;
    let mse = reference.zip_map(test, |a, b| (a - b) * (a - b))?.mean();
    let (lo, hi) = reference.min_max();
    let peak = if hi > lo { hi - lo } else { 1.0 };
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::random_field;

    #[test]
    fn identical_inputs() {
        let a = random_field(2, 12, 12, 1);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP_DB);
        let z = Field::zeros(1, 9, 9);
        assert_eq!(ssim(&z, &z).unwrap(), 1.0);
    }

    #[test]
    fn ssim_is_symmetric_and_drops_with_noise() {
        let a = random_field(1, 16, 16, 2);
        let b = random_field(1, 16, 16, 3);
        let s = ssim(&a, &b).unwrap();
        assert_eq!(s, ssim(&b, &a).unwrap());
        assert!(s < 0.2);
    }

    #[test]
    fn psnr_known_value() {
        // range 1, uniform error 0.1 → 20 dB
        let a = Field::from_fn(1, 2, 2, |_, y, x| ((y * 2 + x) as f64) / 3.0);
        let b = a.map(|v| v + 0.1);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }
}
