//! Deterministic synthetic latents used by tests, examples and the
//! acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::extractors::{FeatureExtractor, GaussianBlur};
use crate::field::Field;
use crate::geometry::{AffineTransform, Mask2D, Point2};
use crate::schedule::RegionOp;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform samples in [-1, 1).
pub fn random_field(channels: usize, height: usize, width: usize, seed: u64) -> Field {
    let mut r = rng(seed);
    Field::from_fn(channels, height, width, |_, _, _| r.random_range(-1.0..1.0))
}

/// Independent standard normal samples.
pub fn normal_field(channels: usize, height: usize, width: usize, seed: u64) -> Field {
    let mut r = rng(seed);
    Field::from_fn(channels, height, width, |_, _, _| r.sample::<f64, _>(StandardNormal))
}

/// Smooth low-amplitude background: blurred white noise rescaled so its
/// largest magnitude equals `amplitude`.
pub fn texture(channels: usize, height: usize, width: usize, amplitude: f64, seed: u64) -> Result<Field> {
    let noise = normal_field(channels, height, width, seed);
    let mut t = GaussianBlur::new(1.0)?.extract(&noise)?;
    let m = t.max_abs();
    if m > 0.0 {
        t.scale(amplitude / m);
    }
    Ok(t)
}

/// Isotropic Gaussian bump of peak `amplitude`, identical in every channel
/// except for a per-channel gain `1 / (c + 1)`.
pub fn gaussian_blob(channels: usize, height: usize, width: usize, center: Point2, sigma: f64, amplitude: f64) -> Field {
    Field::from_fn(channels, height, width, |c, y, x| {
        let dx = x as f64 - center.x;
        let dy = y as f64 - center.y;
        amplitude / (c as f64 + 1.0) * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    })
}

/// Two offset bumps, so the content has an orientation a rotation can change.
pub fn oriented_blob(
    channels: usize,
    height: usize,
    width: usize,
    center: Point2,
    sigma: f64,
    amplitude: f64,
    axis: Point2,
) -> Field {
    let mut main = gaussian_blob(channels, height, width, center, sigma, amplitude);
    let side = gaussian_blob(channels, height, width, center + axis, sigma * 0.6, amplitude * 0.5);
    main.add_scaled(&side, 1.0).expect("same shape");
    main
}

/// Disc mask helper matching the blob generators' grid.
pub fn disc_mask(width: usize, height: usize, center: Point2, radius: f64) -> Mask2D {
    Mask2D::disc(width, height, center, radius)
}

/// Grid side of the synthetic drag suite.
pub const SUITE_SIZE: usize = 64;
pub const SUITE_CHANNELS: usize = 2;
pub const BLOB_SIGMA: f64 = 2.0;
pub const MASK_RADIUS: f64 = 5.0;
pub const TEXTURE_AMPLITUDE: f64 = 0.05;

/// One synthetic drag problem: a Gaussian blob on a faint texture.
#[derive(Clone, Debug)]
pub struct DragCase {
    pub name: String,
    pub z0: Field,
    /// The texture alone, so content can be isolated as `z − background`.
    pub background: Field,
    pub op: RegionOp,
}

fn blob_case(name: String, center: Point2, seed: u64, make_op: impl FnOnce(Mask2D) -> Result<RegionOp>) -> Result<DragCase> {
    let (n, c) = (SUITE_SIZE, SUITE_CHANNELS);
    let background = texture(c, n, n, TEXTURE_AMPLITUDE, seed)?;
    let mut z0 = background.clone();
    z0.add_scaled(&gaussian_blob(c, n, n, center, BLOB_SIGMA, 1.0), 1.0)?;
    Ok(DragCase {
        name,
        z0,
        background,
        op: make_op(disc_mask(n, n, center, MASK_RADIUS))?,
    })
}

/// The ten-case suite: six relocations of 8 to 16 cells and four rotations
/// of 30° to 90° about the grid centre, blob centroids 14 cells out.
pub fn drag_suite() -> Result<Vec<DragCase>> {
    drag_suite_on_lattice(1)
}

/// Nearest centre of a `stride × stride` pooling block.
pub fn snap_to_lattice(p: Point2, stride: usize) -> Point2 {
    let s = stride as f64;
    let off = (s - 1.0) / 2.0;
    Point2::new(((p.x - off) / s).round() * s + off, ((p.y - off) / s).round() * s + off)
}

/// [`drag_suite`] with blob centres and the rotation anchor moved to pooling
/// block centres and displacements rounded to whole blocks, so a pooled
/// extractor sees each drag as a whole-cell move. Stride 1 is the plain suite.
pub fn drag_suite_on_lattice(stride: usize) -> Result<Vec<DragCase>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    let s = stride as f64;
    let snap_d = |d: f64| (d / s).round() * s;
    let relocations = [
        ((20.0, 32.0), (12.0, 0.0)),
        ((20.0, 20.0), (8.0, 8.0)),
        ((42.0, 40.0), (-14.0, 0.0)),
        ((32.0, 18.0), (0.0, 16.0)),
        ((44.0, 24.0), (-10.0, 6.0)),
        ((24.0, 44.0), (9.0, -9.0)),
    ];
    let rotations = [((46.0, 32.0), 30.0), ((32.0, 18.0), -45.0), ((18.0, 32.0), 60.0), ((32.0, 46.0), -90.0)];
    let anchor = snap_to_lattice(Point2::new(32.0, 32.0), stride);
    let mut cases = Vec::new();
    for (i, ((bx, by), (dx, dy))) in relocations.into_iter().enumerate() {
        let b = snap_to_lattice(Point2::new(bx, by), stride);
        let t = b + Point2::new(snap_d(dx), snap_d(dy));
        cases.push(blob_case(format!("relocate-{i}"), b, 100 + i as u64, |m| RegionOp::relocation(m, t))?);
    }
    for (i, ((bx, by), deg)) in rotations.into_iter().enumerate() {
        let b = snap_to_lattice(Point2::new(bx, by), stride);
        let t = AffineTransform::rotation(f64::to_radians(deg), anchor).apply(b);
        cases.push(blob_case(format!("rotate-{i}"), b, 200 + i as u64, |m| RegionOp::rotation(m, t, anchor))?);
    }
    Ok(cases)
}

/// Centroid of the dragged content in channel 0: cells of `z − background`
/// at or above half the peak, weighted by value.
pub fn content_centroid(z: &Field, background: &Field) -> Result<Point2> {
    let diff = z.zip_map(background, |a, b| a - b)?;
    let (_, h, w) = diff.shape();
    let plane = diff.channel(0);
    let peak = plane.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::EmptyRegion);
    }
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let v = plane[y * w + x];
            if v >= 0.5 * peak {
                sx += v * x as f64;
                sy += v * y as f64;
                sw += v;
            }
        }
    }
    Ok(Point2::new(sx / sw, sy / sw))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_field(2, 8, 8, 4), random_field(2, 8, 8, 4));
        assert_ne!(random_field(2, 8, 8, 4), random_field(2, 8, 8, 5));
        let t = texture(1, 16, 16, 0.1, 3).unwrap();
        assert!((t.max_abs() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn blob_peaks_at_center() {
        let b = gaussian_blob(1, 32, 32, Point2::new(10.0, 20.0), 2.0, 1.0);
        assert_eq!(b.get(0, 20, 10), 1.0);
        assert!(b.get(0, 20, 14) < 0.2);
    }
}
