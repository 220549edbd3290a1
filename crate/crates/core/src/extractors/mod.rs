//! Differentiable feature extractors `F(z)` with exact adjoints.
//!
//! The provided extractors are linear and span a granularity axis: the
//! identity keeps per-cell features, a Gaussian blur mixes a neighbourhood,
//! and pooled blur compresses the grid by a stride before blurring so each
//! feature cell summarizes a large receptive field.

mod gradcheck;

use serde::{Deserialize, Serialize};

pub use gradcheck::{fd_check, fd_gradient_check, sample_coordinates, GradCheck, REL_ERROR_FLOOR};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{AffineTransform, Mask2D, Point2};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorDescriptor {
    pub name: String,
    /// Radius, in latent cells, of the input neighbourhood one feature cell reads.
    pub receptive_field_radius: usize,
    /// Latent cells per feature cell along each axis.
    pub stride: usize,
}

/// A feature map `F` with its adjoint.
///
/// `adjoint(g, z)` must return the gradient of `⟨g, F(z)⟩` with respect to
/// `z`, i.e. the transpose of the linearization of `F` at `z`.
pub trait FeatureExtractor: Send + Sync {
    fn descriptor(&self) -> ExtractorDescriptor;

    fn extract(&self, z: &Field) -> Result<Field>;

    fn adjoint(&self, g: &Field, z: &Field) -> Result<Field>;

    fn stride(&self) -> usize {
        self.descriptor().stride
    }

    /// Latent-grid mask moved onto the feature grid by max pooling.
    fn feature_mask(&self, mask: &Mask2D) -> Result<Mask2D> {
        mask.max_pool(self.stride())
    }

    /// Latent-grid transform expressed on the feature grid.
    fn feature_transform(&self, t: &AffineTransform) -> AffineTransform {
        t.conjugate_to_grid(self.stride())
    }

    /// Latent point expressed in feature-grid coordinates.
    fn feature_point(&self, p: Point2) -> Point2 {
        let s = self.stride() as f64;
        let off = (s - 1.0) / 2.0;
        Point2::new((p.x - off) / s, (p.y - off) / s)
    }

    /// Feature-grid point expressed in latent coordinates.
    fn latent_point(&self, p: Point2) -> Point2 {
        let s = self.stride() as f64;
        let off = (s - 1.0) / 2.0;
        Point2::new(p.x * s + off, p.y * s + off)
    }
}

/// Serializable extractor choice, as read from run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractorSpec {
    Identity,
    GaussianBlur { sigma: f64 },
    PooledBlur { stride: usize, sigma: f64 },
}

impl Default for ExtractorSpec {
    fn default() -> Self {
        ExtractorSpec::Identity
    }
}

impl ExtractorSpec {
    pub fn build(&self) -> Result<Box<dyn FeatureExtractor>> {
        Ok(match *self {
            ExtractorSpec::Identity => Box::new(Identity),
            ExtractorSpec::GaussianBlur { sigma } => Box::new(GaussianBlur::new(sigma)?),
            ExtractorSpec::PooledBlur { stride, sigma } => Box::new(PooledBlur::new(stride, sigma)?),
        })
    }
}

/// Per-cell features: `F(z) = z`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl FeatureExtractor for Identity {
    fn descriptor(&self) -> ExtractorDescriptor {
        ExtractorDescriptor {
            name: "identity".into(),
            receptive_field_radius: 0,
            stride: 1,
        }
    }

    fn extract(&self, z: &Field) -> Result<Field> {
        Ok(z.clone())
    }

    fn adjoint(&self, g: &Field, z: &Field) -> Result<Field> {
        z.check_shape(g)?;
        Ok(g.clone())
    }
}

/// Separable Gaussian blur truncated at `ceil(3σ)`.
///
/// Borders use half-sample symmetric reflection (`-1 → 0`, `-2 → 1`). With a
/// symmetric kernel that makes each 1-D pass a symmetric doubly stochastic
/// matrix, so constants and the field mean are both preserved.
#[derive(Clone, Debug)]
pub struct GaussianBlur {
    sigma: f64,
    radius: usize,
    kernel: Vec<f64>,
}

/// Half-sample symmetric index into `0..n`, periodic with period `2n`.
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

impl GaussianBlur {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("blur sigma must be positive, got {sigma}")));
        }
        let radius = (3.0 * sigma).ceil() as usize;
        let mut kernel: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= total);
        Ok(GaussianBlur {
            sigma,
            radius,
            kernel,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn forward(&self, z: &Field) -> Field {
        let (c, h, w) = z.shape();
        let r = self.radius as i64;
        let mut tmp = Field::zeros(c, h, w);
        for ch in 0..c {
            let src = z.channel(ch);
            let dst = tmp.channel_mut(ch);
            for y in 0..h {
                let row = &src[y * w..(y + 1) * w];
                for x in 0..w {
                    let mut acc = 0.0;
                    for (k, wk) in self.kernel.iter().enumerate() {
                        let xi = reflect(x as i64 + k as i64 - r, w);
                        acc += wk * row[xi];
                    }
                    dst[y * w + x] = acc;
                }
            }
        }
        let mut out = Field::zeros(c, h, w);
        for ch in 0..c {
            let src = tmp.channel(ch);
            let dst = out.channel_mut(ch);
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for (k, wk) in self.kernel.iter().enumerate() {
                        let yi = reflect(y as i64 + k as i64 - r, h);
                        acc += wk * src[yi * w + x];
                    }
                    dst[y * w + x] = acc;
                }
            }
        }
        out
    }

    fn transpose(&self, g: &Field) -> Field {
        let (c, h, w) = g.shape();
        let r = self.radius as i64;
        let mut tmp = Field::zeros(c, h, w);
        for ch in 0..c {
            let src = g.channel(ch);
            let dst = tmp.channel_mut(ch);
            for y in 0..h {
                for x in 0..w {
                    let gv = src[y * w + x];
                    if gv == 0.0 {
                        continue;
                    }
                    for (k, wk) in self.kernel.iter().enumerate() {
                        let yi = reflect(y as i64 + k as i64 - r, h);
                        dst[yi * w + x] += wk * gv;
                    }
                }
            }
        }
        let mut out = Field::zeros(c, h, w);
        for ch in 0..c {
            let src = tmp.channel(ch);
            let dst = out.channel_mut(ch);
            for y in 0..h {
                for x in 0..w {
                    let gv = src[y * w + x];
                    if gv == 0.0 {
                        continue;
                    }
                    for (k, wk) in self.kernel.iter().enumerate() {
                        let xi = reflect(x as i64 + k as i64 - r, w);
                        dst[y * w + xi] += wk * gv;
                    }
                }
            }
        }
        out
    }
}

impl FeatureExtractor for GaussianBlur {
    fn descriptor(&self) -> ExtractorDescriptor {
        ExtractorDescriptor {
            name: format!("gaussian_blur(sigma={})", self.sigma),
            receptive_field_radius: self.radius,
            stride: 1,
        }
    }

    fn extract(&self, z: &Field) -> Result<Field> {
        Ok(self.forward(z))
    }

    fn adjoint(&self, g: &Field, z: &Field) -> Result<Field> {
        z.check_shape(g)?;
        Ok(self.transpose(g))
    }
}

/// Average pooling by `stride` followed by a Gaussian blur on the pooled grid.
/// Cells past the last whole block are ignored.
#[derive(Clone, Debug)]
pub struct PooledBlur {
    stride: usize,
    blur: GaussianBlur,
}

impl PooledBlur {
    pub fn new(stride: usize, sigma: f64) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidArgument("pool stride must be at least 1".into()));
        }
        Ok(PooledBlur {
            stride,
            blur: GaussianBlur::new(sigma)?,
        })
    }

    fn pooled_shape(&self, z: &Field) -> Result<(usize, usize, usize)> {
        let (c, h, w) = z.shape();
        if w < self.stride || h < self.stride {
            return Err(Error::InvalidArgument(format!(
                "{w}x{h} grid is smaller than pool stride {}",
                self.stride
            )));
        }
        Ok((c, h / self.stride, w / self.stride))
    }

    fn pool(&self, z: &Field) -> Result<Field> {
        let (c, ph, pw) = self.pooled_shape(z)?;
        let s = self.stride;
        let inv = 1.0 / (s * s) as f64;
        Ok(Field::from_fn(c, ph, pw, |ch, py, px| {
            let mut acc = 0.0;
            for dy in 0..s {
                for dx in 0..s {
                    acc += z.get(ch, py * s + dy, px * s + dx);
                }
            }
            acc * inv
        }))
    }
}

impl FeatureExtractor for PooledBlur {
    fn descriptor(&self) -> ExtractorDescriptor {
        ExtractorDescriptor {
            name: format!("pooled_blur(stride={}, sigma={})", self.stride, self.blur.sigma),
            receptive_field_radius: self.stride * self.blur.radius + self.stride / 2,
            stride: self.stride,
        }
    }

    fn extract(&self, z: &Field) -> Result<Field> {
        Ok(self.blur.forward(&self.pool(z)?))
    }

    fn adjoint(&self, g: &Field, z: &Field) -> Result<Field> {
        let (c, ph, pw) = self.pooled_shape(z)?;
        if g.shape() != (c, ph, pw) {
            return Err(Error::dims(format!("{c}x{ph}x{pw}"), g.shape_string()));
        }
        let gp = self.blur.transpose(g);
        let s = self.stride;
        let inv = 1.0 / (s * s) as f64;
        let (_, h, w) = z.shape();
        let mut out = Field::zeros(c, h, w);
        for ch in 0..c {
            for py in 0..ph {
                for px in 0..pw {
                    let v = gp.get(ch, py, px) * inv;
                    for dy in 0..s {
                        for dx in 0..s {
                            out.set(ch, py * s + dy, px * s + dx, v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::random_field;

    fn extractors() -> Vec<Box<dyn FeatureExtractor>> {
        vec![
            Box::new(Identity),
            Box::new(GaussianBlur::new(1.3).unwrap()),
            Box::new(PooledBlur::new(2, 1.0).unwrap()),
            Box::new(PooledBlur::new(4, 0.8).unwrap()),
        ]
    }

    #[test]
    fn identity_returns_input() {
        let z = random_field(2, 5, 7, 3);
        assert_eq!(Identity.extract(&z).unwrap(), z);
        assert_eq!(Identity.adjoint(&z, &z).unwrap(), z);
    }

    #[test]
    fn blur_preserves_constants() {
        let z = Field::filled(2, 9, 13, 0.37);
        let out = GaussianBlur::new(1.7).unwrap().extract(&z).unwrap();
        assert!(out.max_abs_diff(&z).unwrap() < 1e-15);
    }

    #[test]
    fn pooling_preserves_mean() {
        let z = random_field(1, 16, 16, 11);
        let out = PooledBlur::new(2, 1.0).unwrap().extract(&z).unwrap();
        assert_eq!(out.shape(), (1, 8, 8));
        assert!((out.mean() - z.mean()).abs() < 1e-9);
    }

    #[test]
    fn stride_larger_than_grid_is_rejected() {
        let z = Field::zeros(1, 4, 4);
        assert!(PooledBlur::new(8, 1.0).unwrap().extract(&z).is_err());
    }

    #[test]
    fn transpose_identity_holds() {
        for (i, e) in extractors().iter().enumerate() {
            for trial in 0..100u64 {
                let z = random_field(2, 16, 12, 1000 * i as u64 + trial);
                let fz = e.extract(&z).unwrap();
                let (c, h, w) = fz.shape();
                let g = random_field(c, h, w, 7 + 1000 * i as u64 + trial);
                let lhs = g.dot(&fz).unwrap();
                let rhs = e.adjoint(&g, &z).unwrap().dot(&z).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "{}: {lhs} vs {rhs}", e.descriptor().name);
            }
        }
    }

    #[test]
    fn extractors_are_linear() {
        for e in extractors() {
            let z = random_field(1, 16, 16, 5);
            let v = random_field(1, 16, 16, 6);
            let (a, b) = (0.7, -1.9);
            let mut mix = z.clone();
            mix.scale(a);
            mix.add_scaled(&v, b).unwrap();
            let mut expect = e.extract(&z).unwrap();
            expect.scale(a);
            expect.add_scaled(&e.extract(&v).unwrap(), b).unwrap();
            let got = e.extract(&mix).unwrap();
            assert!(got.max_abs_diff(&expect).unwrap() < 1e-10);
        }
    }

    /// The receptive field of the centre feature cell, read off the adjoint of
    /// a feature-space impulse, matches the declared radius within one cell.
    #[test]
    fn descriptor_radius_is_honest() {
        for e in extractors() {
            let z = Field::zeros(1, 48, 48);
            let fz = e.extract(&z).unwrap();
            let (_, h, w) = fz.shape();
            let (cy, cx) = (h / 2, w / 2);
            let mut impulse = Field::zeros(1, h, w);
            impulse.set(0, cy, cx, 1.0);
            let support = e.adjoint(&impulse, &z).unwrap();
            let center = e.latent_point(Point2::new(cx as f64, cy as f64));
            let mut radius: f64 = 0.0;
            for y in 0..48 {
                for x in 0..48 {
                    if support.get(0, y, x) != 0.0 {
                        radius = radius.max((x as f64 - center.x).abs()).max((y as f64 - center.y).abs());
                    }
                }
            }
            let declared = e.descriptor().receptive_field_radius as f64;
            assert!((radius - declared).abs() <= 1.0, "{}: {radius} vs {declared}", e.descriptor().name);
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = ExtractorSpec::PooledBlur { stride: 8, sigma: 1.0 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"pooled_blur","stride":8,"sigma":1.0}"#);
        assert_eq!(serde_json::from_str::<ExtractorSpec>(&json).unwrap(), spec);
        assert_eq!(spec.build().unwrap().stride(), 8);
    }
}
