use serde::{Deserialize, Serialize};

use super::Point2;
use crate::error::{Error, Result};

const SINGULAR_DET: f64 = 1e-9;

/// 3×3 homogeneous affine transform with last row `(0, 0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct AffineTransform {
    m: [[f64; 3]; 3],
}

impl TryFrom<[[f64; 3]; 3]> for AffineTransform {
    type Error = Error;

    fn try_from(m: [[f64; 3]; 3]) -> Result<Self> {
        if m[2] != [0.0, 0.0, 1.0] {
            return Err(Error::InvalidArgument(format!(
                "affine last row must be (0, 0, 1), got {:?}",
                m[2]
            )));
        }
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine matrix".into()));
        }
        Ok(AffineTransform { m })
    }
}

impl From<AffineTransform> for [[f64; 3]; 3] {
    fn from(t: AffineTransform) -> Self {
        t.m
    }
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl AffineTransform {
    pub const fn identity() -> Self {
        AffineTransform {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// `[[a, b, tx], [c, d, ty], [0, 0, 1]]`.
    pub fn from_parts(a: f64, b: f64, c: f64, d: f64, tx: f64, ty: f64) -> Self {
        AffineTransform {
            m: [[a, b, tx], [c, d, ty], [0.0, 0.0, 1.0]],
        }
    }

    /// Displacement in the third column: `(u, v) ↦ (u + d.x, v + d.y)`.
    pub fn translation(d: Point2) -> Self {
        Self::from_parts(1.0, 0.0, 0.0, 1.0, d.x, d.y)
    }

    /// Rotation by `angle` radians about the origin, `[[cos, -sin], [sin, cos]]`.
    pub fn rotation_about_origin(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(c, -s, s, c, 0.0, 0.0)
    }

    /// `translate(anchor) · rotate(angle) · translate(-anchor)`; `anchor` is fixed.
    pub fn rotation(angle: f64, anchor: Point2) -> Self {
        Self::translation(anchor)
            .matmul(&Self::rotation_about_origin(angle))
            .matmul(&Self::translation(Point2::new(-anchor.x, -anchor.y)))
    }

    /// Isotropic scaling `(u, v) ↦ (s·u + offset, s·v + offset)`.
    pub fn scale_offset(s: f64, offset: f64) -> Self {
        Self::from_parts(s, 0.0, 0.0, s, offset, offset)
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn matmul(&self, rhs: &AffineTransform) -> AffineTransform {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        m[2] = [0.0, 0.0, 1.0];
        AffineTransform { m }
    }

    /// Determinant of the linear 2×2 block.
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<AffineTransform> {
        let det = self.det();
        if det.abs() < SINGULAR_DET || !det.is_finite() {
            return Err(Error::SingularTransform { det });
        }
        let [[a, b, tx], [c, d, ty], _] = self.m;
        let inv = 1.0 / det;
        let (ia, ib, ic, id) = (d * inv, -b * inv, -c * inv, a * inv);
        Ok(Self::from_parts(
            ia,
            ib,
            ic,
            id,
            -(ia * tx + ib * ty),
            -(ic * tx + id * ty),
        ))
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        let m = &self.m;
        Point2::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Expresses this transform in a grid whose cell `f` sits at `s·f + offset`
    /// in the current grid (used to move latent-grid motions onto a pooled
    /// feature grid).
    pub fn conjugate_to_grid(&self, stride: usize) -> AffineTransform {
        if stride == 1 {
            return *self;
        }
        let s = stride as f64;
        let offset = (s - 1.0) / 2.0;
        let to_fine = Self::scale_offset(s, offset);
        let to_coarse = Self::scale_offset(1.0 / s, -offset / s);
        to_coarse.matmul(self).matmul(&to_fine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn close(a: Point2, b: Point2, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
    }

    #[test]
    fn translation_examples() {
        let t = AffineTransform::translation(Point2::new(2.0, -1.0));
        assert_eq!(t.apply(Point2::new(3.0, 4.0)), Point2::new(5.0, 3.0));
        let id = AffineTransform::translation(Point2::new(0.0, 0.0));
        assert_eq!(id.apply(Point2::new(-7.25, 9.5)), Point2::new(-7.25, 9.5));
        let t = AffineTransform::translation(Point2::new(10.0, 0.0));
        assert_eq!(t.matrix()[0][2], 10.0);
        assert_eq!(t.apply(Point2::new(10.0, 10.0)), Point2::new(20.0, 10.0));
    }

    #[test]
    fn rotation_examples() {
        let r = AffineTransform::rotation(FRAC_PI_2, Point2::new(0.0, 0.0));
        assert!(close(r.apply(Point2::new(1.0, 0.0)), Point2::new(0.0, 1.0), 1e-15));

        let anchor = Point2::new(2.0, 2.0);
        for angle in [0.3, -1.1, 2.5] {
            let r = AffineTransform::rotation(angle, anchor);
            assert!(close(r.apply(anchor), anchor, 1e-14));
        }

        // hand-multiplied T(2,2)·R(π/3)·T(-2,-2) applied to (3,2):
        // (3,2) - (2,2) = (1,0); R(π/3)(1,0) = (1/2, √3/2); + (2,2)
        let r = AffineTransform::rotation(FRAC_PI_3, anchor);
        let expected = Point2::new(2.5, 2.0 + 3f64.sqrt() / 2.0);
        assert!(close(r.apply(Point2::new(3.0, 2.0)), expected, 1e-14));
    }

    #[test]
    fn inverse_and_singularity() {
        let t = AffineTransform::rotation(0.7, Point2::new(3.0, -2.0))
            .matmul(&AffineTransform::translation(Point2::new(1.5, 4.0)));
        let p = Point2::new(-2.0, 5.5);
        let back = t.inverse().unwrap().apply(t.apply(p));
        assert!(close(back, p, 1e-12));

        let flat = AffineTransform::from_parts(1.0, 2.0, 2.0, 4.0, 0.0, 0.0);
        assert!(matches!(flat.inverse(), Err(Error::SingularTransform { .. })));
    }

    #[test]
    fn serde_rejects_projective_rows() {
        let bad = "[[1,0,0],[0,1,0],[0.5,0,1]]";
        assert!(serde_json::from_str::<AffineTransform>(bad).is_err());
        let ok: AffineTransform = serde_json::from_str("[[1,0,3],[0,1,4],[0,0,1]]").unwrap();
        assert_eq!(ok.apply(Point2::default()), Point2::new(3.0, 4.0));
    }

    #[test]
    fn grid_conjugation_maps_translations() {
        let t = AffineTransform::translation(Point2::new(8.0, -4.0)).conjugate_to_grid(4);
        let p = t.apply(Point2::new(1.0, 1.0));
        assert!(close(p, Point2::new(3.0, 0.0), 1e-12));
    }
}
