//! Planar geometry on the latent/image grid.
//!
//! Coordinates follow the image convention: `x` grows rightward, `y` grows
//! downward, and cell `(x, y)` has its center at `(x, y)`. Rotation matrices
//! are the standard math-convention matrices applied in these coordinates, so
//! a positive angle appears clockwise on screen.

mod affine;
mod mask;
mod raster;
mod rect;
mod warp;

use serde::{Deserialize, Serialize};

pub use affine::AffineTransform;
pub use mask::Mask2D;
pub use raster::{fill_convex_poly, is_convex, FILL_EPS};
pub use rect::{box_points, convex_hull, min_area_rect, RotatedRect};
pub use warp::{bilinear_sample, warp_field, warp_mask};

use crate::error::{Error, Result};

/// A point in pixel coordinates. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    /// Nearest grid cell, as signed integers.
    pub fn round_cell(self) -> (i64, i64) {
        (self.x.round() as i64, self.y.round() as i64)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::fmt::Display for Point2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Arithmetic mean of the set-cell centers.
pub fn centroid(mask: &Mask2D) -> Result<Point2> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in mask.iter_set() {
        sx += x as f64;
        sy += y as f64;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(Point2::new(sx / n as f64, sy / n as f64))
}

/// `|a ∩ b| / |a ∪ b|`, with two empty masks scoring 1.
pub fn mask_iou(a: &Mask2D, b: &Mask2D) -> Result<f64> {
    a.check_dims(b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.bits().iter().zip(b.bits()) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_examples() {
        let mut m = Mask2D::new(10, 10);
        m.set(7, 3, true);
        assert_eq!(centroid(&m).unwrap(), Point2::new(7.0, 3.0));

        let block = Mask2D::rect(4, 4, 0, 0, 1, 1);
        assert_eq!(centroid(&block).unwrap(), Point2::new(0.5, 0.5));

        let l = Mask2D::from_rows(&["11", "10"]).unwrap();
        let c = centroid(&l).unwrap();
        assert!((c.x - 1.0 / 3.0).abs() < 1e-15 && (c.y - 1.0 / 3.0).abs() < 1e-15);

        assert!(matches!(centroid(&Mask2D::new(3, 3)), Err(Error::EmptyRegion)));
    }

    #[test]
    fn iou_examples() {
        let a = Mask2D::rect(8, 8, 1, 1, 2, 2);
        let b = Mask2D::rect(8, 8, 2, 1, 3, 2);
        let far = Mask2D::rect(8, 8, 5, 5, 6, 6);
        assert_eq!(mask_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(mask_iou(&a, &far).unwrap(), 0.0);
        assert!((mask_iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mask_iou(&Mask2D::new(2, 2), &Mask2D::new(2, 2)).unwrap(), 1.0);
        assert!(mask_iou(&a, &Mask2D::new(4, 4)).is_err());
    }

    #[test]
    fn point_serializes_as_pair() {
        let p = Point2::new(3.0, -1.5);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[3.0,-1.5]");
        let q: Point2 = serde_json::from_str("[4, 5]").unwrap();
        assert_eq!(q, Point2::new(4.0, 5.0));
    }
}
