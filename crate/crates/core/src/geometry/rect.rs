use serde::{Deserialize, Serialize};

use super::Point2;

/// Rotated rectangle: `width` runs along `(cos φ, sin φ)` and `height` along
/// `(-sin φ, cos φ)` with `φ = angle_deg` in `[0, 90)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect {
    pub center: Point2,
    pub width: f64,
    pub height: f64,
    pub angle_deg: f64,
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Unit vectors along the width and height sides.
    pub fn axes(&self) -> (Point2, Point2) {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        (Point2::new(c, s), Point2::new(-s, c))
    }
}

/// Convex hull by monotone chain, counter-clockwise in math orientation,
/// collinear points dropped. Returns a single point or a two-point segment for
/// degenerate inputs, and an empty vector for no points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    lower
}

/// Normalizes a direction angle (degrees) into `[0, 90)`.
fn quarter_angle(deg: f64) -> f64 {
    let a = deg.rem_euclid(90.0);
    if a >= 90.0 - 1e-9 {
        0.0
    } else {
        a
    }
}

fn bounding_in_frame(hull: &[Point2], angle_deg: f64) -> RotatedRect {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let (u, v) = (Point2::new(c, s), Point2::new(-s, c));
    let (mut umin, mut umax, mut vmin, mut vmax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &p in hull {
        let (pu, pv) = (p.dot(u), p.dot(v));
        umin = umin.min(pu);
        umax = umax.max(pu);
        vmin = vmin.min(pv);
        vmax = vmax.max(pv);
    }
    let (cu, cv) = ((umin + umax) / 2.0, (vmin + vmax) / 2.0);
    RotatedRect {
        center: u.scale(cu) + v.scale(cv),
        width: umax - umin,
        height: vmax - vmin,
        angle_deg,
    }
}

/// Minimum-area enclosing rectangle by rotating calipers over the hull edges.
///
/// Degenerate inputs give zero-width or zero-height rectangles. Among
/// rectangles whose areas agree to a relative 1e-9, the smallest angle wins.
///
/// # Panics
/// When `points` is empty.
pub fn min_area_rect(points: &[Point2]) -> RotatedRect {
    assert!(!points.is_empty(), "min_area_rect needs at least one point");
    let hull = convex_hull(points);
    if hull.len() == 1 {
        return RotatedRect {
            center: hull[0],
            width: 0.0,
            height: 0.0,
            angle_deg: 0.0,
        };
    }
    let mut best: Option<RotatedRect> = None;
    for i in 0..hull.len() {
        let e = hull[(i + 1) % hull.len()] - hull[i];
        let angle = quarter_angle(e.y.atan2(e.x).to_degrees());
        let cand = bounding_in_frame(&hull, angle);
        best = Some(match best {
            None => cand,
            Some(b) => {
                let scale = b.area().abs().max(cand.area().abs()).max(1e-300);
                let diff = (cand.area() - b.area()) / scale;
                if diff < -1e-9 || (diff.abs() <= 1e-9 && cand.angle_deg < b.angle_deg) {
                    cand
                } else {
                    b
                }
            }
        });
    }
    best.expect("hull has at least two points")
}

/// The four corners of `rect`, in order around the rectangle.
pub fn box_points(rect: &RotatedRect) -> [Point2; 4] {
    let (u, v) = rect.axes();
    let (hu, hv) = (u.scale(rect.width / 2.0), v.scale(rect.height / 2.0));
    let c = rect.center;
    [c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn unit_square() {
        let r = min_area_rect(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]));
        assert_eq!(r.angle_deg, 0.0);
        assert!((r.center.x - 0.5).abs() < 1e-12 && (r.center.y - 0.5).abs() < 1e-12);
        assert!((r.width - 1.0).abs() < 1e-12 && (r.height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diamond_is_forty_five_degrees() {
        let r = min_area_rect(&pts(&[(0.0, 1.0), (1.0, 0.0), (2.0, 1.0), (1.0, 2.0)]));
        assert!((r.angle_deg - 45.0).abs() < 1e-9);
        assert!((r.width - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.height - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_is_degenerate() {
        let r = min_area_rect(&pts(&[(0.0, 0.0), (2.0, 0.0), (5.0, 0.0)]));
        assert!((r.width - 5.0).abs() < 1e-12);
        assert_eq!(r.height, 0.0);
        assert_eq!(r.angle_deg, 0.0);

        let vertical = min_area_rect(&pts(&[(1.0, 0.0), (1.0, 4.0)]));
        assert_eq!(vertical.angle_deg, 0.0);
        assert!((vertical.area()).abs() < 1e-12);
        assert!((vertical.width.max(vertical.height) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_point() {
        let r = min_area_rect(&pts(&[(3.0, 4.0), (3.0, 4.0)]));
        assert_eq!(r.center, Point2::new(3.0, 4.0));
        assert_eq!(r.area(), 0.0);
    }

    #[test]
    fn box_points_of_unit_square() {
        let r = RotatedRect {
            center: Point2::new(0.5, 0.5),
            width: 1.0,
            height: 1.0,
            angle_deg: 0.0,
        };
        assert_eq!(
            box_points(&r),
            [
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0)
            ]
        );
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let h = convex_hull(&pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (1.0, 0.3)]));
        assert_eq!(h.len(), 3);
    }
}
