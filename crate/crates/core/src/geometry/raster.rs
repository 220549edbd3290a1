use super::{Mask2D, Point2};
use crate::error::{Error, Result};

/// Boundary tolerance for rasterization: cell centers within this distance of
/// an edge count as on the polygon.
pub const FILL_EPS: f64 = 1e-7;

fn dedup_ring(vertices: &[Point2]) -> Vec<Point2> {
    let mut ring: Vec<Point2> = Vec::with_capacity(vertices.len());
    for &v in vertices {
        if ring.last().is_none_or(|&l| l.distance(v) > FILL_EPS) {
            ring.push(v);
        }
    }
    while ring.len() > 1 && ring[0].distance(ring[ring.len() - 1]) <= FILL_EPS {
        ring.pop();
    }
    ring
}

/// `true` for convex rings (either orientation) and for degenerate rings that
/// collapse to a point or a segment.
pub fn is_convex(vertices: &[Point2]) -> bool {
    let ring = dedup_ring(vertices);
    let n = ring.len();
    if n < 3 {
        return true;
    }
    let scale = ring
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0, f64::max);
    let tol = 1e-12 * scale * scale;
    let (mut pos, mut neg) = (false, false);
    let mut turning = 0.0;
    for i in 0..n {
        let a = ring[(i + 1) % n] - ring[i];
        let b = ring[(i + 2) % n] - ring[(i + 1) % n];
        let cr = a.cross(b);
        if cr > tol {
            pos = true;
        } else if cr < -tol {
            neg = true;
        }
        turning += cr.atan2(a.dot(b));
    }
    if pos && neg {
        return false;
    }
    if !pos && !neg {
        // all collinear: a segment traversed back and forth
        return true;
    }
    // a simple convex ring turns exactly once
    (turning.abs() - std::f64::consts::TAU).abs() < 1e-6
}

/// Sets every cell whose center lies inside or on the convex polygon, keeping
/// cells already set on `canvas` (union semantics). Points and segments fill
/// the cells they pass through exactly.
pub fn fill_convex_poly(canvas: &Mask2D, vertices: &[Point2]) -> Result<Mask2D> {
    if vertices.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("polygon vertex".into()));
    }
    let mut out = canvas.clone();
    let ring = dedup_ring(vertices);
    if ring.is_empty() {
        return Ok(out);
    }
    if !is_convex(&ring) {
        return Err(Error::NonConvex);
    }
    let (w, h) = (canvas.width() as i64, canvas.height() as i64);
    let (ymin, ymax) = ring
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let row_lo = ((ymin - FILL_EPS).ceil() as i64).max(0);
    let row_hi = ((ymax + FILL_EPS).floor() as i64).min(h - 1);
    let n = ring.len();
    for y in row_lo..=row_hi {
        let yf = y as f64;
        let (mut xl, mut xr) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut include = |x: f64| {
            xl = xl.min(x);
            xr = xr.max(x);
        };
        if n == 1 {
            if (ring[0].y - yf).abs() <= FILL_EPS {
                include(ring[0].x);
            }
        } else {
            for i in 0..n {
                let (p, q) = (ring[i], ring[(i + 1) % n]);
                let (lo, hi) = (p.y.min(q.y), p.y.max(q.y));
                if yf < lo - FILL_EPS || yf > hi + FILL_EPS {
                    continue;
                }
                if hi - lo <= FILL_EPS {
                    include(p.x);
                    include(q.x);
                } else {
                    let t = ((yf - p.y) / (q.y - p.y)).clamp(0.0, 1.0);
                    include(p.x + t * (q.x - p.x));
                }
            }
        }
        if xl > xr {
            continue;
        }
        let col_lo = ((xl - FILL_EPS).ceil() as i64).max(0);
        let col_hi = ((xr + FILL_EPS).floor() as i64).min(w - 1);
        for x in col_lo..=col_hi {
            out.set(x as usize, y as usize, true);
        }
    }
    Ok(out)
}
