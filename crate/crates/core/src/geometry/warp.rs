use super::{AffineTransform, Mask2D, Point2};
use crate::error::Result;
use crate::field::Field;

/// Bilinear interpolation of a grid read through `get`, which must return 0
/// outside the grid.
#[inline]
pub fn bilinear_sample(get: impl Fn(i64, i64) -> f64, p: Point2) -> f64 {
    let x0 = p.x.floor();
    let y0 = p.y.floor();
    let fx = p.x - x0;
    let fy = p.y - y0;
    let (xi, yi) = (x0 as i64, y0 as i64);
    let mut v = get(xi, yi) * (1.0 - fx) * (1.0 - fy);
    if fx != 0.0 {
        v += get(xi + 1, yi) * fx * (1.0 - fy);
    }
    if fy != 0.0 {
        v += get(xi, yi + 1) * (1.0 - fx) * fy;
        if fx != 0.0 {
            v += get(xi + 1, yi + 1) * fx * fy;
        }
    }
    v
}

/// Warps `mask` by `t` with inverse (pull) mapping: every output cell samples
/// the source at `t⁻¹(cell)` bilinearly and is set when the sample is ≥ 0.5.
/// Content mapped outside the grid is clipped.
pub fn warp_mask(mask: &Mask2D, t: &AffineTransform) -> Result<Mask2D> {
    let inv = t.inverse()?;
    if t.is_identity() {
        return Ok(mask.clone());
    }
    let read = |x: i64, y: i64| if mask.get_i(x, y) { 1.0 } else { 0.0 };
    Ok(Mask2D::from_fn(mask.width(), mask.height(), |x, y| {
        let src = inv.apply(Point2::new(x as f64, y as f64));
        bilinear_sample(read, src) >= 0.5
    }))
}

/// Real-valued counterpart of [`warp_mask`] without thresholding; samples
/// outside the grid read as 0.
pub fn warp_field(field: &Field, t: &AffineTransform) -> Result<Field> {
    let inv = t.inverse()?;
    if t.is_identity() {
        return Ok(field.clone());
    }
    let (c, h, w) = field.shape();
    let sources: Vec<Point2> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| inv.apply(Point2::new(x as f64, y as f64)))
        .collect();
    let mut out = Field::zeros(c, h, w);
    for ch in 0..c {
        let plane = field.channel(ch);
        let read = |x: i64, y: i64| {
            if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                plane[y as usize * w + x as usize]
            } else {
                0.0
            }
        };
        for (o, &src) in out.channel_mut(ch).iter_mut().zip(&sources) {
            *o = bilinear_sample(read, src);
        }
    }
    Ok(out)
}
