//! Drag instruction overlays: source region in blue, target region in green,
//! and an arrow from the source centroid to the target centroid.

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::geometry::{centroid, Mask2D, Point2};
use crate::schedule::{target_mask_at, RegionOp};

pub const SOURCE_COLOR: Rgb<u8> = Rgb([40, 90, 255]);
pub const TARGET_COLOR: Rgb<u8> = Rgb([40, 220, 80]);
pub const ARROW_COLOR: Rgb<u8> = Rgb([255, 60, 40]);
const BACKGROUND: Rgb<u8> = Rgb([16, 16, 16]);
const ALPHA: f64 = 0.55;

fn blend(px: &mut Rgb<u8>, color: Rgb<u8>, alpha: f64) {
    for i in 0..3 {
        px.0[i] = (px.0[i] as f64 * (1.0 - alpha) + color.0[i] as f64 * alpha).round() as u8;
    }
}

fn tint(img: &mut RgbImage, mask: &Mask2D, color: Rgb<u8>) {
    for (x, y) in mask.iter_set() {
        blend(img.get_pixel_mut(x as u32, y as u32), color, ALPHA);
    }
}

fn plot(img: &mut RgbImage, x: i64, y: i64) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, ARROW_COLOR);
    }
}

fn line(img: &mut RgbImage, a: Point2, b: Point2) {
    let n = (b - a).norm().ceil().max(1.0) as usize;
    for i in 0..=n {
        let p = a + (b - a).scale(i as f64 / n as f64);
        let (x, y) = p.round_cell();
        plot(img, x, y);
    }
}

/// Draws a straight arrow with a two-stroke head. Zero-length arrows draw a
/// single dot.
pub fn draw_arrow(img: &mut RgbImage, from: Point2, to: Point2) {
    line(img, from, to);
    let d = to - from;
    let len = d.norm();
    if len < 1e-9 {
        return;
    }
    let head = (len * 0.3).clamp(2.0, 8.0);
    let u = d.scale(1.0 / len);
    for angle in [0.5f64, -0.5] {
        let (s, c) = (angle + std::f64::consts::PI).sin_cos();
        let r = Point2::new(u.x * c - u.y * s, u.x * s + u.y * c);
        line(img, to, to + r.scale(head));
    }
}

/// Blends the two masks over `base` (or a dark canvas) and draws the arrow
/// between their centroids when both are non-empty.
pub fn render_overlay(base: Option<&RgbImage>, source: &Mask2D, target: &Mask2D) -> Result<RgbImage> {
    source.check_dims(target)?;
    let (w, h) = source.dims();
    let mut img = match base {
        Some(b) => {
            if (b.width() as usize, b.height() as usize) != (w, h) {
                return Err(Error::dims(format!("{w}x{h}"), format!("{}x{}", b.width(), b.height())));
            }
            b.clone()
        }
        None => RgbImage::from_pixel(w as u32, h as u32, BACKGROUND),
    };
    tint(&mut img, source, SOURCE_COLOR);
    tint(&mut img, target, TARGET_COLOR);
    if let (Ok(a), Ok(b)) = (centroid(source), centroid(target)) {
        draw_arrow(&mut img, a, b);
    }
    Ok(img)
}

/// Overlay of every op's source and step-`k` target on one canvas.
pub fn render_ops_at(base: Option<&RgbImage>, ops: &[RegionOp], k: usize, total: usize) -> Result<RgbImage> {
    let first = ops.first().ok_or_else(|| Error::InvalidArgument("no region ops".into()))?;
    let (w, h) = first.source_mask().dims();
    let mut source = Mask2D::new(w, h);
    let mut target = Mask2D::new(w, h);
    let mut arrows = Vec::new();
    for op in ops {
        let t = target_mask_at(op, k, total)?;
        source.union_in_place(op.source_mask())?;
        target.union_in_place(&t)?;
        arrows.push((op.begin(), centroid(&t).unwrap_or(op.begin())));
    }
    let mut img = render_overlay(base, &source, &Mask2D::new(w, h))?;
    tint(&mut img, &target, TARGET_COLOR);
    for (a, b) in arrows {
        draw_arrow(&mut img, a, b);
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colors_land_where_masks_are() {
        let s = Mask2D::rect(16, 16, 1, 1, 4, 4);
        let t = Mask2D::rect(16, 16, 10, 10, 13, 13);
        let img = render_overlay(None, &s, &t).unwrap();
        let src = img.get_pixel(1, 1);
        let tgt = img.get_pixel(13, 13);
        assert!(src.0[2] > src.0[1] && src.0[2] > src.0[0]);
        assert!(tgt.0[1] > tgt.0[0] && tgt.0[1] > tgt.0[2]);
        assert_eq!(*img.get_pixel(15, 0), BACKGROUND);
        // the arrow passes through the midpoint between the centroids
        assert_eq!(*img.get_pixel(7, 7), ARROW_COLOR);
    }

    #[test]
    fn k_zero_target_coincides_with_source() {
        let op = RegionOp::relocation(Mask2D::rect(32, 32, 4, 4, 10, 10), Point2::new(20.0, 20.0)).unwrap();
        let a = render_ops_at(None, std::slice::from_ref(&op), 0, 10).unwrap();
        let b = render_overlay(None, op.source_mask(), op.source_mask()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn base_size_must_match() {
        let m = Mask2D::new(8, 8);
        let base = RgbImage::new(4, 4);
        assert!(render_overlay(Some(&base), &m, &m).is_err());
    }
}
