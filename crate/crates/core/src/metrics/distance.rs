//! Mean-distance metrics by exhaustive patch matching.
//!
//! Both metrics are reconstructions ("dragflow-kit variant"): a template
//! patch is cut from the original features around a source cell `q`, the
//! best L1 match is searched inside the editable region of the edited
//! features, and the score is the distance from that match to where the
//! op's full transform sends `q`. MD1 uses the single cell nearest the
//! source centroid. MD2 averages over every offset in a disc around it.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{Mask2D, Point2};
use crate::schedule::{full_params, RegionOp};

pub const DEFAULT_PATCH_RADIUS: usize = 3;
pub const DEFAULT_SCOPE_RADIUS: f64 = 5.0;

/// L1 distance between the patch of `a` at `pa` and the patch of `b` at `pb`.
/// Callers guarantee both patches lie inside their grids.
fn patch_l1(a: &Field, pa: (usize, usize), b: &Field, pb: (usize, usize), r: usize) -> f64 {
    let (c, _, _) = a.shape();
    let mut acc = 0.0;
    for ch in 0..c {
        for dy in 0..=2 * r {
            for dx in 0..=2 * r {
                let va = a.get(ch, pa.1 + dy - r, pa.0 + dx - r);
                let vb = b.get(ch, pb.1 + dy - r, pb.0 + dx - r);
                acc += (va - vb).abs();
            }
        }
    }
    acc
}

fn patch_fits(x: i64, y: i64, r: usize, w: usize, h: usize) -> bool {
    let r = r as i64;
    x - r >= 0 && y - r >= 0 && x + r < w as i64 && y + r < h as i64
}

/// Cell of `edited` inside `search` whose patch best matches the patch of
/// `original` at `q`. Ties go to the cell nearest `q`, then row-major order.
pub fn best_patch_match(
    original: &Field,
    q: (usize, usize),
    edited: &Field,
    search: &Mask2D,
    r: usize,
) -> Result<(usize, usize)> {
    let (_, h, w) = edited.shape();
    let mut best: Option<((usize, usize), f64, f64)> = None;
    for (x, y) in search.iter_set() {
        if !patch_fits(x as i64, y as i64, r, w, h) {
            continue;
        }
        let cost = patch_l1(original, q, edited, (x, y), r);
        let d2 = (x as f64 - q.0 as f64).powi(2) + (y as f64 - q.1 as f64).powi(2);
        let better = match best {
            None => true,
            Some((_, bc, bd)) => cost < bc || (cost == bc && d2 < bd),
        };
        if better {
            best = Some(((x, y), cost, d2));
        }
    }
    best.map(|(p, _, _)| p).ok_or(Error::EmptySearchRegion)
}

/// Feature-grid coordinates of a latent point for a pooling stride.
fn to_feature(p: Point2, stride: usize) -> Point2 {
    let s = stride as f64;
    let off = (s - 1.0) / 2.0;
    Point2::new((p.x - off) / s, (p.y - off) / s)
}

struct MdSetup {
    src: (i64, i64),
    transform: crate::geometry::AffineTransform,
}

fn setup(op: &RegionOp, stride: usize) -> Result<MdSetup> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    Ok(MdSetup {
        src: to_feature(op.begin(), stride).round_cell(),
        transform: full_params(op)?.transform().conjugate_to_grid(stride),
    })
}

/// Match error, in latent cells, for the template at feature cell `q`.
fn offset_error(
    x: &Field,
    edited: &Field,
    search: &Mask2D,
    s: &MdSetup,
    q: (usize, usize),
    r: usize,
    stride: usize,
) -> Result<f64> {
    let p = best_patch_match(x, q, edited, search, r)?;
    let expected = s.transform.apply(Point2::new(q.0 as f64, q.1 as f64));
    Ok(Point2::new(p.0 as f64, p.1 as f64).distance(expected) * stride as f64)
}

fn check_grids(x: &Field, edited: &Field, search: &Mask2D) -> Result<()> {
    x.check_shape(edited)?;
    if search.dims() != (x.width(), x.height()) {
        return Err(Error::dims(
            format!("{}x{} search mask", x.width(), x.height()),
            format!("{}x{}", search.width(), search.height()),
        ));
    }
    Ok(())
}

/// MD1 on a feature grid with the given stride; the result is in latent
/// cells. `search` is the editable mask already moved to the feature grid.
pub fn md1(x: &Field, edited: &Field, op: &RegionOp, search: &Mask2D, stride: usize, patch_radius: usize) -> Result<f64> {
    check_grids(x, edited, search)?;
    let s = setup(op, stride)?;
    let (_, h, w) = x.shape();
    if !patch_fits(s.src.0, s.src.1, patch_radius, w, h) {
        return Err(Error::PatchOutOfBounds {
            x: s.src.0,
            y: s.src.1,
            radius: patch_radius,
            width: w,
            height: h,
        });
    }
    let q = (s.src.0 as usize, s.src.1 as usize);
    offset_error(x, edited, search, &s, q, patch_radius, stride)
}

/// MD2: mean MD1-style error over all template centres within
/// `scope_radius` latent cells of the source centroid cell. Centres whose
/// template would leave the grid are skipped; scope 0 is exactly MD1.
pub fn md2(
    x: &Field,
    edited: &Field,
    op: &RegionOp,
    search: &Mask2D,
    stride: usize,
    patch_radius: usize,
    scope_radius: f64,
) -> Result<f64> {
    check_grids(x, edited, search)?;
    if !(scope_radius >= 0.0 && scope_radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("scope radius must be non-negative, got {scope_radius}")));
    }
    let s = setup(op, stride)?;
    let (_, h, w) = x.shape();
    let rho = scope_radius / stride as f64;
    let span = rho.floor() as i64;
    let mut total = 0.0;
    let mut n = 0usize;
    for dy in -span..=span {
        for dx in -span..=span {
            if ((dx * dx + dy * dy) as f64) > rho * rho {
                continue;
            }
            let (qx, qy) = (s.src.0 + dx, s.src.1 + dy);
            if !patch_fits(qx, qy, patch_radius, w, h) {
                continue;
            }
            total += offset_error(x, edited, search, &s, (qx as usize, qy as usize), patch_radius, stride)?;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::PatchOutOfBounds {
            x: s.src.0,
            y: s.src.1,
            radius: patch_radius,
            width: w,
            height: h,
        });
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{warp_field, AffineTransform};
    use crate::synthetic::{gaussian_blob, texture};

    fn scene() -> (Field, RegionOp) {
        let mut x = texture(2, 40, 40, 0.3, 7).unwrap();
        x.add_scaled(&gaussian_blob(2, 40, 40, Point2::new(12.0, 14.0), 2.0, 1.0), 1.0).unwrap();
        let m = Mask2D::disc(40, 40, Point2::new(12.0, 14.0), 4.0);
        (x, RegionOp::relocation(m, Point2::new(24.0, 14.0)).unwrap())
    }

    fn shifted(x: &Field, d: Point2) -> Field {
        warp_field(x, &AffineTransform::translation(d)).unwrap()
    }

    #[test]
    fn exact_translation_scores_zero() {
        let (x, op) = scene();
        let edited = shifted(&x, op.target() - op.begin());
        let all = Mask2D::full(40, 40);
        assert_eq!(md1(&x, &edited, &op, &all, 1, 3).unwrap(), 0.0);
        assert_eq!(md2(&x, &edited, &op, &all, 1, 3, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn offset_edit_reports_offset() {
        let (x, op) = scene();
        let all = Mask2D::full(40, 40);
        let edited = shifted(&x, op.target() - op.begin() + Point2::new(3.0, 4.0));
        assert!((md1(&x, &edited, &op, &all, 1, 3).unwrap() - 5.0).abs() < 1e-12);
        let edited = shifted(&x, op.target() - op.begin() + Point2::new(0.0, 6.0));
        assert!((md2(&x, &edited, &op, &all, 1, 3, 5.0).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_scope_equals_md1() {
        let (x, op) = scene();
        let all = Mask2D::full(40, 40);
        let edited = texture(2, 40, 40, 1.0, 99).unwrap();
        assert_eq!(
            md1(&x, &edited, &op, &all, 1, 3).unwrap(),
            md2(&x, &edited, &op, &all, 1, 3, 0.0).unwrap()
        );
    }

    #[test]
    fn constant_edit_ties_to_source_cell() {
        let (x, op) = scene();
        let all = Mask2D::full(40, 40);
        let flat = Field::filled(2, 40, 40, 0.5);
        // every candidate ties, so the match stays at the source cell
        let d = md1(&x, &flat, &op, &all, 1, 3).unwrap();
        assert!((d - 12.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let (x, op) = scene();
        assert!(matches!(
            md1(&x, &x, &op, &Mask2D::new(40, 40), 1, 3),
            Err(Error::EmptySearchRegion)
        ));
        let corner = RegionOp::relocation(Mask2D::rect(40, 40, 0, 0, 1, 1), Point2::new(20.0, 20.0)).unwrap();
        assert!(matches!(
            md1(&x, &x, &corner, &Mask2D::full(40, 40), 1, 3),
            Err(Error::PatchOutOfBounds { .. })
        ));
    }
}
