//! Adaptive per-region loss weights and the editable-area gradient mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{box_points, fill_convex_poly, min_area_rect, Mask2D, RotatedRect};
use crate::schedule::{target_mask_at, RegionOp};

/// Normalized weights `γ_i`, one per region, summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionWeights {
    gammas: Vec<f64>,
}

impl RegionWeights {
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

/// Raw weight of a region covering fraction `relative_size` of its grid:
/// `clamp(1 + 0.5 / (S + 0.1), 1, 5)`. Smaller regions weigh more.
pub fn raw_weight(relative_size: f64) -> f64 {
    (1.0 + 0.5 / (relative_size + 0.1)).clamp(1.0, 5.0)
}

pub fn region_weights(masks: &[&Mask2D]) -> Result<RegionWeights> {
    let Some(first) = masks.first() else {
        return Err(Error::InvalidArgument("region_weights needs at least one mask".into()));
    };
    for m in masks {
        first.check_dims(m)?;
    }
    if masks.len() == 1 {
        return Ok(RegionWeights { gammas: vec![1.0] });
    }
    let raw: Vec<f64> = masks
        .iter()
        .map(|m| raw_weight(m.count() as f64 / (m.width() * m.height()) as f64))
        .collect();
    let total: f64 = raw.iter().sum();
    let n = raw.len() as f64;
    let gammas = if total == 0.0 {
        vec![1.0 / n; raw.len()]
    } else {
        raw.iter().map(|w| w / total).collect()
    };
    Ok(RegionWeights { gammas })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradientMaskOptions {
    /// Also cover every intermediate step mask, not just the endpoints. A
    /// rotating region can leave the endpoint rectangle mid-sweep.
    pub sweep: bool,
}

impl Default for GradientMaskOptions {
    fn default() -> Self {
        GradientMaskOptions { sweep: true }
    }
}

/// Binary mask `B` of editable latent cells plus the per-op rectangles it was
/// rasterized from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientMask {
    pub mask: Mask2D,
    pub rects: Vec<RotatedRect>,
}

impl GradientMask {
    /// Filled rectangle of op `i` alone.
    pub fn op_region(&self, i: usize) -> Result<Mask2D> {
        let rect = self
            .rects
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("no rectangle for op {i}")))?;
        fill_convex_poly(
            &Mask2D::new(self.mask.width(), self.mask.height()),
            &box_points(rect),
        )
    }
}

/// Builds `B`: for each op, enclose `M^(0) ∪ M^(K)` (plus the sweep when
/// enabled) in its minimum-area rotated rectangle and fill the rectangles onto
/// an empty canvas of the latent grid.
pub fn build_gradient_mask(
    ops: &[RegionOp],
    width: usize,
    height: usize,
    total_steps: usize,
    options: GradientMaskOptions,
) -> Result<GradientMask> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("gradient mask needs at least one op".into()));
    }
    let mut canvas = Mask2D::new(width, height);
    let mut rects = Vec::with_capacity(ops.len());
    for op in ops {
        let src = op.source_mask();
        canvas.check_dims(src)?;
        if src.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut union = src.union(&target_mask_at(op, total_steps, total_steps)?)?;
        if options.sweep {
            for k in 1..total_steps {
                union.union_in_place(&target_mask_at(op, k, total_steps)?)?;
            }
        }
        let rect = min_area_rect(&union.set_points());
        canvas = fill_convex_poly(&canvas, &box_points(&rect))?;
        rects.push(rect);
    }
    Ok(GradientMask {
        mask: canvas,
        rects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    #[test]
    fn single_region_weight_is_one() {
        let m = Mask2D::rect(10, 10, 0, 0, 3, 3);
        assert_eq!(region_weights(&[&m]).unwrap().gammas(), &[1.0]);
        assert!(region_weights(&[]).is_err());
    }

    #[test]
    fn equal_sizes_split_evenly() {
        let a = Mask2D::rect(10, 10, 0, 0, 2, 2);
        let b = Mask2D::rect(10, 10, 5, 5, 7, 7);
        assert_eq!(region_weights(&[&a, &b]).unwrap().gammas(), &[0.5, 0.5]);
    }

    #[test]
    fn hand_evaluated_weights() {
        // S = (0.01, 0.5) on a 100-cell grid
        let small = Mask2D::rect(10, 10, 0, 0, 0, 0);
        let half = Mask2D::rect(10, 10, 0, 0, 9, 4);
        let g = region_weights(&[&small, &half]).unwrap();
        // w = (clamp(1 + 0.5/0.11) = 5, 1 + 0.5/0.6); γ = w / Σw
        let w2 = 1.0 + 0.5 / 0.6;
        assert!((g.gammas()[0] - 5.0 / (5.0 + w2)).abs() < 1e-12);
        assert!((g.gammas()[0] - 0.7317).abs() < 1e-4);
        assert!((g.gammas()[1] - 0.2683).abs() < 1e-4);
    }

    #[test]
    fn relocation_mask_covers_both_squares() {
        let src = Mask2D::rect(32, 32, 4, 4, 7, 7);
        let op = RegionOp::relocation(src.clone(), Point2::new(11.5, 5.5)).unwrap();
        let b = build_gradient_mask(&[op], 32, 32, 50, GradientMaskOptions::default()).unwrap();
        assert_eq!(b.mask, Mask2D::rect(32, 32, 4, 4, 13, 7));
    }

    #[test]
    fn zero_motion_is_the_source_rectangle() {
        let src = Mask2D::rect(16, 16, 3, 5, 8, 9);
        let c = crate::geometry::centroid(&src).unwrap();
        let op = RegionOp::relocation(src.clone(), c).unwrap();
        let b = build_gradient_mask(&[op], 16, 16, 50, GradientMaskOptions::default()).unwrap();
        assert!(b.mask.contains(&src).unwrap());
        assert_eq!(b.mask, src);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let op = RegionOp::relocation(Mask2D::rect(8, 8, 1, 1, 2, 2), Point2::new(4.0, 4.0)).unwrap();
        assert!(build_gradient_mask(&[op], 16, 16, 10, GradientMaskOptions::default()).is_err());
    }
}
