use serde::{Deserialize, Serialize};

use super::quality::{ssim_windowed, SSIM_WINDOW};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{warp_field, Mask2D};
use crate::schedule::{full_params, RegionOp};

/// Stand-in for a learned perceptual distance: values in [0, 1], zero on
/// identical inputs, symmetric.
pub trait PerceptualDistance: Send + Sync {
    fn name(&self) -> String;
    fn dist(&self, a: &Field, b: &Field) -> Result<f64>;
}

/// `(1 − SSIM) / 2`.
#[derive(Clone, Copy, Debug)]
pub struct SsimDistance {
    pub window: usize,
}

impl Default for SsimDistance {
    fn default() -> Self {
        SsimDistance { window: SSIM_WINDOW }
    }
}

impl PerceptualDistance for SsimDistance {
    fn name(&self) -> String {
        format!("1-SSIM (window {})", self.window)
    }

    fn dist(&self, a: &Field, b: &Field) -> Result<f64> {
        Ok(((1.0 - ssim_windowed(a, b, self.window)?) / 2.0).clamp(0.0, 1.0))
    }
}

/// Mean absolute difference over the joint dynamic range, clamped to 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAbsDistance;

impl PerceptualDistance for MeanAbsDistance {
    fn name(&self) -> String {
        "mean abs difference".into()
    }

    fn dist(&self, a: &Field, b: &Field) -> Result<f64> {
        let mad = a.zip_map(b, |x, y| (x - y).abs())?.mean();
        if mad == 0.0 {
            return Ok(0.0);
        }
        let (lo_a, hi_a) = a.min_max();
        let (lo_b, hi_b) = b.min_max();
        let range = hi_a.max(hi_b) - lo_a.min(lo_b);
        Ok((mad / range).clamp(0.0, 1.0))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    #[default]
    Ssim,
    MeanAbs,
}

impl DistanceKind {
    pub fn build(self) -> Box<dyn PerceptualDistance> {
        match self {
            DistanceKind::Ssim => Box::new(SsimDistance::default()),
            DistanceKind::MeanAbs => Box::new(MeanAbsDistance),
        }
    }
}

/// Source-to-source fidelity: `1 − mean_i d(M_i ⊙ x, M_i ⊙ x′)`.
/// Lower means the content moved out of its source region.
pub fn if_s2s(x: &Field, edited: &Field, source_masks: &[&Mask2D], d: &dyn PerceptualDistance) -> Result<f64> {
    if source_masks.is_empty() {
        return Err(Error::InvalidArgument("no source masks".into()));
    }
    let mut total = 0.0;
    for m in source_masks {
        if m.is_empty() {
            return Err(Error::EmptyRegion);
        }
        total += d.dist(&x.masked(m)?, &edited.masked(m)?)?;
    }
    Ok(1.0 - total / source_masks.len() as f64)
}

/// Source-to-target fidelity: the masked original warped by each op's full
/// transform, compared with the edit inside the warped mask.
pub fn if_s2t(x: &Field, edited: &Field, ops: &[RegionOp], d: &dyn PerceptualDistance) -> Result<f64> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("no region operations".into()));
    }
    let mut total = 0.0;
    for op in ops {
        let t = full_params(op)?.transform();
        let target = crate::geometry::warp_mask(op.source_mask(), &t)?;
        if target.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let moved = warp_field(&x.masked(op.source_mask())?, &t)?;
        total += d.dist(&moved.masked(&target)?, &edited.masked(&target)?)?;
    }
    Ok(1.0 - total / ops.len() as f64)
}

/// Background fidelity outside the editable mask `B`.
pub fn if_bg(x: &Field, edited: &Field, editable: &Mask2D, d: &dyn PerceptualDistance) -> Result<f64> {
    if editable.is_full() {
        return Err(Error::UndefinedBackground);
    }
    let bg = editable.complement();
    Ok(1.0 - d.dist(&x.masked(&bg)?, &edited.masked(&bg)?)?)
}
