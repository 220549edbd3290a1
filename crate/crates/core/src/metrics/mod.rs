//! Evaluation: image fidelity (IF) scores with a pluggable perceptual
//! distance, mean-distance (MD) scores by patch matching, and SSIM/PSNR.

mod distance;
mod fidelity;
mod quality;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use distance::{best_patch_match, md1, md2, DEFAULT_PATCH_RADIUS, DEFAULT_SCOPE_RADIUS};
pub use fidelity::{if_bg, if_s2s, if_s2t, DistanceKind, MeanAbsDistance, PerceptualDistance, SsimDistance};
pub use quality::{psnr, ssim, ssim_windowed, PSNR_CAP_DB, SSIM_WINDOW};

use crate::error::{Error, Result};
use crate::extractors::FeatureExtractor;
use crate::field::Field;
use crate::region::{build_gradient_mask, GradientMaskOptions};
use crate::schedule::RegionOp;

/// Tag attached to every report: the MD definitions and the LPIPS stand-in
/// are this kit's own reconstructions.
pub const VARIANT: &str = "dragflow-kit variant";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub distance: DistanceKind,
    pub patch_radius: usize,
    pub scope_radius: f64,
    pub sweep: bool,
    /// Schedule length used to build the swept editable mask.
    pub steps: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            distance: DistanceKind::Ssim,
            patch_radius: DEFAULT_PATCH_RADIUS,
            scope_radius: DEFAULT_SCOPE_RADIUS,
            sweep: GradientMaskOptions::default().sweep,
            steps: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub if_bg: f64,
    pub if_s2t: f64,
    pub if_s2s: f64,
    pub md1: f64,
    pub md2: f64,
    pub distance: String,
    pub variant: String,
}

impl MetricReport {
    pub fn table(&self) -> String {
        render_table(&[("edit".to_string(), self.clone())])
    }
}

/// Aligned text table with columns IF_bg, IF_s2t, IF_s2s, MD1, MD2.
pub fn render_table(rows: &[(String, MetricReport)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<label_w$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}",
        "", "IF_bg", "IF_s2t", "IF_s2s", "MD1", "MD2"
    );
    for (label, r) in rows {
        let _ = writeln!(
            out,
            "{:<label_w$}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.3}  {:>8.3}",
            label, r.if_bg, r.if_s2t, r.if_s2s, r.md1, r.md2
        );
    }
    if let Some((_, r)) = rows.first() {
        let _ = writeln!(out, "distance: {}; {}", r.distance, r.variant);
    }
    out
}

/// All five metrics for one edit. IF scores compare latents directly; MD
/// scores match patches on the extractor's features, averaged over ops.
pub fn evaluate(
    x: &Field,
    edited: &Field,
    ops: &[RegionOp],
    extractor: &dyn FeatureExtractor,
    options: &EvalOptions,
) -> Result<MetricReport> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("no region operations".into()));
    }
    x.check_shape(edited)?;
    let d = options.distance.build();
    let b = build_gradient_mask(
        ops,
        x.width(),
        x.height(),
        options.steps.max(1),
        GradientMaskOptions { sweep: options.sweep },
    )?;
    let masks: Vec<_> = ops.iter().map(|o| o.source_mask()).collect();
    let fx = extractor.extract(x)?;
    let fe = extractor.extract(edited)?;
    let search = extractor.feature_mask(&b.mask)?;
    let stride = extractor.stride();
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for op in ops {
        m1 += md1(&fx, &fe, op, &search, stride, options.patch_radius)?;
        m2 += md2(&fx, &fe, op, &search, stride, options.patch_radius, options.scope_radius)?;
    }
    let n = ops.len() as f64;
    Ok(MetricReport {
        if_bg: if_bg(x, edited, &b.mask, d.as_ref())?,
        if_s2t: if_s2t(x, edited, ops, d.as_ref())?,
        if_s2s: if_s2s(x, edited, &masks, d.as_ref())?,
        md1: m1 / n,
        md2: m2 / n,
        distance: d.name(),
        variant: VARIANT.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractors::Identity;
    use crate::geometry::{Mask2D, Point2};
    use crate::synthetic::{gaussian_blob, texture};

    #[test]
    fn identity_edit_report() {
        let mut x = texture(1, 32, 32, 0.2, 3).unwrap();
        x.add_scaled(&gaussian_blob(1, 32, 32, Point2::new(10.0, 10.0), 2.0, 1.0), 1.0).unwrap();
        let op = RegionOp::relocation(Mask2D::disc(32, 32, Point2::new(10.0, 10.0), 4.0), Point2::new(20.0, 10.0)).unwrap();
        let r = evaluate(&x, &x, &[op], &Identity, &EvalOptions::default()).unwrap();
        assert_eq!(r.if_bg, 1.0);
        assert_eq!(r.if_s2s, 1.0);
        assert!((r.md1 - 10.0).abs() < 1e-9);
        let t = r.table();
        assert!(t.contains("IF_bg") && t.contains(VARIANT) && t.contains("1-SSIM"));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<MetricReport>(&json).unwrap(), r);
    }
}
