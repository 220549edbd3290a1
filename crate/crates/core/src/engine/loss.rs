use super::config::LossMode;
use crate::error::{Error, Result};
use crate::extractors::FeatureExtractor;
use crate::field::Field;
use crate::geometry::{warp_field, Mask2D};
use crate::region::{build_gradient_mask, region_weights, GradientMask, GradientMaskOptions, RegionWeights};
use crate::schedule::{target_mask_at, transform_at, RegionOp};

/// Optimization state. The baseline features are the stop-gradient
/// snapshot `M^(0) ⊙ F(z^(0))`, captured once and never written again.
#[derive(Clone, Debug)]
pub struct DragState {
    pub z: Field,
    z_orig: Field,
    baseline: Vec<Field>,
    pub k: usize,
    gradient_mask: GradientMask,
    weights: RegionWeights,
}

impl DragState {
    pub fn new(
        z0: &Field,
        ops: &[RegionOp],
        extractor: &dyn FeatureExtractor,
        total_steps: usize,
        options: GradientMaskOptions,
    ) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("at least one region op is required".into()));
        }
        if !z0.is_finite() {
            return Err(Error::NonFinite("initial latent".into()));
        }
        let (w, h) = (z0.width(), z0.height());
        let gradient_mask = build_gradient_mask(ops, w, h, total_steps, options)?;
        let masks: Vec<&Mask2D> = ops.iter().map(|o| o.source_mask()).collect();
        let weights = region_weights(&masks)?;
        let f0 = extractor.extract(z0)?;
        let baseline = ops
            .iter()
            .map(|op| f0.masked(&extractor.feature_mask(op.source_mask())?))
            .collect::<Result<Vec<_>>>()?;
        Ok(DragState {
            z: z0.clone(),
            z_orig: z0.clone(),
            baseline,
            k: 0,
            gradient_mask,
            weights,
        })
    }

    pub fn z_orig(&self) -> &Field {
        &self.z_orig
    }

    pub fn baseline_features(&self) -> &[Field] {
        &self.baseline
    }

    pub fn gradient_mask(&self) -> &GradientMask {
        &self.gradient_mask
    }

    pub fn weights(&self) -> &RegionWeights {
        &self.weights
    }
}

/// Region loss at schedule step `k` of `total`:
/// `Σ_i γ_i ρ(M_i^(k) ⊙ F(z) − A_i^(k)(sg[M_i^(0) ⊙ F(z^(0))]))`, where `A`
/// warps the snapshot by the step-`k` transform when `align` is set and is
/// the identity otherwise. Returns the loss and its gradient in latent space.
pub fn drag_loss(
    state: &DragState,
    ops: &[RegionOp],
    k: usize,
    total: usize,
    extractor: &dyn FeatureExtractor,
    mode: LossMode,
    align: bool,
) -> Result<(f64, Field)> {
    if ops.len() != state.baseline.len() {
        return Err(Error::dims(format!("{} ops", state.baseline.len()), format!("{} ops", ops.len())));
    }
    let feats = extractor.extract(&state.z)?;
    let (fc, fh, fw) = feats.shape();
    let mut gfeat = Field::zeros(fc, fh, fw);
    let plane = fh * fw;
    let mut loss = 0.0;
    for (i, op) in ops.iter().enumerate() {
        let gamma = state.weights.gammas()[i];
        let mk = extractor.feature_mask(&target_mask_at(op, k, total)?)?;
        if mk.dims() != (fw, fh) {
            return Err(Error::dims(format!("{fw}x{fh} feature mask"), format!("{}x{}", mk.width(), mk.height())));
        }
        let reference = if align {
            warp_field(&state.baseline[i], &extractor.feature_transform(&transform_at(op, k, total)?))?
        } else {
            state.baseline[i].clone()
        };
        let bits = mk.bits();
        let mut term = 0.0;
        for (j, ((&f, &a), g)) in feats
            .data()
            .iter()
            .zip(reference.data())
            .zip(gfeat.data_mut())
            .enumerate()
        {
            let inside = bits[j % plane];
            let r = if inside { f - a } else { -a };
            if r == 0.0 {
                continue;
            }
            let (v, d) = mode.eval(r);
            term += v;
            if inside {
                *g += gamma * d;
            }
        }
        loss += gamma * term;
    }
    let grad = extractor.adjoint(&gfeat, &state.z)?;
    Ok((loss, grad))
}

/// `z ← B ⊙ (z − α·grad) + (1 − B) ⊙ z_orig`. Background cells are copied
/// from `z_orig`, so they stay bit-identical to it.
pub fn hard_step(state: &DragState, grad: &Field, alpha: f64) -> Result<Field> {
    let mut moved = state.z.clone();
    moved.add_scaled(grad, -alpha)?;
    moved.select(&state.gradient_mask.mask, &state.z_orig)
}

/// The soft alternative to the hard constraint:
/// `||(z_next − sg[z_next_ref]) ⊙ (1 − B)||₁`.
pub fn soft_bg_loss(z_next: &Field, z_next_ref: &Field, editable: &Mask2D) -> Result<f64> {
    let diff = z_next.zip_map(z_next_ref, |a, b| (a - b).abs())?;
    Ok(diff.masked(&editable.complement())?.data().iter().sum())
}

/// Subgradient of [`soft_bg_loss`] with respect to `z_next`.
pub fn soft_bg_grad(z_next: &Field, z_next_ref: &Field, editable: &Mask2D) -> Result<Field> {
    z_next
        .zip_map(z_next_ref, |a, b| LossMode::L1.eval(a - b).1)?
        .masked(&editable.complement())
}

/// Largest gradient magnitude over editable cells.
pub fn editable_max_abs(grad: &Field, editable: &Mask2D) -> Result<f64> {
    Ok(grad.masked(editable)?.max_abs())
}
