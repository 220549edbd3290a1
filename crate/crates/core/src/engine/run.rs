use serde::{Deserialize, Serialize};

use super::config::{BackgroundMode, DragConfig};
use super::loss::{drag_loss, editable_max_abs, hard_step, soft_bg_grad, soft_bg_loss, DragState};
use crate::error::{Error, Result};
use crate::extractors::FeatureExtractor;
use crate::field::Field;
use crate::geometry::{Mask2D, Point2};
use crate::metrics::{best_patch_match, DEFAULT_PATCH_RADIUS};
use crate::region::GradientMaskOptions;
use crate::schedule::RegionOp;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DragResult {
    pub final_z: Field,
    /// Loss evaluated before each iteration's update.
    pub loss_trajectory: Vec<f64>,
    /// Per op, the tracked content location after each iteration.
    pub centroid_trajectory: Vec<Vec<Point2>>,
    pub iterations_run: usize,
    pub gradient_mask: Mask2D,
}

/// Snapshot handed to a [`run_drag_observed`] observer after each iteration.
#[derive(Clone, Debug)]
pub struct Progress<'a> {
    pub iteration: usize,
    pub total: usize,
    pub loss: f64,
    pub centroids: Vec<Point2>,
    pub z: &'a Field,
}

/// Locates each op's source content in a latent by patch matching on the
/// extractor's features inside the editable mask. Reports the point that
/// the source centroid has moved to.
pub struct ContentTracker {
    base: Field,
    search: Mask2D,
    cells: Vec<(usize, usize)>,
    radii: Vec<usize>,
    begins: Vec<Point2>,
}

impl ContentTracker {
    pub fn new(z0: &Field, ops: &[RegionOp], editable: &Mask2D, extractor: &dyn FeatureExtractor) -> Result<Self> {
        let base = extractor.extract(z0)?;
        let (_, h, w) = base.shape();
        let search = extractor.feature_mask(editable)?;
        let mut cells = Vec::new();
        let mut radii = Vec::new();
        let mut begins = Vec::new();
        for op in ops {
            let b = op.begin();
            let (cx, cy) = extractor.feature_point(b).round_cell();
            let cx = cx.clamp(0, w as i64 - 1) as usize;
            let cy = cy.clamp(0, h as i64 - 1) as usize;
            let room = cx.min(cy).min(w - 1 - cx).min(h - 1 - cy);
            cells.push((cx, cy));
            radii.push(DEFAULT_PATCH_RADIUS.min(room));
            begins.push(b);
        }
        Ok(ContentTracker {
            base,
            search,
            cells,
            radii,
            begins,
        })
    }

    pub fn locate(&self, z: &Field, extractor: &dyn FeatureExtractor) -> Result<Vec<Point2>> {
        let feats = extractor.extract(z)?;
        let s = extractor.stride() as f64;
        let mut out = Vec::with_capacity(self.cells.len());
        for ((&q, &r), &b) in self.cells.iter().zip(&self.radii).zip(&self.begins) {
            let p = match best_patch_match(&self.base, q, &feats, &self.search, r) {
                Ok(p) => p,
                Err(Error::EmptySearchRegion) => q,
                Err(e) => return Err(e),
            };
            let shift = Point2::new(p.0 as f64 - q.0 as f64, p.1 as f64 - q.1 as f64).scale(s);
            out.push(b + shift);
        }
        Ok(out)
    }
}

pub fn run_drag(z0: &Field, ops: &[RegionOp], config: &DragConfig) -> Result<DragResult> {
    run_drag_observed(z0, ops, config, |_| true)
}

/// [`run_drag`] with an observer called after every iteration; returning
/// `false` stops the run with [`Error::Cancelled`].
pub fn run_drag_observed(
    z0: &Field,
    ops: &[RegionOp],
    config: &DragConfig,
    mut observer: impl FnMut(&Progress<'_>) -> bool,
) -> Result<DragResult> {
    config.validate()?;
    let extractor = config.extractor.build()?;
    let extractor = extractor.as_ref();
    let k_motion = config.k_motion;
    let mut state = DragState::new(
        z0,
        ops,
        extractor,
        k_motion,
        GradientMaskOptions { sweep: config.sweep },
    )?;
    let editable = state.gradient_mask().mask.clone();
    let tracker = ContentTracker::new(z0, ops, &editable, extractor)?;
    let total = config.total_iterations();
    let mut losses = Vec::with_capacity(total);
    let mut tracks: Vec<Vec<Point2>> = vec![Vec::with_capacity(total); ops.len()];

    for it in 0..total {
        let k = it.min(k_motion);
        state.k = k;
        let (mut loss, mut grad) = drag_loss(&state, ops, k, k_motion, extractor, config.loss_mode, config.align_source)?;
        if let BackgroundMode::Soft { weight } = config.background {
            loss += weight * soft_bg_loss(&state.z, state.z_orig(), &editable)?;
            grad.add_scaled(&soft_bg_grad(&state.z, state.z_orig(), &editable)?, weight)?;
        }
        if !loss.is_finite() || !grad.is_finite() {
            return Err(Error::NonFinite(format!("loss {loss} at iteration {it} (schedule step {k})")));
        }
        let lr = config.lr_at(it);
        let alpha = if config.normalize_gradient {
            let norm_region = match config.background {
                BackgroundMode::Hard => editable.clone(),
                BackgroundMode::Soft { .. } => Mask2D::full(editable.width(), editable.height()),
            };
            let m = editable_max_abs(&grad, &norm_region)?;
            if m > 0.0 {
                lr * config.lr_scale / m
            } else {
                0.0
            }
        } else {
            lr
        };
        state.z = match config.background {
            BackgroundMode::Hard => hard_step(&state, &grad, alpha)?,
            BackgroundMode::Soft { .. } => {
                let mut z = state.z.clone();
                z.add_scaled(&grad, -alpha)?;
                z
            }
        };
        if !state.z.is_finite() {
            return Err(Error::NonFinite(format!("latent after iteration {it} (step size {alpha:e})")));
        }
        losses.push(loss);
        let centroids = tracker.locate(&state.z, extractor)?;
        for (t, c) in tracks.iter_mut().zip(&centroids) {
            t.push(*c);
        }
        let keep_going = observer(&Progress {
            iteration: it + 1,
            total,
            loss,
            centroids,
            z: &state.z,
        });
        if !keep_going {
            return Err(Error::Cancelled { iterations: it + 1 });
        }
    }

    Ok(DragResult {
        final_z: state.z,
        loss_trajectory: losses,
        centroid_trajectory: tracks,
        iterations_run: total,
        gradient_mask: editable,
    })
}
