//! Point-based baseline: patch motion supervision plus nearest-neighbour
//! point tracking, run on the same extractors and budget as region mode.

use serde::{Deserialize, Serialize};

use super::config::{DragConfig, LossMode};
use super::loss::editable_max_abs;
use crate::error::{Error, Result};
use crate::extractors::{ExtractorSpec, FeatureExtractor};
use crate::field::Field;
use crate::geometry::{Mask2D, Point2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointOp {
    pub handle: Point2,
    pub target: Point2,
    /// Supervision patch radius `r`, in feature cells.
    pub patch_radius: usize,
    /// Tracking window radius `r2`, in feature cells.
    pub track_radius: usize,
}

impl PointOp {
    pub fn new(handle: Point2, target: Point2, patch_radius: usize, track_radius: usize) -> Result<Self> {
        if patch_radius == 0 || track_radius == 0 {
            return Err(Error::InvalidArgument("point op radii must be at least 1".into()));
        }
        if !handle.is_finite() || !target.is_finite() {
            return Err(Error::InvalidArgument("point op coordinates must be finite".into()));
        }
        Ok(PointOp {
            handle,
            target,
            patch_radius,
            track_radius,
        })
    }
}

type Cell = (usize, usize);

fn patch_inside(c: Cell, r: usize, w: usize, h: usize) -> bool {
    c.0 >= r && c.1 >= r && c.0 + r < w && c.1 + r < h
}

fn out_of_bounds(c: Cell, r: usize, w: usize, h: usize) -> Error {
    Error::PatchOutOfBounds {
        x: c.0 as i64,
        y: c.1 as i64,
        radius: r,
        width: w,
        height: h,
    }
}

/// Motion-supervision loss `β·L_align + (1 − β)·L_smooth + λ·L_mask`.
///
/// `L_align` compares the patch around each `location` in `F(z)` with the
/// stop-gradient patch around the matching `start` in `base`, offset by
/// offset. `L_smooth` compares features with their own stop-gradient copy,
/// so its value and gradient are identically zero; it is kept for the
/// formula's shape. `L_mask` is `||(z − sg[z_orig]) ⊙ (1 − B)||₁`.
#[allow(clippy::too_many_arguments)]
pub fn point_ms_loss(
    z: &Field,
    z_orig: &Field,
    base: &Field,
    extractor: &dyn FeatureExtractor,
    locations: &[Cell],
    starts: &[Cell],
    radii: &[usize],
    beta: f64,
    lambda: f64,
    editable: &Mask2D,
) -> Result<(f64, Field)> {
    if locations.len() != starts.len() || starts.len() != radii.len() {
        return Err(Error::InvalidArgument("point lists differ in length".into()));
    }
    let feats = extractor.extract(z)?;
    feats.check_shape(base)?;
    let (c, h, w) = feats.shape();
    let mut gfeat = Field::zeros(c, h, w);
    let mut align = 0.0;
    for ((&q, &p), &r) in locations.iter().zip(starts).zip(radii) {
        for &cell in &[q, p] {
            if !patch_inside(cell, r, w, h) {
                return Err(out_of_bounds(cell, r, w, h));
            }
        }
        for ch in 0..c {
            for dy in 0..=2 * r {
                for dx in 0..=2 * r {
                    let (qx, qy) = (q.0 + dx - r, q.1 + dy - r);
                    let diff = feats.get(ch, qy, qx) - base.get(ch, p.1 + dy - r, p.0 + dx - r);
                    let (v, d) = LossMode::L1.eval(diff);
                    align += v;
                    let i = gfeat.index(ch, qy, qx);
                    gfeat.data_mut()[i] += beta * d;
                }
            }
        }
    }
    let smooth = 0.0;
    let mut grad = extractor.adjoint(&gfeat, z)?;
    let mut mask_term = 0.0;
    if lambda != 0.0 {
        let bg = editable.complement();
        let diff = z.zip_map(z_orig, |a, b| a - b)?.masked(&bg)?;
        mask_term = diff.data().iter().map(|v| v.abs()).sum();
        grad.add_scaled(&diff.map(|v| LossMode::L1.eval(v).1), lambda)?;
    }
    Ok((beta * align + (1.0 - beta) * smooth + lambda * mask_term, grad))
}

/// Nearest-neighbour tracking: the cell in the square window of radius `r2`
/// around `current` (clipped to the grid) whose feature vector is closest
/// in L1 to `base` at `start`. Ties go to the cell nearest `current`, then
/// to the first in row-major order.
pub fn point_track(now: &Field, base: &Field, start: Cell, current: Cell, r2: usize) -> Result<Cell> {
    now.check_shape(base)?;
    let (c, h, w) = now.shape();
    let x0 = current.0.saturating_sub(r2);
    let y0 = current.1.saturating_sub(r2);
    let x1 = (current.0 + r2).min(w - 1);
    let y1 = (current.1 + r2).min(h - 1);
    let mut best = current;
    let mut best_cost = f64::INFINITY;
    let mut best_d2 = f64::INFINITY;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let cost: f64 = (0..c).map(|ch| (now.get(ch, y, x) - base.get(ch, start.1, start.0)).abs()).sum();
            let d2 = (x as f64 - current.0 as f64).powi(2) + (y as f64 - current.1 as f64).powi(2);
            if cost < best_cost || (cost == best_cost && d2 < best_d2) {
                best = (x, y);
                best_cost = cost;
                best_d2 = d2;
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointConfig {
    pub iterations: usize,
    /// Iterations run at `lr_phase1` before switching to `lr_phase2`.
    pub phase1_iterations: usize,
    pub lr_phase1: f64,
    pub lr_phase2: f64,
    pub normalize_gradient: bool,
    pub lr_scale: f64,
    pub beta: f64,
    pub lambda: f64,
    /// Motion-supervision steps between tracking updates.
    pub steps_per_track: usize,
    /// Reset `(1 − B)` after each step, as region mode does.
    pub hard_background: bool,
    pub extractor: ExtractorSpec,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig::matched(&DragConfig::default())
    }
}

impl PointConfig {
    /// Same iteration budget, learning rates and extractor as a region run.
    pub fn matched(c: &DragConfig) -> Self {
        PointConfig {
            iterations: c.total_iterations(),
            phase1_iterations: c.k_motion,
            lr_phase1: c.lr_phase1,
            lr_phase2: c.lr_phase2,
            normalize_gradient: c.normalize_gradient,
            lr_scale: c.lr_scale,
            beta: 1.0,
            lambda: 0.1,
            steps_per_track: 1,
            hard_background: false,
            extractor: c.extractor.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub final_z: Field,
    pub loss_trajectory: Vec<f64>,
    /// Per op, tracked handle position (latent coordinates) after each iteration.
    pub handle_trajectory: Vec<Vec<Point2>>,
    pub iterations_run: usize,
    /// All handles reached their targets before the budget ran out.
    pub converged: bool,
}

fn to_cell(p: Point2, w: usize, h: usize) -> Cell {
    let (x, y) = p.round_cell();
    (x.clamp(0, w as i64 - 1) as usize, y.clamp(0, h as i64 - 1) as usize)
}

/// One unit step from `h` toward `t` on the feature grid, or `h` itself once
/// within half a cell.
fn stepped(h: Cell, t: Point2, w: usize, gh: usize) -> Cell {
    let hp = Point2::new(h.0 as f64, h.1 as f64);
    let d = t - hp;
    let n = d.norm();
    if n < 0.5 {
        return h;
    }
    to_cell(hp + d.scale(n.min(1.0) / n), w, gh)
}

pub fn run_point_baseline(z0: &Field, ops: &[PointOp], editable: &Mask2D, config: &PointConfig) -> Result<PointResult> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("at least one point op is required".into()));
    }
    if config.steps_per_track == 0 {
        return Err(Error::InvalidArgument("steps_per_track must be at least 1".into()));
    }
    let extractor = config.extractor.build()?;
    let extractor = extractor.as_ref();
    let base = extractor.extract(z0)?;
    let (_, fh, fw) = base.shape();
    let starts: Vec<Cell> = ops.iter().map(|o| to_cell(extractor.feature_point(o.handle), fw, fh)).collect();
    let targets: Vec<Point2> = ops.iter().map(|o| extractor.feature_point(o.target)).collect();
    let radii: Vec<usize> = ops.iter().map(|o| o.patch_radius).collect();
    let mut handles = starts.clone();
    let mut z = z0.clone();
    let mut losses = Vec::new();
    let mut tracks: Vec<Vec<Point2>> = vec![Vec::new(); ops.len()];
    let norm_region = if config.hard_background {
        editable.clone()
    } else {
        Mask2D::full(editable.width(), editable.height())
    };
    let mut converged = false;
    let mut it = 0;
    while it < config.iterations {
        let done = handles
            .iter()
            .zip(&targets)
            .all(|(h, t)| Point2::new(h.0 as f64, h.1 as f64).distance(*t) < 0.5);
        if done {
            converged = true;
            break;
        }
        let locations: Vec<Cell> = handles.iter().zip(&targets).map(|(&h, &t)| stepped(h, t, fw, fh)).collect();
        for _ in 0..config.steps_per_track {
            if it >= config.iterations {
                break;
            }
            let (loss, grad) = point_ms_loss(
                &z,
                z0,
                &base,
                extractor,
                &locations,
                &starts,
                &radii,
                config.beta,
                config.lambda,
                editable,
            )?;
            if !loss.is_finite() || !grad.is_finite() {
                return Err(Error::NonFinite(format!("point loss {loss} at iteration {it}")));
            }
            let lr = if it < config.phase1_iterations {
                config.lr_phase1
            } else {
                config.lr_phase2
            };
            let alpha = if config.normalize_gradient {
                let m = editable_max_abs(&grad, &norm_region)?;
                if m > 0.0 {
                    lr * config.lr_scale / m
                } else {
                    0.0
                }
            } else {
                lr
            };
            z.add_scaled(&grad, -alpha)?;
            if config.hard_background {
                z = z.select(editable, z0)?;
            }
            losses.push(loss);
            it += 1;
        }
        let now = extractor.extract(&z)?;
        for (i, op) in ops.iter().enumerate() {
            handles[i] = point_track(&now, &base, starts[i], handles[i], op.track_radius)?;
        }
        for (t, h) in tracks.iter_mut().zip(&handles) {
            let p = extractor.latent_point(Point2::new(h.0 as f64, h.1 as f64));
            while t.len() < losses.len() {
                t.push(p);
            }
        }
    }
    Ok(PointResult {
        final_z: z,
        iterations_run: losses.len(),
        loss_trajectory: losses,
        handle_trajectory: tracks,
        converged,
    })
}
