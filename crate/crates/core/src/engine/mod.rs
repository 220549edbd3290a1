//! The region-level drag loop with the hard background constraint, and the
//! point-based baseline it is compared against.

mod config;
mod loss;
mod point;
mod run;

pub use config::{BackgroundMode, DragConfig, InversionKnobs, LossMode};
pub use loss::{drag_loss, editable_max_abs, hard_step, soft_bg_grad, soft_bg_loss, DragState};
pub use point::{point_ms_loss, point_track, run_point_baseline, PointConfig, PointOp, PointResult};
pub use run::{run_drag, run_drag_observed, ContentTracker, DragResult, Progress};
