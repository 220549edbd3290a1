//! Region-level drag editing on toy differentiable feature extractors.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, binary masks, affine transforms, warping, rotated
//!   rectangles and convex-polygon rasterization.
//! * [`schedule`]: region operations and their progressive motion schedules.
//! * [`region`]: adaptive per-region weights and the editable gradient mask.
//! * [`flow`]: rectified-flow and DDIM inversion/denoising steps.
//! * [`extractors`]: linear feature extractors with exact adjoints.
//! * [`engine`]: the region-level drag loop and the point-based baseline.
//! * [`metrics`]: image fidelity and mean-distance evaluation.
//! * [`benchio`]: region-drag benchmark records and dataset validation.
//! * [`suite`]: the synthetic drag suite and the granularity ablation.

pub mod benchio;
pub mod engine;
pub mod error;
pub mod extractors;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod metrics;
pub mod overlay;
pub mod region;
pub mod schedule;
pub mod suite;
pub mod synthetic;

pub use error::{Error, Result};
pub use field::{FeatureField, Field, LatentField};
pub use geometry::{AffineTransform, Mask2D, Point2, RotatedRect};
pub use schedule::{MotionParams, RegionOp, TaskKind};
