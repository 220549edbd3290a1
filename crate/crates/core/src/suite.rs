//! Runs the synthetic drag suite and the granularity ablation: region-level
//! supervision against the point baseline on a fine and a compressed
//! extractor.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{run_drag, run_point_baseline, DragConfig, PointConfig, PointOp};
use crate::error::Result;
use crate::extractors::ExtractorSpec;
use crate::metrics::{md1, DEFAULT_PATCH_RADIUS};
use crate::synthetic::{content_centroid, drag_suite, drag_suite_on_lattice, DragCase};

/// Point-op patch and tracking radii used by the baseline in the suite.
pub const POINT_PATCH_RADIUS: usize = 1;
pub const POINT_TRACK_RADIUS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub name: String,
    /// Distance from the final content centroid to the op's destination.
    pub centroid_error: f64,
    /// MD1 of the unedited latent.
    pub md1_initial: f64,
    pub md1_final: f64,
    pub iterations: usize,
}

/// Region-mode run on one case, scored by content centroid and MD1 with
/// the given patch radius (in feature cells).
pub fn run_region_case(case: &DragCase, config: &DragConfig, md_patch_radius: usize) -> Result<CaseOutcome> {
    let ops = std::slice::from_ref(&case.op);
    let r = run_drag(&case.z0, ops, config)?;
    score(case, config, &r.final_z, &r.gradient_mask, md_patch_radius, r.iterations_run)
}

/// Point-baseline run with the same budget and extractor, handle at the
/// source centroid and target at its destination. The editable mask is the
/// region run's, so both methods see the same search area.
pub fn run_point_case(case: &DragCase, config: &DragConfig, md_patch_radius: usize) -> Result<CaseOutcome> {
    let ops = std::slice::from_ref(&case.op);
    let editable = crate::region::build_gradient_mask(
        ops,
        case.z0.width(),
        case.z0.height(),
        config.k_motion,
        crate::region::GradientMaskOptions { sweep: config.sweep },
    )?
    .mask;
    let pop = PointOp::new(case.op.begin(), case.op.destination()?, POINT_PATCH_RADIUS, POINT_TRACK_RADIUS)?;
    let r = run_point_baseline(&case.z0, &[pop], &editable, &PointConfig::matched(config))?;
    score(case, config, &r.final_z, &editable, md_patch_radius, r.iterations_run)
}

fn score(
    case: &DragCase,
    config: &DragConfig,
    final_z: &crate::Field,
    editable: &crate::Mask2D,
    md_patch_radius: usize,
    iterations: usize,
) -> Result<CaseOutcome> {
    let e = config.extractor.build()?;
    let fx = e.extract(&case.z0)?;
    let fz = e.extract(final_z)?;
    let search = e.feature_mask(editable)?;
    let dest = case.op.destination()?;
    Ok(CaseOutcome {
        name: case.name.clone(),
        centroid_error: content_centroid(final_z, &case.background)?.distance(dest),
        md1_initial: md1(&fx, &fx, &case.op, &search, e.stride(), md_patch_radius)?,
        md1_final: md1(&fx, &fz, &case.op, &search, e.stride(), md_patch_radius)?,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub extractor: ExtractorSpec,
    pub region: Vec<CaseOutcome>,
    pub point: Vec<CaseOutcome>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

impl AblationRow {
    pub fn mean_initial(&self) -> f64 {
        mean(self.region.iter().map(|c| c.md1_initial))
    }

    pub fn mean_region(&self) -> f64 {
        mean(self.region.iter().map(|c| c.md1_final))
    }

    pub fn mean_point(&self) -> f64 {
        mean(self.point.iter().map(|c| c.md1_final))
    }
}

/// One ablation row: every case under both methods.
pub fn ablation_row(label: &str, cases: &[DragCase], config: &DragConfig, md_patch_radius: usize) -> Result<AblationRow> {
    let mut region = Vec::with_capacity(cases.len());
    let mut point = Vec::with_capacity(cases.len());
    for case in cases {
        region.push(run_region_case(case, config, md_patch_radius)?);
        point.push(run_point_case(case, config, md_patch_radius)?);
    }
    Ok(AblationRow {
        label: label.into(),
        extractor: config.extractor.clone(),
        region,
        point,
    })
}

/// Pooling stride of the compressed extractor. Stride 8 leaves an 8×8 grid
/// on the 64×64 suite, too coarse for a patch match.
pub const POOLED_STRIDE: usize = 4;

/// The two standard rows: Identity on the plain suite with the default MD
/// patch, and 4× PooledBlur on the lattice-snapped suite with a one-cell
/// patch.
pub fn granularity_ablation() -> Result<Vec<AblationRow>> {
    let fine = DragConfig::default();
    let pooled = DragConfig {
        extractor: ExtractorSpec::PooledBlur {
            stride: POOLED_STRIDE,
            sigma: 1.0,
        },
        ..DragConfig::default()
    };
    Ok(vec![
        ablation_row("identity (fine)", &drag_suite()?, &fine, DEFAULT_PATCH_RADIUS)?,
        ablation_row("pooled_blur s=4 (compressed)", &drag_suite_on_lattice(POOLED_STRIDE)?, &pooled, 1)?,
    ])
}

pub fn render_ablation(rows: &[AblationRow]) -> String {
    let mut out = format!(
        "{:<30} {:>12} {:>12} {:>12}\n",
        "extractor", "initial MD1", "region MD1", "point MD1"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<30} {:>12.3} {:>12.3} {:>12.3}",
            r.label,
            r.mean_initial(),
            r.mean_region(),
            r.mean_point()
        );
    }
    out
}
