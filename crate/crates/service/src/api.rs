//! Request and response bodies shared by the HTTP routes and the CLI, and
//! the pure operations behind them.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use dragflow_core::engine::DragConfig;
use dragflow_core::extractors::ExtractorSpec;
use dragflow_core::metrics::{evaluate, EvalOptions, MetricReport};
use dragflow_core::overlay::render_ops_at;
use dragflow_core::schedule::{full_params, interpolate, target_mask_at};
use dragflow_core::{Error, Field, Mask2D, MotionParams, RegionOp};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A body that failed to deserialize, with the path of the offending field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Deserializes JSON, reporting errors as `path: message`. The root is `.`.
pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SchemaError {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

fn default_k_motion() -> usize {
    DragConfig::default().k_motion
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PreviewRequest {
    pub ops: Vec<RegionOp>,
    pub k: usize,
    #[serde(default = "default_k_motion")]
    pub k_motion: usize,
    /// Also return a rendered overlay PNG (base64).
    #[serde(default)]
    pub overlay: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreviewResponse {
    pub k: usize,
    pub k_motion: usize,
    /// Step-`k` target mask of each op, in op order.
    pub targets: Vec<Mask2D>,
    pub params: Vec<MotionParams>,
    pub overlay_png: Option<String>,
}

pub fn preview(req: &PreviewRequest) -> dragflow_core::Result<PreviewResponse> {
    if req.ops.is_empty() {
        return Err(Error::InvalidArgument("ops must not be empty".into()));
    }
    if req.k_motion == 0 {
        return Err(Error::InvalidArgument("k_motion must be at least 1".into()));
    }
    let mut targets = Vec::with_capacity(req.ops.len());
    let mut params = Vec::with_capacity(req.ops.len());
    for op in &req.ops {
        targets.push(target_mask_at(op, req.k, req.k_motion)?);
        params.push(interpolate(&full_params(op)?, req.k, req.k_motion)?);
    }
    let overlay_png = if req.overlay {
        let img = render_ops_at(None, &req.ops, req.k, req.k_motion)?;
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png)
            .map_err(|e| Error::InvalidArgument(format!("png encoding failed: {e}")))?;
        Some(STANDARD.encode(buf.into_inner()))
    } else {
        None
    };
    Ok(PreviewResponse {
        k: req.k,
        k_motion: req.k_motion,
        targets,
        params,
        overlay_png,
    })
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobRequest {
    pub z0: Field,
    pub ops: Vec<RegionOp>,
    #[serde(default)]
    pub config: DragConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRequest {
    pub original: Field,
    pub edited: Field,
    pub ops: Vec<RegionOp>,
    #[serde(default)]
    pub extractor: ExtractorSpec,
    #[serde(default)]
    pub options: EvalOptions,
}

pub fn eval(req: &EvalRequest) -> dragflow_core::Result<MetricReport> {
    let ex = req.extractor.build()?;
    evaluate(&req.original, &req.edited, &req.ops, ex.as_ref(), &req.options)
}
