//! Adapter for point-pair benchmarks in the style of DragBench-DR.
//!
//! Input is a JSON object with equal-length `handle_points` and
//! `target_points` plus an optional `prompt`; regions come from masks. Each
//! region becomes a relocation whose target is its centroid moved by the
//! mean displacement of the pairs whose handles fall inside the mask.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BenchSample, PointOperations, RegionEntry};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Mask2D, Point2};
use crate::schedule::TaskKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPairs {
    pub handle_points: Vec<Point2>,
    pub target_points: Vec<Point2>,
    #[serde(default)]
    pub prompt: String,
}

pub fn parse_point_pairs(text: &str) -> Result<PointPairs> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let p: PointPairs = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if p.handle_points.len() != p.target_points.len() {
        return Err(Error::Schema {
            path: "target_points".into(),
            message: format!(
                "length {} does not match handle_points length {}",
                p.target_points.len(),
                p.handle_points.len()
            ),
        });
    }
    Ok(p)
}

pub fn from_point_pairs(pairs: &PointPairs, masks: &[Mask2D]) -> Result<BenchSample> {
    if masks.is_empty() {
        return Err(Error::InvalidArgument("at least one region mask is required".into()));
    }
    let mut regions = BTreeMap::new();
    for (i, m) in masks.iter().enumerate() {
        let b = centroid(m)?;
        let moves: Vec<Point2> = pairs
            .handle_points
            .iter()
            .zip(&pairs.target_points)
            .filter(|(h, _)| {
                let (x, y) = h.round_cell();
                m.get_i(x, y)
            })
            .map(|(&h, &t)| t - h)
            .collect();
        if moves.is_empty() {
            return Err(Error::InvalidArgument(format!("no handle point lies inside region mask {i}")));
        }
        let mean = moves.iter().fold(Point2::new(0.0, 0.0), |a, &d| a + d).scale(1.0 / moves.len() as f64);
        regions.insert(
            i as u32,
            RegionEntry {
                task: TaskKind::Relocation,
                begin: b,
                target: b + mean,
                anchor: None,
            },
        );
    }
    Ok(BenchSample {
        region_operations: regions,
        point_operations: PointOperations {
            begin_points: pairs.handle_points.clone(),
            target_points: pairs.target_points.clone(),
        },
        background_prompt: String::new(),
        editing_prompt: pairs.prompt.clone(),
    })
}
