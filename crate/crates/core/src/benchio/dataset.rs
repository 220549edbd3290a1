//! Dataset layout: one directory per sample holding `instructions.json`,
//! `image.png`, and one single-channel mask `<i>.png` per region index.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::{parse_sample, serialize_sample, BenchSample};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Mask2D};
use crate::schedule::{full_params, RegionOp};

/// Allowed distance, in pixels, between a mask's centroid and the declared
/// begin centroid.
pub const CENTROID_TOLERANCE: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub name: String,
    pub passed: bool,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub samples: Vec<SampleReport>,
    pub passed: usize,
    pub failed: usize,
}

impl DatasetReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            let _ = writeln!(out, "{} {}", if s.passed { "PASS" } else { "FAIL" }, s.name);
            for r in &s.reasons {
                let _ = writeln!(out, "    {r}");
            }
        }
        let _ = writeln!(out, "{} passed, {} failed", self.passed, self.failed);
        out
    }
}

/// Loads `<dir>/<i>.png` for every region of the sample.
pub fn load_masks(dir: &Path, sample: &BenchSample) -> Result<BTreeMap<u32, Mask2D>> {
    sample
        .region_operations
        .keys()
        .map(|&i| Ok((i, Mask2D::load_png(dir.join(format!("{i}.png")))?)))
        .collect()
}

/// Region ops built from loaded masks and the declared targets and anchors.
pub fn sample_region_ops(sample: &BenchSample, masks: &BTreeMap<u32, Mask2D>) -> Result<Vec<RegionOp>> {
    sample
        .region_operations
        .iter()
        .map(|(i, r)| {
            let mask = masks
                .get(i)
                .ok_or_else(|| Error::InvalidArgument(format!("no mask for region {i}")))?;
            RegionOp::new(r.task, mask.clone(), r.target, r.anchor)
        })
        .collect()
}

/// Checks one sample directory; problems become reasons, never panics or
/// early errors.
pub fn validate_sample_dir(dir: &Path) -> SampleReport {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let mut reasons = Vec::new();
    let sample = match fs::read_to_string(dir.join("instructions.json")) {
        Ok(text) => match parse_sample(&text) {
            Ok(s) => Some(s),
            Err(e) => {
                reasons.push(format!("instructions.json: {e}"));
                None
            }
        },
        Err(e) => {
            reasons.push(format!("instructions.json: unreadable: {e}"));
            None
        }
    };
    let dims = match image::image_dimensions(dir.join("image.png")) {
        Ok(d) => Some(d),
        Err(e) => {
            reasons.push(format!("image.png: unreadable: {e}"));
            None
        }
    };
    if let Some(sample) = &sample {
        let mut masks = BTreeMap::new();
        for (&i, r) in &sample.region_operations {
            let file = format!("{i}.png");
            let mask = match Mask2D::load_png(dir.join(&file)) {
                Ok(m) => m,
                Err(e) => {
                    reasons.push(format!("{file}: unreadable: {e}"));
                    continue;
                }
            };
            if let Some((w, h)) = dims {
                if mask.dims() != (w as usize, h as usize) {
                    reasons.push(format!(
                        "{file}: mask is {}x{} but image is {w}x{h}",
                        mask.width(),
                        mask.height()
                    ));
                }
            }
            match centroid(&mask) {
                Ok(c) => {
                    let d = c.distance(r.begin);
                    if d > CENTROID_TOLERANCE {
                        reasons.push(format!(
                            "region {i}: mask centroid {c} is {d:.2} px from declared begin centroid {} (tolerance {CENTROID_TOLERANCE})",
                            r.begin
                        ));
                    }
                }
                Err(_) => reasons.push(format!("{file}: mask is empty")),
            }
            masks.insert(i, mask);
        }
        if let Some((w, h)) = dims {
            let inside = |p: crate::geometry::Point2| p.x >= 0.0 && p.y >= 0.0 && p.x < w as f64 && p.y < h as f64;
            let po = &sample.point_operations;
            for (list, ps) in [("begin_points", &po.begin_points), ("target_points", &po.target_points)] {
                for (j, p) in ps.iter().enumerate() {
                    if !inside(*p) {
                        reasons.push(format!("point_operations.{list}.{j}: {p} lies outside the {w}x{h} image"));
                    }
                }
            }
        }
        if masks.len() == sample.region_operations.len() {
            match sample_region_ops(sample, &masks) {
                Ok(ops) => {
                    for (op, i) in ops.iter().zip(sample.region_operations.keys()) {
                        if let Err(e) = full_params(op) {
                            reasons.push(format!("region {i}: {e}"));
                        }
                    }
                }
                Err(e) => reasons.push(format!("region ops: {e}")),
            }
        }
    }
    SampleReport {
        name,
        passed: reasons.is_empty(),
        reasons,
    }
}

/// Validates every subdirectory of `dir` that holds an `instructions.json`,
/// in name order.
pub fn validate_dataset(dir: impl AsRef<Path>) -> Result<DatasetReport> {
    let dir = dir.as_ref();
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("instructions.json").exists())
        .collect();
    subdirs.sort();
    let samples: Vec<SampleReport> = subdirs.iter().map(|d| validate_sample_dir(d)).collect();
    let passed = samples.iter().filter(|s| s.passed).count();
    Ok(DatasetReport {
        failed: samples.len() - passed,
        passed,
        samples,
    })
}

/// Writes a sample directory with a synthetic gradient image and a disc mask
/// of `radius` pixels at each declared begin centroid.
pub fn write_synthetic_assets(dir: &Path, sample: &BenchSample, width: u32, height: u32, radius: f64) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("instructions.json");
    fs::write(&path, serialize_sample(sample)).map_err(|e| Error::io(&path, e))?;
    let img = RgbImage::from_fn(width, height, |x, y| {
        Rgb([(x * 255 / width.max(1)) as u8, (y * 255 / height.max(1)) as u8, 128])
    });
    let path = dir.join("image.png");
    img.save(&path).map_err(|e| Error::Image { path, source: e })?;
    for (i, r) in &sample.region_operations {
        Mask2D::disc(width as usize, height as usize, r.begin, radius).save_png(dir.join(format!("{i}.png")))?;
    }
    Ok(())
}
