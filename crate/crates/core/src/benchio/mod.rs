//! Region-drag benchmark records: parsing with field-path errors, stable
//! serialization, dataset validation, and a point-pair adapter.
//!
//! A record looks like
//!
//! ```json
//! {
//!     "region_operations": {
//!         "0": {
//!             "task": "rotation",
//!             "centroids": [[337, 175], [379, 179]],
//!             "anchors": [351, 256]
//!         }
//!     },
//!     "point_operations": {
//!         "begin_points": [[326, 111], [342, 190]],
//!         "target_points": [[400, 116], [376, 198]]
//!     },
//!     "background_prompt": "...",
//!     "editing_prompt": "..."
//! }
//! ```
//!
//! `centroids` is `[begin centroid, target point]`. Longer lists are rejected.

mod dataset;
mod dragbench;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Value};

pub use dataset::{
    load_masks, sample_region_ops, validate_dataset, validate_sample_dir, write_synthetic_assets, DatasetReport,
    SampleReport, CENTROID_TOLERANCE,
};
pub use dragbench::{from_point_pairs, parse_point_pairs, PointPairs};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::schedule::TaskKind;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionEntry {
    pub task: TaskKind,
    pub begin: Point2,
    pub target: Point2,
    pub anchor: Option<Point2>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointOperations {
    pub begin_points: Vec<Point2>,
    pub target_points: Vec<Point2>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSample {
    /// Keyed by region index; the mask of region `i` is `<i>.png`.
    pub region_operations: BTreeMap<u32, RegionEntry>,
    pub point_operations: PointOperations,
    pub background_prompt: String,
    pub editing_prompt: String,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(join(path, key), "missing field"))
}

fn no_extra(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(join(path, k), "unknown field")),
        None => Ok(()),
    }
}

fn point(v: &Value, path: &str) -> Result<Point2> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an [x, y] pair"))?;
    if arr.len() != 2 {
        return Err(schema(path, format!("expected an [x, y] pair, got {} values", arr.len())));
    }
    let mut xy = [0.0; 2];
    for (i, c) in arr.iter().enumerate() {
        xy[i] = c
            .as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| schema(format!("{path}.{i}"), "expected a finite number"))?;
    }
    Ok(Point2::new(xy[0], xy[1]))
}

fn points(v: &Value, path: &str) -> Result<Vec<Point2>> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected a list of points"))?;
    arr.iter().enumerate().map(|(i, p)| point(p, &format!("{path}.{i}"))).collect()
}

fn string(v: &Value, path: &str) -> Result<String> {
    v.as_str().map(str::to_owned).ok_or_else(|| schema(path, "expected a string"))
}

fn region_entry(v: &Value, path: &str) -> Result<RegionEntry> {
    let obj = object(v, path)?;
    no_extra(obj, path, &["task", "centroids", "anchors"])?;
    let task_path = join(path, "task");
    let label = string(field(obj, path, "task")?, &task_path)?;
    let task: TaskKind = label
        .parse()
        .map_err(|_| schema(&task_path, format!("unknown task label \"{label}\"")))?;
    let cpath = join(path, "centroids");
    let centroids = points(field(obj, path, "centroids")?, &cpath)?;
    if centroids.len() != 2 {
        return Err(schema(
            cpath,
            format!("expected [begin, target], got {} points", centroids.len()),
        ));
    }
    let apath = join(path, "anchors");
    let anchor = match field(obj, path, "anchors")? {
        Value::Null => None,
        other => Some(point(other, &apath)?),
    };
    match (task.needs_anchor(), anchor.is_some()) {
        (true, false) => return Err(schema(apath, format!("{task} requires an anchor"))),
        (false, true) => return Err(schema(apath, format!("{task} must have a null anchor"))),
        _ => {}
    }
    Ok(RegionEntry {
        task,
        begin: centroids[0],
        target: centroids[1],
        anchor,
    })
}

/// Parses and validates one record. Every error names the offending path,
/// e.g. `region_operations.0.anchors`.
pub fn parse_sample(text: &str) -> Result<BenchSample> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| schema("", format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))?;
    let obj = object(&root, "")?;
    no_extra(
        obj,
        "",
        &["region_operations", "point_operations", "background_prompt", "editing_prompt"],
    )?;

    let regions = object(field(obj, "", "region_operations")?, "region_operations")?;
    if regions.is_empty() {
        return Err(schema("region_operations", "at least one region is required"));
    }
    let mut region_operations = BTreeMap::new();
    for (key, v) in regions {
        let path = format!("region_operations.{key}");
        let idx: u32 = key
            .parse()
            .ok()
            .filter(|i: &u32| i.to_string() == *key)
            .ok_or_else(|| schema(&path, "region keys must be non-negative integers"))?;
        region_operations.insert(idx, region_entry(v, &path)?);
    }

    let pp = "point_operations";
    let pobj = object(field(obj, "", pp)?, pp)?;
    no_extra(pobj, pp, &["begin_points", "target_points"])?;
    let begin_points = points(field(pobj, pp, "begin_points")?, "point_operations.begin_points")?;
    let target_points = points(field(pobj, pp, "target_points")?, "point_operations.target_points")?;
    if begin_points.len() != target_points.len() {
        return Err(schema(
            "point_operations.target_points",
            format!(
                "length {} does not match begin_points length {}",
                target_points.len(),
                begin_points.len()
            ),
        ));
    }

    Ok(BenchSample {
        region_operations,
        point_operations: PointOperations {
            begin_points,
            target_points,
        },
        background_prompt: string(field(obj, "", "background_prompt")?, "background_prompt")?,
        editing_prompt: string(field(obj, "", "editing_prompt")?, "editing_prompt")?,
    })
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        serde_json::Number::from_f64(v).map(|n| n.to_string()).unwrap_or_else(|| "null".into())
    }
}

fn pt(p: Point2) -> String {
    format!("[{}, {}]", num(p.x), num(p.y))
}

fn pts(ps: &[Point2]) -> String {
    let inner: Vec<String> = ps.iter().map(|&p| pt(p)).collect();
    format!("[{}]", inner.join(", "))
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Stable text form: fixed field order, four-space indent, one point list
/// per line, integral coordinates written as integers.
pub fn serialize_sample(s: &BenchSample) -> String {
    let mut out = String::from("{\n    \"region_operations\": {\n");
    let n = s.region_operations.len();
    for (i, (idx, r)) in s.region_operations.iter().enumerate() {
        let anchor = r.anchor.map(pt).unwrap_or_else(|| "null".into());
        let _ = write!(
            out,
            "        \"{idx}\": {{\n            \"task\": \"{}\",\n            \"centroids\": {},\n            \"anchors\": {}\n        }}{}\n",
            r.task,
            pts(&[r.begin, r.target]),
            anchor,
            if i + 1 < n { "," } else { "" }
        );
    }
    let _ = write!(
        out,
        "    }},\n    \"point_operations\": {{\n        \"begin_points\": {},\n        \"target_points\": {}\n    }},\n    \"background_prompt\": {},\n    \"editing_prompt\": {}\n}}\n",
        pts(&s.point_operations.begin_points),
        pts(&s.point_operations.target_points),
        quoted(&s.background_prompt),
        quoted(&s.editing_prompt)
    );
    out
}

#[cfg(test)]
mod tests;
