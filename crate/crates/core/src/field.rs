//! Dense `C×H×W` real grids used for latents and extracted features.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Mask2D;

/// A `channels × height × width` grid of reals, stored channel-major then
/// row-major (`data[(c * height + y) * width + x]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField")]
pub struct Field {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

/// Latent grid `z` being optimized.
pub type LatentField = Field;
/// Output of a feature extractor.
pub type FeatureField = Field;

#[derive(Deserialize)]
struct RawField {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl TryFrom<RawField> for Field {
    type Error = Error;

    fn try_from(raw: RawField) -> Result<Self> {
        Field::from_vec(raw.channels, raw.height, raw.width, raw.data)
    }
}

const DFLT_MAGIC: &[u8; 4] = b"DFLT";
const DFLT_HEADER_LEN: usize = 16;

impl Field {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Self {
        assert!(channels > 0 && height > 0 && width > 0, "field dimensions must be positive");
        Field {
            channels,
            height,
            width,
            data: vec![value; channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "field dimensions must be positive, got {channels}x{height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::dims(channels * height * width, data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field element {i}")));
        }
        Ok(Field {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut out = Self::zeros(channels, height, width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    out.data[(c * height + y) * width + x] = f(c, y, x);
                }
            }
        }
        out
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(channels, height, width)`.
    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        let i = self.index(c, y, x);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Plane of channel `c`.
    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.shape() == other.shape()
    }

    pub fn check_shape(&self, other: &Field) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::dims(self.shape_string(), other.shape_string()))
        }
    }

    pub fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.channels, self.height, self.width)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_shape(other)?;
        Ok(Field {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self
        })
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Field, scale: f64) -> Result<()> {
        self.check_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_mask(&self, mask: &Mask2D) -> Result<()> {
        if mask.dims() != (self.width, self.height) {
            return Err(Error::dims(
                format!("{}x{} mask", self.width, self.height),
                format!("{}x{} mask", mask.width(), mask.height()),
            ));
        }
        Ok(())
    }

    /// `M ⊙ self`, with the mask broadcast over channels.
    pub fn masked(&self, mask: &Mask2D) -> Result<Field> {
        self.check_mask(mask)?;
        let plane = self.height * self.width;
        let bits = mask.bits();
        Ok(Field {
            data: self
                .data
                .iter()
                .enumerate()
                .map(|(i, &v)| if bits[i % plane] { v } else { 0.0 })
                .collect(),
            ..*self
        })
    }

    /// `mask ⊙ self + (1 − mask) ⊙ other`.
    pub fn select(&self, mask: &Mask2D, other: &Field) -> Result<Field> {
        self.check_mask(mask)?;
        self.check_shape(other)?;
        let plane = self.height * self.width;
        let bits = mask.bits();
        Ok(Field {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .enumerate()
                .map(|(i, (&a, &b))| if bits[i % plane] { a } else { b })
                .collect(),
            ..*self
        })
    }

    /// Channel-mean plane, `height × width`.
    pub fn channel_mean(&self) -> Vec<f64> {
        let n = self.height * self.width;
        let mut out = vec![0.0; n];
        for c in 0..self.channels {
            for (o, v) in out.iter_mut().zip(self.channel(c)) {
                *o += v;
            }
        }
        let inv = 1.0 / self.channels as f64;
        out.iter_mut().for_each(|v| *v *= inv);
        out
    }

    /// Encodes the `DFLT` binary layout: magic, `u32` C/H/W little-endian,
    /// then row-major little-endian `f32` values.
    pub fn to_dflt_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(DFLT_HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(DFLT_MAGIC);
        for d in [self.channels, self.height, self.width] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    pub fn from_dflt_bytes(bytes: &[u8]) -> Result<Field> {
        if bytes.len() < DFLT_HEADER_LEN {
            return Err(Error::BadLatentFile(format!(
                "{} bytes is shorter than the {DFLT_HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if &bytes[..4] != DFLT_MAGIC {
            return Err(Error::BadLatentFile("magic is not \"DFLT\"".into()));
        }
        let dim = |i: usize| {
            let mut b = [0u8; 4];
            b.copy_from_slice(&bytes[4 + 4 * i..8 + 4 * i]);
            u32::from_le_bytes(b) as usize
        };
        let (c, h, w) = (dim(0), dim(1), dim(2));
        let n = c
            .checked_mul(h)
            .and_then(|v| v.checked_mul(w))
            .ok_or_else(|| Error::BadLatentFile("dimensions overflow".into()))?;
        let body = &bytes[DFLT_HEADER_LEN..];
        if body.len() != 4 * n {
            return Err(Error::BadLatentFile(format!(
                "payload is {} bytes, header {c}x{h}x{w} needs {}",
                body.len(),
                4 * n
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|ch| f32::from_le_bytes([ch[0], ch[1], ch[2], ch[3]]) as f64)
            .collect();
        Field::from_vec(c, h, w, data).map_err(|e| Error::BadLatentFile(e.to_string()))
    }

    pub fn write_dflt(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_dflt_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_dflt(path: impl AsRef<Path>) -> Result<Field> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Field::from_dflt_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dflt_header_layout() {
        let f = Field::from_fn(2, 3, 4, |c, y, x| (c * 100 + y * 10 + x) as f64);
        let bytes = f.to_dflt_bytes();
        assert_eq!(&bytes[..4], b"DFLT");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &3u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &4u32.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 4 * 24);
        // element (c=1, y=2, x=3) is last
        assert_eq!(&bytes[bytes.len() - 4..], &123f32.to_le_bytes());
        assert_eq!(Field::from_dflt_bytes(&bytes).unwrap(), f);
    }

    #[test]
    fn dflt_rejects_truncated_payload() {
        let f = Field::zeros(1, 2, 2);
        let mut bytes = f.to_dflt_bytes();
        bytes.pop();
        assert!(matches!(Field::from_dflt_bytes(&bytes), Err(Error::BadLatentFile(_))));
        assert!(Field::from_dflt_bytes(b"NOPE\0\0\0\0").is_err());
    }

    #[test]
    fn from_vec_rejects_nan() {
        assert!(matches!(
            Field::from_vec(1, 1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn json_shape_is_validated() {
        let bad = r#"{"channels":1,"height":2,"width":2,"data":[1,2,3]}"#;
        assert!(serde_json::from_str::<Field>(bad).is_err());
        let good = r#"{"channels":1,"height":1,"width":2,"data":[1,2]}"#;
        let f: Field = serde_json::from_str(good).unwrap();
        assert_eq!(f.get(0, 0, 1), 2.0);
    }
}
