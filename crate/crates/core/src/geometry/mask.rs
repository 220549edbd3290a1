use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};
use serde::{Deserialize, Serialize};

use super::Point2;
use crate::error::{Error, Result};

/// Binary region mask on a `width × height` grid.
///
/// JSON form is `{"width": w, "height": h, "rows": ["0110", ...]}`; PNG form is
/// single-channel 8-bit with 0 = unset and 255 = set (values ≥ 128 read as set).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MaskRows", into = "MaskRows")]
pub struct Mask2D {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct MaskRows {
    width: usize,
    height: usize,
    rows: Vec<String>,
}

impl TryFrom<MaskRows> for Mask2D {
    type Error = Error;

    fn try_from(raw: MaskRows) -> Result<Self> {
        if raw.rows.len() != raw.height {
            return Err(Error::dims(
                format!("{} rows", raw.height),
                format!("{} rows", raw.rows.len()),
            ));
        }
        let rows: Vec<&str> = raw.rows.iter().map(String::as_str).collect();
        let m = Mask2D::from_rows(&rows)?;
        if m.width != raw.width {
            return Err(Error::dims(format!("width {}", raw.width), format!("width {}", m.width)));
        }
        Ok(m)
    }
}

impl From<Mask2D> for MaskRows {
    fn from(m: Mask2D) -> Self {
        MaskRows {
            width: m.width,
            height: m.height,
            rows: m.to_rows(),
        }
    }
}

impl std::fmt::Debug for Mask2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mask2D {}x{} ({} set)", self.width, self.height, self.count())?;
        if self.width <= 80 && self.height <= 80 {
            for row in self.to_rows() {
                writeln!(f, "  {}", row.replace('0', ".").replace('1', "#"))?;
            }
        }
        Ok(())
    }
}

impl Mask2D {
    /// Empty (all-zero) canvas.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Mask2D {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        let mut m = Self::new(width, height);
        m.bits.fill(true);
        m
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.bits[y * width + x] = f(x, y);
            }
        }
        m
    }

    /// Parses rows of `0`/`1` characters (`.`/`#` also accepted).
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.chars().count()).unwrap_or(0);
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("mask rows must be non-empty".into()));
        }
        let mut bits = Vec::with_capacity(width * height);
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::dims(
                    format!("row {y} of width {width}"),
                    format!("width {}", row.chars().count()),
                ));
            }
            for ch in row.chars() {
                bits.push(match ch {
                    '1' | '#' => true,
                    '0' | '.' => false,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "mask row {y} has invalid character {other:?}"
                        )))
                    }
                });
            }
        }
        Ok(Mask2D {
            width,
            height,
            bits,
        })
    }

    pub fn to_rows(&self) -> Vec<String> {
        self.bits
            .chunks(self.width)
            .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect()
    }

    /// Axis-aligned filled rectangle with inclusive cell bounds, clipped to the grid.
    pub fn rect(width: usize, height: usize, x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self::from_fn(width, height, |x, y| {
            let (x, y) = (x as i64, y as i64);
            x >= x0 && x <= x1 && y >= y0 && y <= y1
        })
    }

    /// Cells whose centers lie within `radius` of `center`.
    pub fn disc(width: usize, height: usize, center: Point2, radius: f64) -> Self {
        let r2 = radius * radius;
        Self::from_fn(width, height, |x, y| {
            let dx = x as f64 - center.x;
            let dy = y as f64 - center.y;
            dx * dx + dy * dy <= r2
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-grid cells read as unset.
    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// Set cells as `(x, y)` in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn set_points(&self) -> Vec<Point2> {
        self.iter_set()
            .map(|(x, y)| Point2::new(x as f64, y as f64))
            .collect()
    }

    pub fn check_dims(&self, other: &Mask2D) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::dims(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ))
        }
    }

    pub fn union(&self, other: &Mask2D) -> Result<Mask2D> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Mask2D) -> Result<Mask2D> {
        self.zip(other, |a, b| a && b)
    }

    pub fn union_in_place(&mut self, other: &Mask2D) -> Result<()> {
        self.check_dims(other)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    pub fn complement(&self) -> Mask2D {
        Mask2D {
            bits: self.bits.iter().map(|b| !b).collect(),
            ..*self
        }
    }

    fn zip(&self, other: &Mask2D, f: impl Fn(bool, bool) -> bool) -> Result<Mask2D> {
        self.check_dims(other)?;
        Ok(Mask2D {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self
        })
    }

    /// `true` when every set cell of `other` is also set here.
    pub fn contains(&self, other: &Mask2D) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| a || !b))
    }

    /// Max-pool downsampling by `stride`: a coarse cell is set when any cell of
    /// its `stride × stride` block is set. Trailing cells that do not fill a
    /// whole block are dropped, matching the pooled feature grid.
    pub fn max_pool(&self, stride: usize) -> Result<Mask2D> {
        if stride == 0 || stride > self.width || stride > self.height {
            return Err(Error::InvalidArgument(format!(
                "stride {stride} does not fit a {}x{} mask",
                self.width, self.height
            )));
        }
        if stride == 1 {
            return Ok(self.clone());
        }
        let (w, h) = (self.width / stride, self.height / stride);
        Ok(Mask2D::from_fn(w, h, |cx, cy| {
            (0..stride).any(|dy| (0..stride).any(|dx| self.get(cx * stride + dx, cy * stride + dy)))
        }))
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([if self.get(x as usize, y as usize) { 255 } else { 0 }])
        })
    }

    pub fn from_gray_image(img: &GrayImage) -> Result<Mask2D> {
        if img.width() == 0 || img.height() == 0 {
            return Err(Error::InvalidArgument("mask image is empty".into()));
        }
        Ok(Mask2D::from_fn(img.width() as usize, img.height() as usize, |x, y| {
            img.get_pixel(x as u32, y as u32)[0] >= 128
        }))
    }

    pub fn to_png_bytes(&self) -> Vec<u8> {
        let mut out = Cursor::new(Vec::new());
        self.to_gray_image()
            .write_to(&mut out, ImageFormat::Png)
            .expect("in-memory PNG encoding cannot fail");
        out.into_inner()
    }

    pub fn from_png_bytes(bytes: &[u8]) -> Result<Mask2D> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| {
            Error::Image {
                path: "<memory>".into(),
                source: e,
            }
        })?;
        Mask2D::from_gray_image(&img.to_luma8())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_gray_image()
            .save_with_format(path, ImageFormat::Png)
            .map_err(|e| Error::Image {
                path: path.to_path_buf(),
                source: e,
            })
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Mask2D> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
        Mask2D::from_gray_image(&img.to_luma8())
    }
}
