//! Single-channel rasters and non-overlapping patch tiling.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A single-channel raster with nominal range `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DataLength { len: data.len(), width, height });
        }
        Ok(Image { width, height, data })
    }

    /// Builds an image and clamps every value into `[0, 1]`.
    pub fn new_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Result<Self> {
        for v in data.iter_mut() {
            *v = clamp_unit(*v);
        }
        Self::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Copies the `width` x `height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image> {
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidDimensions { width, height });
        }
        Image::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y))
    }

    /// Centered crop; returns a clone when the image already fits.
    pub fn center_crop(&self, width: usize, height: usize) -> Image {
        let w = width.min(self.width);
        let h = height.min(self.height);
        let x0 = (self.width - w) / 2;
        let y0 = (self.height - h) / 2;
        self.crop(x0, y0, w, h).expect("crop window lies inside the image")
    }

    pub fn transpose(&self) -> Image {
        Image::from_fn(self.height, self.width, |x, y| self.get(y, x)).expect("non-empty")
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Layout of a raster cut into non-overlapping patches (stride equals patch size).
///
/// The last row and column of patches extend past the raster; those samples are
/// filled by symmetric reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGrid {
    pub width: usize,
    pub height: usize,
    pub patch_width: usize,
    pub patch_height: usize,
    pub rows: usize,
    pub cols: usize,
    pub pad_right: usize,
    pub pad_bottom: usize,
}

/// Tiles a `width` x `height` raster with `n` x `n` patches.
pub fn tile(width: usize, height: usize, n: usize) -> Result<PatchGrid> {
    if n < 2 {
        return Err(Error::PatchTooSmall(n));
    }
    Ok(PatchGrid::with_patch(width, height, n, n))
}

impl PatchGrid {
    fn with_patch(width: usize, height: usize, patch_width: usize, patch_height: usize) -> PatchGrid {
        let cols = width.div_ceil(patch_width);
        let rows = height.div_ceil(patch_height);
        PatchGrid {
            width,
            height,
            patch_width,
            patch_height,
            rows,
            cols,
            pad_right: cols * patch_width - width,
            pad_bottom: rows * patch_height - height,
        }
    }

    /// Like [`tile`], but a patch never exceeds the raster: an axis shorter than
    /// `n` is covered by a single patch spanning the whole axis.
    pub fn clamped(width: usize, height: usize, n: usize) -> Result<PatchGrid> {
        if n < 2 {
            return Err(Error::PatchTooSmall(n));
        }
        Ok(PatchGrid::with_patch(width, height, n.min(width), n.min(height)))
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Patch origins in row-major patch order.
    pub fn origins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (c * self.patch_width, r * self.patch_height)))
    }

    /// Reads patch `index` (row-major) from `data`, reflecting past the edges.
    /// The result is row-major `patch_height` x `patch_width`.
    pub fn extract(&self, data: &[f64], index: usize) -> Vec<f64> {
        debug_assert_eq!(data.len(), self.width * self.height);
        let (x0, y0) = self.origin(index);
        let mut out = Vec::with_capacity(self.patch_width * self.patch_height);
        for dy in 0..self.patch_height {
            let y = reflect(y0 + dy, self.height);
            for dx in 0..self.patch_width {
                let x = reflect(x0 + dx, self.width);
                out.push(data[y * self.width + x]);
            }
        }
        out
    }

    /// Writes patch `index` into `data`, dropping the padded samples.
    pub fn write(&self, data: &mut [f64], index: usize, patch: &[f64]) {
        debug_assert_eq!(patch.len(), self.patch_width * self.patch_height);
        let (x0, y0) = self.origin(index);
        let h = self.patch_height.min(self.height - y0);
        let w = self.patch_width.min(self.width - x0);
        for dy in 0..h {
            let row = &patch[dy * self.patch_width..dy * self.patch_width + w];
            let start = (y0 + dy) * self.width + x0;
            data[start..start + w].copy_from_slice(row);
        }
    }

    fn origin(&self, index: usize) -> (usize, usize) {
        let r = index / self.cols;
        let c = index % self.cols;
        (c * self.patch_width, r * self.patch_height)
    }
}

/// Half-sample symmetric reflection of `i` into `0..len`.
#[inline]
pub(crate) fn reflect(i: usize, len: usize) -> usize {
    let period = 2 * len;
    let m = i % period;
    if m < len {
        m
    } else {
        period - 1 - m
    }
}

/// Signed variant of [`reflect`], used by convolutions.
#[inline]
pub(crate) fn reflect_signed(i: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let m = i.rem_euclid(period) as usize;
    if m < len {
        m
    } else {
        2 * len - 1 - m
    }
}
