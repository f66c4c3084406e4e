//! Separable 2D discrete wavelet transform.
//!
//! Each level filters the rows, then the columns, of the current low band and
//! downsamples by two. An odd-length axis is first extended by one reflected
//! sample, so every band at a level has `ceil(len / 2)` samples per axis; the
//! filters wrap around the (even) extended signal. With orthonormal filters the
//! analysis operator is orthogonal and the synthesis operator is its exact
//! transpose, which gives perfect reconstruction after cropping.
//!
//! Orientation labels: the `Horizontal` band is high-pass along x (it responds
//! to vertical stripes), `Vertical` is high-pass along y, `Diagonal` along both.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math;

/// Coefficient raster with unbounded range, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Band {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DataLength { len: data.len(), width, height });
        }
        Ok(Band { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Band { width, height, data: vec![0.0; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Band { width, height, data }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn transpose(&self) -> Band {
        Band::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Elementwise combination of two equally sized bands.
    pub fn zip_map(&self, other: &Band, f: impl Fn(f64, f64) -> f64) -> Result<Band> {
        if self.dims() != other.dims() {
            return Err(Error::mismatch(self.dims(), other.dims()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Band { width: self.width, height: self.height, data })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Band {
        Band { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl From<&Image> for Band {
    fn from(img: &Image) -> Band {
        Band { width: img.width(), height: img.height(), data: img.as_slice().to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::Horizontal, Orientation::Vertical, Orientation::Diagonal];

    fn index(self) -> usize {
        match self {
            Orientation::Horizontal => 0,
            Orientation::Vertical => 1,
            Orientation::Diagonal => 2,
        }
    }
}

/// Multi-level decomposition: one low band plus three detail bands per level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    /// Signal size entering each level; `sizes[0]` is the image size.
    sizes: Vec<(usize, usize)>,
    low: Band,
    /// `highs[i]` holds level `i + 1` in [`Orientation::ALL`] order.
    highs: Vec<[Band; 3]>,
}

impl WaveletPyramid {
    /// Assembles a pyramid from parts, checking the band shapes.
    pub fn from_parts(sizes: Vec<(usize, usize)>, low: Band, highs: Vec<[Band; 3]>) -> Result<Self> {
        let pyr = WaveletPyramid { sizes, low, highs };
        pyr.check_shape()?;
        Ok(pyr)
    }

    pub fn levels(&self) -> usize {
        self.highs.len()
    }

    pub fn low(&self) -> &Band {
        &self.low
    }

    pub fn low_mut(&mut self) -> &mut Band {
        &mut self.low
    }

    /// Detail band at `level` (1-based, 1 is the finest).
    pub fn high(&self, level: usize, o: Orientation) -> &Band {
        &self.highs[level - 1][o.index()]
    }

    pub fn high_mut(&mut self, level: usize, o: Orientation) -> &mut Band {
        &mut self.highs[level - 1][o.index()]
    }

    pub fn image_size(&self) -> (usize, usize) {
        self.sizes[0]
    }

    pub fn sizes(&self) -> &[(usize, usize)] {
        &self.sizes
    }

    /// All bands, low band first, then levels from finest to coarsest.
    pub fn bands(&self) -> impl Iterator<Item = &Band> {
        core::iter::once(&self.low).chain(self.highs.iter().flat_map(|l| l.iter()))
    }

    pub fn band_count(&self) -> usize {
        1 + 3 * self.highs.len()
    }

    /// Applies `f` to every pair of corresponding bands.
    pub fn zip_map(&self, other: &WaveletPyramid, f: impl Fn(f64, f64) -> f64) -> Result<WaveletPyramid> {
        if self.sizes != other.sizes {
            return Err(Error::mismatch(self.image_size(), other.image_size()));
        }
        let low = self.low.zip_map(&other.low, &f)?;
        let mut highs = Vec::with_capacity(self.highs.len());
        for (a, b) in self.highs.iter().zip(&other.highs) {
            highs.push([a[0].zip_map(&b[0], &f)?, a[1].zip_map(&b[1], &f)?, a[2].zip_map(&b[2], &f)?]);
        }
        Ok(WaveletPyramid { sizes: self.sizes.clone(), low, highs })
    }

    fn check_shape(&self) -> Result<()> {
        let (w, h) = self.sizes.first().copied().unwrap_or((0, 0));
        let bad = || Error::PyramidShape { width: w, height: h };
        if self.highs.is_empty() || self.sizes.len() != self.highs.len() {
            return Err(bad());
        }
        for (i, &(sw, sh)) in self.sizes.iter().enumerate() {
            let half = (sw.div_ceil(2), sh.div_ceil(2));
            if self.highs[i].iter().any(|b| b.dims() != half) {
                return Err(bad());
            }
            let next = self.sizes.get(i + 1).copied().unwrap_or(self.low.dims());
            if next != half {
                return Err(bad());
            }
        }
        Ok(())
    }
}

/// An orthonormal two-channel filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis {
    pub name: String,
    pub analysis_lowpass: Vec<f64>,
    pub analysis_highpass: Vec<f64>,
    pub synthesis_lowpass: Vec<f64>,
    pub synthesis_highpass: Vec<f64>,
}

impl WaveletBasis {
    /// Builds the full filter bank from an orthonormal scaling filter.
    pub fn from_scaling_filter(name: &str, h: &[f64]) -> Self {
        let len = h.len();
        let g: Vec<f64> = (0..len).map(|m| if m % 2 == 0 { h[len - 1 - m] } else { -h[len - 1 - m] }).collect();
        WaveletBasis {
            name: name.into(),
            synthesis_lowpass: h.iter().rev().copied().collect(),
            synthesis_highpass: g.iter().rev().copied().collect(),
            analysis_lowpass: h.to_vec(),
            analysis_highpass: g,
        }
    }

    pub fn haar() -> Self {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        Self::from_scaling_filter("haar", &[r, r])
    }

    /// Daubechies wavelet with two vanishing moments (4 taps).
    pub fn db2() -> Self {
        let s3 = math::sqrt(3.0);
        let d = 4.0 * core::f64::consts::SQRT_2;
        Self::from_scaling_filter("db2", &[(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d])
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" | "db1" => Ok(Self::haar()),
            "db2" => Ok(Self::db2()),
            other => Err(Error::UnknownBasis(other.into())),
        }
    }
}

impl Default for WaveletBasis {
    fn default() -> Self {
        Self::db2()
    }
}

fn analyze_1d(x: &[f64], basis: &WaveletBasis, lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    let m = n + (n & 1);
    let at = |i: usize| -> f64 {
        let i = i % m;
        // odd lengths get one reflected sample appended
        if i < n {
            x[i]
        } else {
            x[n - 1]
        }
    };
    for k in 0..m / 2 {
        let mut l = 0.0;
        let mut h = 0.0;
        for (t, (&a, &b)) in basis.analysis_lowpass.iter().zip(&basis.analysis_highpass).enumerate() {
            let v = at(2 * k + t);
            l += a * v;
            h += b * v;
        }
        lo[k] = l;
        hi[k] = h;
    }
}

fn synthesize_1d(lo: &[f64], hi: &[f64], basis: &WaveletBasis, out: &mut [f64]) {
    let n = out.len();
    let m = 2 * lo.len();
    let len = basis.synthesis_lowpass.len();
    let mut ext = vec![0.0; m];
    for k in 0..lo.len() {
        for (t, (&a, &b)) in basis.synthesis_lowpass.iter().zip(&basis.synthesis_highpass).enumerate() {
            ext[(2 * k + len - 1 - t) % m] += a * lo[k] + b * hi[k];
        }
    }
    out.copy_from_slice(&ext[..n]);
}

struct Split {
    ll: Band,
    h: Band,
    v: Band,
    d: Band,
}

fn analyze_2d(src: &Band, basis: &WaveletBasis) -> Split {
    let (w, h) = src.dims();
    let hw = w.div_ceil(2);
    let hh = h.div_ceil(2);

    // rows: along x
    let mut row_lo = Band::zeros(hw, h);
    let mut row_hi = Band::zeros(hw, h);
    for y in 0..h {
        let row = &src.data[y * w..(y + 1) * w];
        analyze_1d(
            row,
            basis,
            &mut row_lo.data[y * hw..(y + 1) * hw],
            &mut row_hi.data[y * hw..(y + 1) * hw],
        );
    }

    // columns: along y
    let mut out = [Band::zeros(hw, hh), Band::zeros(hw, hh), Band::zeros(hw, hh), Band::zeros(hw, hh)];
    let mut col = vec![0.0; h];
    let mut lo = vec![0.0; hh];
    let mut hi = vec![0.0; hh];
    for (src_band, (dst_lo, dst_hi)) in [(&row_lo, (0, 2)), (&row_hi, (1, 3))] {
        for x in 0..hw {
            for (y, c) in col.iter_mut().enumerate().take(h) {
                *c = src_band.data[y * hw + x];
            }
            analyze_1d(&col, basis, &mut lo, &mut hi);
            for y in 0..hh {
                out[dst_lo].data[y * hw + x] = lo[y];
                out[dst_hi].data[y * hw + x] = hi[y];
            }
        }
    }
    let [ll, hx, hy, hd] = out;
    Split { ll, h: hx, v: hy, d: hd }
}

fn synthesize_2d(split: &Split, basis: &WaveletBasis, w: usize, h: usize) -> Band {
    let (hw, hh) = split.ll.dims();
    let mut row_lo = Band::zeros(hw, h);
    let mut row_hi = Band::zeros(hw, h);
    let mut lo = vec![0.0; hh];
    let mut hi = vec![0.0; hh];
    let mut col = vec![0.0; h];
    for (lo_band, hi_band, dst) in [(&split.ll, &split.v, &mut row_lo), (&split.h, &split.d, &mut row_hi)] {
        for x in 0..hw {
            for y in 0..hh {
                lo[y] = lo_band.data[y * hw + x];
                hi[y] = hi_band.data[y * hw + x];
            }
            synthesize_1d(&lo, &hi, basis, &mut col);
            for (y, &c) in col.iter().enumerate().take(h) {
                dst.data[y * hw + x] = c;
            }
        }
    }
    let mut out = Band::zeros(w, h);
    for y in 0..h {
        synthesize_1d(
            &row_lo.data[y * hw..(y + 1) * hw],
            &row_hi.data[y * hw..(y + 1) * hw],
            basis,
            &mut out.data[y * w..(y + 1) * w],
        );
    }
    out
}

/// Forward transform of an image.
pub fn dwt2(img: &Image, levels: usize, basis: &WaveletBasis) -> Result<WaveletPyramid> {
    dwt2_band(&Band::from(img), levels, basis)
}

/// Forward transform of an arbitrary coefficient raster.
pub fn dwt2_band(src: &Band, levels: usize, basis: &WaveletBasis) -> Result<WaveletPyramid> {
    if levels == 0 {
        return Err(Error::ZeroLevels);
    }
    let (w, h) = src.dims();
    let min = 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX);
    if w < min || h < min {
        return Err(Error::TooSmallForLevels { width: w, height: h, levels });
    }
    let mut sizes = Vec::with_capacity(levels);
    let mut highs = Vec::with_capacity(levels);
    let mut current = src.clone();
    for _ in 0..levels {
        sizes.push(current.dims());
        let split = analyze_2d(&current, basis);
        highs.push([split.h, split.v, split.d]);
        current = split.ll;
    }
    Ok(WaveletPyramid { sizes, low: current, highs })
}

/// Inverse transform. The output is cropped to `out_width` x `out_height` and
/// is not clamped.
pub fn idwt2(pyr: &WaveletPyramid, basis: &WaveletBasis, out_width: usize, out_height: usize) -> Result<Image> {
    let band = idwt2_band(pyr, basis, out_width, out_height)?;
    Image::new(band.width, band.height, band.data)
}

pub fn idwt2_band(pyr: &WaveletPyramid, basis: &WaveletBasis, out_width: usize, out_height: usize) -> Result<Band> {
    pyr.check_shape()?;
    if pyr.image_size() != (out_width, out_height) {
        return Err(Error::PyramidShape { width: out_width, height: out_height });
    }
    let mut current = pyr.low.clone();
    for level in (0..pyr.levels()).rev() {
        let (w, h) = pyr.sizes[level];
        let [hx, hy, hd] = &pyr.highs[level];
        let split = Split { ll: current, h: hx.clone(), v: hy.clone(), d: hd.clone() };
        current = synthesize_2d(&split, basis, w, h);
    }
    Ok(current)
}
