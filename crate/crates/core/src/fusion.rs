//! The fusion pipeline: decompose both sources, fuse the low band by spatial
//! frequency choose-max, fuse each detail band by low-rank representation and
//! nuclear-norm choose-max, then reconstruct.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Image, PatchGrid};
use crate::linalg::Matrix;
use crate::lrr::{lrr_solve, nuclear_norm, AlmParams};
use crate::math;
use crate::wavelet::{dwt2, idwt2, Band, Orientation, WaveletBasis, WaveletPyramid};

/// Which source wins when the two activity scores are exactly equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Ties go to the second source (strict `>` for the first).
    #[default]
    Second,
    First,
}

/// What is written for a winning detail patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HighBandMode {
    /// The low-rank reconstruction `X·Z`; the noise part `E` is dropped.
    #[default]
    LowRank,
    /// The raw input patch.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub lambda: f64,
    pub patch_size: usize,
    pub levels: usize,
    /// Wavelet basis name, see [`WaveletBasis::by_name`].
    pub basis: String,
    /// ALM settings; its `lambda` field is overridden by [`FusionConfig::lambda`].
    pub alm: AlmParams,
    pub tie_break: TieBreak,
    pub high_band: HighBandMode,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            lambda: 3.0,
            patch_size: 16,
            levels: 2,
            basis: "db2".into(),
            alm: AlmParams::default(),
            tie_break: TieBreak::Second,
            high_band: HighBandMode::LowRank,
        }
    }
}

impl FusionConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        FusionConfig { lambda, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 2 {
            return Err(Error::PatchTooSmall(self.patch_size));
        }
        if self.levels < 1 {
            return Err(Error::ZeroLevels);
        }
        self.alm_params().validate()?;
        WaveletBasis::by_name(&self.basis)?;
        Ok(())
    }

    pub fn alm_params(&self) -> AlmParams {
        AlmParams { lambda: self.lambda, ..self.alm }
    }

    pub fn wavelet(&self) -> Result<WaveletBasis> {
        WaveletBasis::by_name(&self.basis)
    }
}

/// Which source supplied a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    First,
    Second,
}

impl Source {
    fn pick(first: f64, second: f64, tie: TieBreak) -> Source {
        let first_wins = match tie {
            TieBreak::Second => first > second,
            TieBreak::First => first >= second,
        };
        if first_wins {
            Source::First
        } else {
            Source::Second
        }
    }
}

/// Spatial frequency of a patch: the RMS of horizontal and vertical first
/// differences.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SfValue {
    pub value: f64,
    pub fx: f64,
    pub fy: f64,
}

pub fn spatial_frequency(patch: &Band) -> Result<SfValue> {
    let (w, h) = patch.dims();
    if w < 2 || h < 2 {
        return Err(Error::PatchDegenerate { width: w, height: h });
    }
    Ok(sf_of(patch.as_slice(), w, h))
}

/// Also defined for single-row or single-column patches, where one of the
/// two difference sums is empty.
fn sf_of(data: &[f64], w: usize, h: usize) -> SfValue {
    let mn = (w * h) as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..h {
        let row = &data[i * w..(i + 1) * w];
        for j in 1..w {
            let d = row[j] - row[j - 1];
            sx += d * d;
        }
        if i > 0 {
            let prev = &data[(i - 1) * w..i * w];
            for (a, b) in row.iter().zip(prev) {
                let d = a - b;
                sy += d * d;
            }
        }
    }
    let fx = math::sqrt(sx / mn);
    let fy = math::sqrt(sy / mn);
    SfValue { value: math::sqrt(fx * fx + fy * fy), fx, fy }
}

fn check_same(a: &Band, b: &Band) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::mismatch(a.dims(), b.dims()));
    }
    Ok(())
}

/// Fused band together with the per-patch source decisions (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct BandFusion {
    pub band: Band,
    pub grid: PatchGrid,
    pub decisions: Vec<Source>,
}

/// Low band: copy whichever patch has the larger spatial frequency.
pub fn fuse_low(l1: &Band, l2: &Band, cfg: &FusionConfig) -> Result<Band> {
    Ok(fuse_low_detailed(l1, l2, cfg)?.band)
}

pub fn fuse_low_detailed(l1: &Band, l2: &Band, cfg: &FusionConfig) -> Result<BandFusion> {
    check_same(l1, l2)?;
    let (w, h) = l1.dims();
    let grid = PatchGrid::clamped(w, h, cfg.patch_size)?;
    let mut out = Band::zeros(w, h);
    let mut decisions = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let p1 = grid.extract(l1.as_slice(), idx);
        let p2 = grid.extract(l2.as_slice(), idx);
        let sf1 = sf_of(&p1, grid.patch_width, grid.patch_height).value;
        let sf2 = sf_of(&p2, grid.patch_width, grid.patch_height).value;
        let src = Source::pick(sf1, sf2, cfg.tie_break);
        decisions.push(src);
        grid.write(out.as_mut_slice(), idx, if src == Source::First { &p1 } else { &p2 });
    }
    Ok(BandFusion { band: out, grid, decisions })
}

/// Detail band: per patch, solve LRR for both candidates and keep the one
/// whose coefficient matrix has the larger nuclear norm.
pub fn fuse_high(h1: &Band, h2: &Band, cfg: &FusionConfig) -> Result<Band> {
    Ok(fuse_high_detailed(h1, h2, cfg)?.band)
}

pub fn fuse_high_detailed(h1: &Band, h2: &Band, cfg: &FusionConfig) -> Result<BandFusion> {
    let mut out = fuse_high_many(&[(h1, h2)], cfg)?;
    Ok(out.pop().expect("one band pair in, one out"))
}

struct PatchOutcome {
    source: Source,
    data: Vec<f64>,
}

fn fuse_patch(p1: Vec<f64>, p2: Vec<f64>, grid: &PatchGrid, cfg: &FusionConfig) -> Result<PatchOutcome> {
    let params = cfg.alm_params();
    let x1 = Matrix::new(grid.patch_height, grid.patch_width, p1)?;
    let x2 = Matrix::new(grid.patch_height, grid.patch_width, p2)?;
    let s1 = lrr_solve(&x1, &params)?;
    let s2 = lrr_solve(&x2, &params)?;
    let n1 = nuclear_norm(&s1.z)?;
    let n2 = nuclear_norm(&s2.z)?;
    let source = Source::pick(n1, n2, cfg.tie_break);
    let (x, sol) = match source {
        Source::First => (x1, s1),
        Source::Second => (x2, s2),
    };
    let data = match cfg.high_band {
        HighBandMode::LowRank => x.matmul(&sol.z).into_vec(),
        HighBandMode::Raw => x.into_vec(),
    };
    Ok(PatchOutcome { source, data })
}

/// Fuses several band pairs, spreading all patch solves over one job list so
/// small coarse bands do not serialize the work.
fn fuse_high_many(pairs: &[(&Band, &Band)], cfg: &FusionConfig) -> Result<Vec<BandFusion>> {
    let mut grids = Vec::with_capacity(pairs.len());
    let mut jobs = Vec::new();
    for (b, (h1, h2)) in pairs.iter().enumerate() {
        check_same(h1, h2)?;
        let (w, h) = h1.dims();
        let grid = PatchGrid::clamped(w, h, cfg.patch_size)?;
        jobs.extend((0..grid.len()).map(|p| (b, p)));
        grids.push(grid);
    }

    let run = |&(b, p): &(usize, usize)| -> Result<PatchOutcome> {
        let (h1, h2) = pairs[b];
        let grid = &grids[b];
        fuse_patch(grid.extract(h1.as_slice(), p), grid.extract(h2.as_slice(), p), grid, cfg)
    };

    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<PatchOutcome>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<PatchOutcome>> = jobs.iter().map(run).collect();

    let mut fused: Vec<BandFusion> = grids
        .iter()
        .map(|g| BandFusion { band: Band::zeros(g.width, g.height), grid: *g, decisions: Vec::with_capacity(g.len()) })
        .collect();
    for (&(b, p), outcome) in jobs.iter().zip(outcomes) {
        let outcome = outcome?;
        let f = &mut fused[b];
        f.grid.write(f.band.as_mut_slice(), p, &outcome.data);
        f.decisions.push(outcome.source);
    }
    Ok(fused)
}

/// Everything [`fuse`] computes, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutcome {
    pub image: Image,
    pub pyramid: WaveletPyramid,
    pub low: BandFusion,
    /// Detail band fusions, level-major in [`Orientation::ALL`] order.
    pub highs: Vec<((usize, Orientation), BandFusion)>,
}

fn check_sources(i1: &Image, i2: &Image, cfg: &FusionConfig) -> Result<WaveletBasis> {
    cfg.validate()?;
    if i1.dims() != i2.dims() {
        return Err(Error::mismatch(i1.dims(), i2.dims()));
    }
    cfg.wavelet()
}

/// Fuses two registered source images.
pub fn fuse(i1: &Image, i2: &Image, cfg: &FusionConfig) -> Result<Image> {
    Ok(fuse_detailed(i1, i2, cfg)?.image)
}

pub fn fuse_detailed(i1: &Image, i2: &Image, cfg: &FusionConfig) -> Result<FusionOutcome> {
    let basis = check_sources(i1, i2, cfg)?;
    let p1 = dwt2(i1, cfg.levels, &basis)?;
    let p2 = dwt2(i2, cfg.levels, &basis)?;

    let low = fuse_low_detailed(p1.low(), p2.low(), cfg)?;

    let keys: Vec<(usize, Orientation)> =
        (1..=cfg.levels).flat_map(|l| Orientation::ALL.into_iter().map(move |o| (l, o))).collect();
    let pairs: Vec<(&Band, &Band)> = keys.iter().map(|&(l, o)| (p1.high(l, o), p2.high(l, o))).collect();
    let highs = fuse_high_many(&pairs, cfg)?;

    let mut pyramid = p1.clone();
    *pyramid.low_mut() = low.band.clone();
    for (&(l, o), f) in keys.iter().zip(&highs) {
        *pyramid.high_mut(l, o) = f.band.clone();
    }
    let (w, h) = i1.dims();
    let raw = idwt2(&pyramid, &basis, w, h)?;
    let image = Image::new_clamped(w, h, raw.into_vec())?;
    Ok(FusionOutcome { image, pyramid, low, highs: keys.into_iter().zip(highs).collect() })
}

/// Plain wavelet fusion used as a reference method: averaged low band and
/// absolute-maximum detail coefficients.
pub fn fuse_dwt_baseline(i1: &Image, i2: &Image, cfg: &FusionConfig) -> Result<Image> {
    let basis = check_sources(i1, i2, cfg)?;
    let p1 = dwt2(i1, cfg.levels, &basis)?;
    let p2 = dwt2(i2, cfg.levels, &basis)?;
    let mut fused = p1.zip_map(&p2, abs_max)?;
    *fused.low_mut() = p1.low().zip_map(p2.low(), |a, b| (a + b) / 2.0)?;
    let (w, h) = i1.dims();
    let raw = idwt2(&fused, &basis, w, h)?;
    Image::new_clamped(w, h, raw.into_vec())
}

/// Absolute-max selection; ties keep the first coefficient.
pub fn abs_max(a: f64, b: f64) -> f64 {
    if math::abs(a) >= math::abs(b) {
        a
    } else {
        b
    }
}
