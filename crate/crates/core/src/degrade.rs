//! Test-input synthesis: half-plane defocus blur and additive/impulse/shot noise.
//!
//! Randomness is counter-based: pixel `i` draws from ChaCha8 stream `i` of the
//! generator seeded with the noise seed, so results do not depend on the
//! order (or thread) in which pixels are visited.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Poisson, StandardNormal, StandardUniform};

use crate::error::{Error, Result};
use crate::image::{reflect_signed, Image};
use crate::linalg::Matrix;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
    Poisson,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "sp",
            NoiseKind::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Gaussian variance (not standard deviation).
    pub variance: f64,
    /// Gaussian mean.
    pub mean: f64,
    /// Salt & pepper corruption probability.
    pub density: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(variance: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Gaussian, variance, mean: 0.0, density: 0.0, seed }
    }

    pub fn salt_pepper(density: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::SaltPepper, variance: 0.0, mean: 0.0, density, seed }
    }

    pub fn poisson(seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Poisson, variance: 0.0, mean: 0.0, density: 0.0, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseSpec { seed, ..self }
    }

    /// The parameter that distinguishes specs of the same kind: variance,
    /// density, or 0 for Poisson.
    pub fn param(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => self.variance,
            NoiseKind::SaltPepper => self.density,
            NoiseKind::Poisson => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NoiseKind::Gaussian if !(self.variance >= 0.0 && self.variance.is_finite()) => {
                Err(Error::InvalidParameter("variance must be a finite non-negative number"))
            }
            NoiseKind::Gaussian if !self.mean.is_finite() => Err(Error::InvalidParameter("mean must be finite")),
            NoiseKind::SaltPepper if !(0.0..=1.0).contains(&self.density) => {
                Err(Error::InvalidParameter("density must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    Left,
    #[default]
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusSpec {
    /// The half that stays sharp.
    pub side: Side,
    pub kernel_size: usize,
    pub kernel_sigma: f64,
}

impl Default for FocusSpec {
    fn default() -> Self {
        FocusSpec { side: Side::Right, kernel_size: 3, kernel_sigma: 7.0 }
    }
}

impl FocusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size < 3 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::InvalidParameter("kernel size must be odd and at least 3"));
        }
        if !(self.kernel_sigma > 0.0) {
            return Err(Error::InvalidParameter("kernel sigma must be positive"));
        }
        Ok(())
    }
}

/// Normalized Gaussian kernel on the centered integer grid.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Matrix> {
    if size.is_multiple_of(2) {
        return Err(Error::InvalidParameter("kernel size must be odd"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter("kernel sigma must be positive"));
    }
    let r = (size / 2) as isize;
    let two_s2 = 2.0 * sigma * sigma;
    let k = Matrix::from_fn(size, size, |i, j| {
        let dy = (i as isize - r) as f64;
        let dx = (j as isize - r) as f64;
        math::exp(-(dx * dx + dy * dy) / two_s2)
    });
    let total: f64 = k.as_slice().iter().sum();
    Ok(k.scale(1.0 / total))
}

/// 2D convolution with symmetric boundary extension.
pub fn convolve(img: &Image, kernel: &Matrix) -> Image {
    let (w, h) = img.dims();
    let ry = (kernel.rows() / 2) as isize;
    let rx = (kernel.cols() / 2) as isize;
    Image::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for ki in 0..kernel.rows() {
            let sy = reflect_signed(y as isize + ki as isize - ry, h);
            for kj in 0..kernel.cols() {
                let sx = reflect_signed(x as isize + kj as isize - rx, w);
                acc += kernel[(ki, kj)] * img.get(sx, sy);
            }
        }
        acc
    })
    .expect("same dimensions as a valid image")
}

/// Image that is sharp on `spec.side` and blurred on the other half.
/// Columns `x < width / 2` form the left half.
pub fn focus_image(gt: &Image, spec: &FocusSpec) -> Result<Image> {
    spec.validate()?;
    let blurred = convolve(gt, &gaussian_kernel(spec.kernel_size, spec.kernel_sigma)?);
    let half = gt.width() / 2;
    let out = Image::from_fn(gt.width(), gt.height(), |x, y| {
        let left = x < half;
        let sharp = match spec.side {
            Side::Left => left,
            Side::Right => !left,
        };
        if sharp {
            gt.get(x, y)
        } else {
            blurred.get(x, y)
        }
    })?;
    Ok(out.map(crate::image::clamp_unit))
}

/// Returns `(focus_right, focus_left)`. `spec.side` is ignored.
pub fn make_focus_pair(gt: &Image, spec: &FocusSpec) -> Result<(Image, Image)> {
    let right = focus_image(gt, &FocusSpec { side: Side::Right, ..*spec })?;
    let left = focus_image(gt, &FocusSpec { side: Side::Left, ..*spec })?;
    Ok((right, left))
}

fn pixel_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Adds noise per `spec` and clamps to `[0, 1]`.
pub fn add_noise(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.validate()?;
    let (w, h) = img.dims();
    let data: Vec<f64> = img
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut rng = pixel_rng(spec.seed, i);
            match spec.kind {
                NoiseKind::Gaussian => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v + spec.mean + math::sqrt(spec.variance) * z
                }
                NoiseKind::SaltPepper => {
                    let u: f64 = StandardUniform.sample(&mut rng);
                    if u < spec.density / 2.0 {
                        0.0
                    } else if u < spec.density {
                        1.0
                    } else {
                        v
                    }
                }
                NoiseKind::Poisson => {
                    let rate = v.clamp(0.0, 1.0) * 255.0;
                    if rate > 0.0 {
                        let k: f64 = Poisson::new(rate).expect("positive finite rate").sample(&mut rng);
                        k / 255.0
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect();
    Image::new_clamped(w, h, data)
}

/// SplitMix64 finalizer of `seed` and `stream`; gives independent seeds for
/// the images and sources of a corpus.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
