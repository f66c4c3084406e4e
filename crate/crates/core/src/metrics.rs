//! Full-reference quality metrics with peak value 1.0.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math;

/// Reported PSNR for identical images.
pub const PSNR_CAP: f64 = 99.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub rmse: f64,
    pub psnr: f64,
    pub ssim: f64,
}

impl MetricsReport {
    pub fn compute(img: &Image, reference: &Image) -> Result<Self> {
        Ok(MetricsReport { rmse: rmse(img, reference)?, psnr: psnr(img, reference)?, ssim: ssim(img, reference)? })
    }

    /// Componentwise mean of several reports.
    pub fn mean(reports: &[MetricsReport]) -> Option<MetricsReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let sum = reports.iter().fold((0.0, 0.0, 0.0), |acc, r| (acc.0 + r.rmse, acc.1 + r.psnr, acc.2 + r.ssim));
        Some(MetricsReport { rmse: sum.0 / n, psnr: sum.1 / n, ssim: sum.2 / n })
    }
}

fn check(a: &Image, b: &Image) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::mismatch(a.dims(), b.dims()));
    }
    Ok(())
}

fn mse(a: &Image, b: &Image) -> Result<f64> {
    check(a, b)?;
    let sum: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.as_slice().len() as f64)
}

pub fn rmse(a: &Image, b: &Image) -> Result<f64> {
    Ok(math::sqrt(mse(a, b)?))
}

/// `10·log10(1 / mse)`, capped at [`PSNR_CAP`].
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * math::log10(1.0 / m)).min(PSNR_CAP))
}

fn ssim_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> =
        (0..SSIM_WINDOW).map(|i| math::exp(-((i as f64 - r) * (i as f64 - r)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Separable 'valid' filtering: output is `(w - k + 1) x (h - k + 1)`.
fn filter_valid(data: &[f64], w: usize, h: usize, g: &[f64]) -> Vec<f64> {
    let k = g.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    let mut rows = Vec::with_capacity(ow * h);
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        for x in 0..ow {
            rows.push(row[x..x + k].iter().zip(g).map(|(a, b)| a * b).sum::<f64>());
        }
    }
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (t, gt) in g.iter().enumerate() {
                acc += gt * rows[(y + t) * ow + x];
            }
            out.push(acc);
        }
    }
    out
}

/// Mean SSIM over all fully contained 11x11 Gaussian windows (σ = 1.5).
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check(a, b)?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::SmallerThanWindow { width: w, height: h, window: SSIM_WINDOW });
    }
    let g = ssim_window();
    let x = a.as_slice();
    let y = b.as_slice();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();

    let mu_x = filter_valid(x, w, h, &g);
    let mu_y = filter_valid(y, w, h, &g);
    let e_xx = filter_valid(&xx, w, h, &g);
    let e_yy = filter_valid(&yy, w, h, &g);
    let e_xy = filter_valid(&xy, w, h, &g);

    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let sxx = e_xx[i] - mx * mx;
        let syy = e_yy[i] - my * my;
        let sxy = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
    }
    Ok(total / mu_x.len() as f64)
}
