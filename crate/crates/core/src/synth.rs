//! Seeded synthetic ground-truth scenes for tests, sweeps and demos.
//!
//! A scene is a smooth background with hard-edged discs and rectangles and a
//! few patches of oriented sinusoidal texture, so that both blur and noise
//! change it measurably.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardUniform};

use crate::error::Result;
use crate::image::{clamp_unit, Image};

enum Shape {
    Disc { cx: f64, cy: f64, r: f64, level: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64, level: f64 },
    Grating { cx: f64, cy: f64, r: f64, kx: f64, ky: f64, amp: f64 },
}

impl Shape {
    fn apply(&self, x: f64, y: f64, v: f64) -> f64 {
        match *self {
            Shape::Disc { cx, cy, r, level } => {
                if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r {
                    level
                } else {
                    v
                }
            }
            Shape::Rect { x0, y0, x1, y1, level } => {
                if x >= x0 && x <= x1 && y >= y0 && y <= y1 {
                    level
                } else {
                    v
                }
            }
            Shape::Grating { cx, cy, r, kx, ky, amp } => {
                if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r {
                    v + amp * libm::sin(kx * x + ky * y)
                } else {
                    v
                }
            }
        }
    }
}

/// Generates a `width` x `height` scene in `[0, 1]`.
pub fn scene(width: usize, height: usize, seed: u64) -> Result<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = move || -> f64 { StandardUniform.sample(&mut rng) };
    let (w, h) = (width as f64, height as f64);
    let scale = w.min(h);

    let base = 0.3 + 0.4 * u();
    let gx = (u() - 0.5) * 0.4 / w;
    let gy = (u() - 0.5) * 0.4 / h;

    let mut shapes = Vec::new();
    let n_shapes = 8 + (u() * 6.0) as usize;
    for _ in 0..n_shapes {
        let level = 0.05 + 0.9 * u();
        if u() < 0.5 {
            shapes.push(Shape::Disc { cx: u() * w, cy: u() * h, r: scale * (0.05 + 0.15 * u()), level });
        } else {
            let (x0, y0) = (u() * w, u() * h);
            let (dx, dy) = (scale * (0.08 + 0.3 * u()), scale * (0.08 + 0.3 * u()));
            shapes.push(Shape::Rect { x0, y0, x1: x0 + dx, y1: y0 + dy, level });
        }
    }
    let n_gratings = 3 + (u() * 3.0) as usize;
    for _ in 0..n_gratings {
        let freq = 0.3 + 1.2 * u();
        let theta = u() * core::f64::consts::PI;
        shapes.push(Shape::Grating {
            cx: u() * w,
            cy: u() * h,
            r: scale * (0.1 + 0.2 * u()),
            kx: freq * libm::cos(theta),
            ky: freq * libm::sin(theta),
            amp: 0.1 + 0.15 * u(),
        });
    }

    Image::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let v = shapes.iter().fold(base + gx * fx + gy * fy, |v, s| s.apply(fx, fy, v));
        clamp_unit(v)
    })
}
