//! Multi-focus noisy image fusion in the wavelet domain.
//!
//! Two source images, each sharp in a different region and possibly noisy,
//! are decomposed with a 2D discrete wavelet transform. The low-frequency
//! band is fused patch by patch by choosing the patch with the larger spatial
//! frequency. Each high-frequency band is fused patch by patch by solving a
//! self-expressive low-rank representation problem for both candidates and
//! keeping the low-rank reconstruction whose coefficient matrix has the larger
//! nuclear norm. The inverse transform yields the fused image.
//!
//! The crate is `no_std` + `alloc`. The default `parallel` feature runs
//! per-patch solves on a rayon pool; results are identical either way.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod degrade;
pub mod error;
pub mod fusion;
pub mod image;
pub mod linalg;
pub mod lrr;
pub mod metrics;
pub mod synth;
pub mod wavelet;

mod math;

pub use error::{Error, Result};
pub use fusion::{fuse, fuse_dwt_baseline, FusionConfig, HighBandMode, TieBreak};
pub use image::{Image, PatchGrid};
pub use linalg::Matrix;
pub use lrr::{lrr_solve, AlmParams, LrrSolution};
pub use metrics::MetricsReport;
pub use wavelet::{Band, Orientation, WaveletBasis, WaveletPyramid};
