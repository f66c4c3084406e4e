//! File formats, configuration, parameter sweeps, method comparison and the
//! command-line front end for [`lrr_fusion_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod io;
pub mod noise;
pub mod sweep;

pub use error::{Error, Result};
pub use lrr_fusion_core as core;
