//! Method comparison over a manifest of (ground truth, source 1, source 2,
//! noise) tuples.
//!
//! Manifest lines are comma separated: `gt,src1,src2,noise[,extra...]`.
//! Relative paths resolve against the manifest's directory; `#` starts a
//! comment; `noise` is a spec such as `gaussian:0.01` or `none`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lrr_fusion_core::degrade::NoiseSpec;
use lrr_fusion_core::{fuse, fuse_dwt_baseline, FusionConfig, Image, MetricsReport};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::load_image;
use crate::noise::{parse_noise, LambdaTable};
use crate::sweep::fmt_metric;

pub const EVAL_HEADER: [&str; 9] =
    ["method", "image", "noise_kind", "noise_param", "lambda", "rmse", "psnr", "ssim", "error"];

/// `image` column value of the per-method average rows.
pub const AVERAGE_MARKER: &str = "average";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Proposed,
    DwtBaseline,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Proposed, Method::DwtBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::DwtBaseline => "dwt_baseline",
        }
    }

    fn run(self, a: &Image, b: &Image, cfg: &FusionConfig) -> lrr_fusion_core::Result<Image> {
        match self {
            Method::Proposed => fuse(a, b, cfg),
            Method::DwtBaseline => fuse_dwt_baseline(a, b, cfg),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`; expected proposed or dwt_baseline"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub gt: PathBuf,
    pub src1: PathBuf,
    pub src2: PathBuf,
    /// Noise spec text, `none` for clean sources.
    pub noise: String,
}

impl ManifestEntry {
    pub fn noise_spec(&self) -> Result<Option<NoiseSpec>> {
        match self.noise.as_str() {
            "none" | "" => Ok(None),
            text => parse_noise(text, 0).map(Some),
        }
    }
}

pub fn parse_manifest(text: &str, base_dir: &Path, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 4 {
            return Err(Error::Manifest {
                path: origin.into(),
                line: i + 1,
                message: format!("expected gt,src1,src2,noise; got {} field(s)", fields.len()),
            });
        }
        let resolve = |f: &str| base_dir.join(f);
        entries.push(ManifestEntry {
            gt: resolve(fields[0]),
            src1: resolve(fields[1]),
            src2: resolve(fields[2]),
            noise: fields[3].to_string(),
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")), path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalCase {
    pub name: String,
    pub truth: Image,
    pub first: Image,
    pub second: Image,
    pub noise: Option<NoiseSpec>,
}

/// Loads the images of one manifest entry.
pub fn load_case(entry: &ManifestEntry) -> Result<EvalCase> {
    Ok(EvalCase {
        name: entry.gt.display().to_string(),
        truth: load_image(&entry.gt)?,
        first: load_image(&entry.src1)?,
        second: load_image(&entry.src2)?,
        noise: entry.noise_spec()?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub method: Method,
    pub image: String,
    pub noise_kind: String,
    pub noise_param: Option<f64>,
    /// λ used by the proposed method; `None` for the baseline and for
    /// average rows.
    pub lambda: Option<f64>,
    pub metrics: Option<MetricsReport>,
    pub error: String,
}

impl EvalRow {
    pub fn is_average(&self) -> bool {
        self.image == AVERAGE_MARKER
    }
}

/// A case that could not even be loaded still yields one failed row per
/// method.
pub type CaseInput = std::result::Result<EvalCase, (String, String)>;

fn noise_columns(noise: Option<&NoiseSpec>) -> (String, Option<f64>) {
    match noise {
        Some(n) => (n.kind.as_str().into(), Some(n.param())),
        None => ("none".into(), None),
    }
}

/// Scores each method on each case. The proposed method takes λ from
/// `table` (or `base.lambda` for clean sources). Per-case rows come first,
/// in case order, then one average row per method.
pub fn evaluate(cases: &[CaseInput], methods: &[Method], base: &FusionConfig, table: &LambdaTable) -> Vec<EvalRow> {
    let jobs: Vec<(usize, Method)> = (0..cases.len()).flat_map(|c| methods.iter().map(move |&m| (c, m))).collect();
    let mut rows: Vec<EvalRow> = jobs
        .par_iter()
        .map(|&(c, method)| match &cases[c] {
            Err((name, message)) => EvalRow {
                method,
                image: name.clone(),
                noise_kind: String::new(),
                noise_param: None,
                lambda: None,
                metrics: None,
                error: message.clone(),
            },
            Ok(case) => {
                let (noise_kind, noise_param) = noise_columns(case.noise.as_ref());
                let lambda = match &case.noise {
                    Some(n) => table.lookup(n),
                    None => Ok(base.lambda),
                };
                let outcome = lambda.map_err(|e| e.to_string()).and_then(|lambda| {
                    let cfg = FusionConfig { lambda, ..base.clone() };
                    let fused = method.run(&case.first, &case.second, &cfg).map_err(|e| e.to_string())?;
                    let m = MetricsReport::compute(&fused, &case.truth).map_err(|e| e.to_string())?;
                    Ok((lambda, m))
                });
                let (lambda, metrics, error) = match outcome {
                    Ok((l, m)) => (Some(l), Some(m), String::new()),
                    Err(e) => (None, None, e),
                };
                EvalRow {
                    method,
                    image: case.name.clone(),
                    noise_kind,
                    noise_param,
                    lambda: if method == Method::Proposed { lambda } else { None },
                    metrics,
                    error,
                }
            }
        })
        .collect();

    for &method in methods {
        let mine: Vec<&EvalRow> = rows.iter().filter(|r| r.method == method).collect();
        let ok: Vec<MetricsReport> = mine.iter().filter_map(|r| r.metrics).collect();
        let failed = mine.len() - ok.len();
        let kinds: Vec<(&str, Option<f64>)> =
            mine.iter().filter(|r| r.metrics.is_some()).map(|r| (r.noise_kind.as_str(), r.noise_param)).collect();
        let (noise_kind, noise_param) = match kinds.first() {
            Some(&first) if kinds.iter().all(|&k| k == first) => (first.0.to_string(), first.1),
            Some(_) => ("mixed".to_string(), None),
            None => (String::new(), None),
        };
        let average = EvalRow {
            method,
            image: AVERAGE_MARKER.into(),
            noise_kind,
            noise_param,
            lambda: None,
            metrics: MetricsReport::mean(&ok),
            error: if failed > 0 { format!("{failed} of {} failed", mine.len()) } else { String::new() },
        };
        rows.push(average);
    }
    rows
}

/// Average row of `method`, if any case succeeded.
pub fn average_of(rows: &[EvalRow], method: Method) -> Option<MetricsReport> {
    rows.iter().find(|r| r.method == method && r.is_average()).and_then(|r| r.metrics)
}

pub fn write_eval_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVAL_HEADER)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let (rmse, psnr, ssim) = match r.metrics {
            Some(m) => (fmt_metric(m.rmse), fmt_metric(m.psnr), fmt_metric(m.ssim)),
            None => Default::default(),
        };
        w.write_record([
            r.method.as_str().to_string(),
            r.image.clone(),
            r.noise_kind.clone(),
            opt(r.noise_param),
            opt(r.lambda),
            rmse,
            psnr,
            ssim,
            r.error.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
