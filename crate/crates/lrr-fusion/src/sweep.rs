//! Parameter sweeps over λ, patch size, wavelet level and noise.
//!
//! Every corpus image becomes a focus pair, is degraded once per noise spec,
//! then fused and scored for every grid cell. Rows come out in grid order
//! (noise, patch, level, λ) whatever order the worker pool finishes them in.

use std::io::{Read, Write};
use std::path::Path;

use lrr_fusion_core::degrade::{add_noise, derive_seed, make_focus_pair, FocusSpec, NoiseSpec};
use lrr_fusion_core::synth::scene;
use lrr_fusion_core::{fuse, FusionConfig, Image, MetricsReport};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::load_image;

/// Exact CSV header of sweep output.
pub const SWEEP_HEADER: [&str; 10] =
    ["noise_kind", "noise_param", "lambda", "patch", "level", "seed", "rmse", "psnr", "ssim", "error"];

/// `error` column marker of the per-(noise, patch, level) argmax-λ rows.
pub const ARGMAX_MARKER: &str = "argmax_lambda";

/// Default side of the centre crop applied to corpus images.
pub const DEFAULT_CROP: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusImage {
    pub name: String,
    pub image: Image,
}

/// Loads ground-truth images, centre-cropped to `crop` x `crop` unless `crop`
/// is `None`.
pub fn load_corpus<P: AsRef<Path>>(paths: &[P], crop: Option<usize>) -> Result<Vec<CorpusImage>> {
    paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let img = load_image(p)?;
            let image = match crop {
                Some(n) => img.center_crop(n, n),
                None => img,
            };
            Ok(CorpusImage { name: p.display().to_string(), image })
        })
        .collect()
}

/// `count` synthetic scenes of `size` x `size`; scene `i` uses seed
/// `derive_seed(seed, i)`.
pub fn synthetic_corpus(count: usize, size: usize, seed: u64) -> Result<Vec<CorpusImage>> {
    (0..count)
        .map(|i| {
            Ok(CorpusImage { name: format!("synthetic_{i}"), image: scene(size, size, derive_seed(seed, i as u64))? })
        })
        .collect()
}

/// Seed of the noise added to source `source` (0 or 1) of corpus image `index`.
pub fn noise_seed(seed: u64, index: usize, source: usize) -> u64 {
    derive_seed(seed, (2 * index + source) as u64)
}

/// A focus pair after degradation, with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradedPair {
    pub name: String,
    pub truth: Image,
    pub first: Image,
    pub second: Image,
}

/// Builds the (focus-right, focus-left) pair of every corpus image and adds
/// independent noise to each source.
pub fn degrade_corpus(corpus: &[CorpusImage], noise: &NoiseSpec, focus: &FocusSpec, seed: u64) -> Result<Vec<DegradedPair>> {
    corpus
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let (right, left) = make_focus_pair(&item.image, focus)?;
            Ok(DegradedPair {
                name: item.name.clone(),
                truth: item.image.clone(),
                first: add_noise(&right, &noise.with_seed(noise_seed(seed, i, 0)))?,
                second: add_noise(&left, &noise.with_seed(noise_seed(seed, i, 1)))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub lambda_grid: Vec<f64>,
    pub patch_grid: Vec<usize>,
    pub level_grid: Vec<usize>,
    /// Seeds inside the specs are ignored; noise seeds derive from `seed`.
    pub noise_specs: Vec<NoiseSpec>,
    pub corpus: Vec<CorpusImage>,
    pub seed: u64,
    pub focus: FocusSpec,
    /// Basis, ALM settings and tie rule; λ, patch size and levels come from
    /// the grids.
    pub base: FusionConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("lambda", self.lambda_grid.is_empty()),
            ("patch", self.patch_grid.is_empty()),
            ("level", self.level_grid.is_empty()),
            ("noise", self.noise_specs.is_empty()),
            ("corpus", self.corpus.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|e| e.1) {
            return Err(Error::Sweep(format!("{name} grid is empty")));
        }
        for n in &self.noise_specs {
            n.validate()?;
        }
        self.focus.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub noise_kind: String,
    pub noise_param: f64,
    pub lambda: f64,
    pub patch: usize,
    pub level: usize,
    pub seed: u64,
    /// Averages over the corpus; `None` when the cell failed.
    pub metrics: Option<MetricsReport>,
    /// Empty, a failure message, or [`ARGMAX_MARKER`].
    pub error: String,
}

impl SweepRow {
    pub fn is_summary(&self) -> bool {
        self.error == ARGMAX_MARKER
    }

    pub fn failed(&self) -> bool {
        self.metrics.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// One row per grid cell, in grid order.
    pub rows: Vec<SweepRow>,
    /// One argmax-λ row per (noise, patch, level) with at least one
    /// successful cell.
    pub summaries: Vec<SweepRow>,
}

impl SweepReport {
    pub fn all_failed(&self) -> bool {
        self.rows.iter().all(SweepRow::failed)
    }

    /// Data rows followed by summary rows.
    pub fn all_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().chain(&self.summaries)
    }
}

fn score_cell(pairs: &[DegradedPair], cfg: &FusionConfig) -> std::result::Result<MetricsReport, String> {
    let mut reports = Vec::with_capacity(pairs.len());
    for p in pairs {
        let run = || -> lrr_fusion_core::Result<MetricsReport> {
            let fused = fuse(&p.first, &p.second, cfg)?;
            MetricsReport::compute(&fused, &p.truth)
        };
        reports.push(run().map_err(|e| format!("{}: {e}", p.name))?);
    }
    Ok(MetricsReport::mean(&reports).expect("corpus is non-empty"))
}

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;

    let mut degraded = Vec::with_capacity(spec.noise_specs.len());
    for noise in &spec.noise_specs {
        // a corpus image that cannot be degraded fails every row of this noise
        degraded.push(degrade_corpus(&spec.corpus, noise, &spec.focus, spec.seed).map_err(|e| e.to_string()));
    }

    let mut cells = Vec::new();
    for (k, noise) in spec.noise_specs.iter().enumerate() {
        for &patch in &spec.patch_grid {
            for &level in &spec.level_grid {
                for &lambda in &spec.lambda_grid {
                    cells.push((k, noise, patch, level, lambda));
                }
            }
        }
    }

    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(k, noise, patch, level, lambda)| {
            let cfg = FusionConfig { lambda, patch_size: patch, levels: level, ..spec.base.clone() };
            let outcome = cfg
                .validate()
                .map_err(|e| e.to_string())
                .and_then(|_| degraded[k].as_deref().map_err(String::clone))
                .and_then(|pairs| score_cell(pairs, &cfg));
            let (metrics, error) = match outcome {
                Ok(m) => (Some(m), String::new()),
                Err(e) => (None, e),
            };
            SweepRow {
                noise_kind: noise.kind.as_str().into(),
                noise_param: noise.param(),
                lambda,
                patch,
                level,
                seed: spec.seed,
                metrics,
                error,
            }
        })
        .collect();

    let summaries = rows.chunks(spec.lambda_grid.len()).filter_map(argmax_row).collect();
    Ok(SweepReport { rows, summaries })
}

/// Best-SSIM row of one λ group; ties keep the earliest λ.
fn argmax_row(group: &[SweepRow]) -> Option<SweepRow> {
    let mut best: Option<&SweepRow> = None;
    for row in group {
        let Some(m) = row.metrics else { continue };
        if best.is_none_or(|b| m.ssim > b.metrics.expect("only successful rows are kept").ssim) {
            best = Some(row);
        }
    }
    best.map(|b| SweepRow { error: ARGMAX_MARKER.into(), ..b.clone() })
}

/// Fixed six-decimal formatting used for every metric column.
pub fn fmt_metric(v: f64) -> String {
    format!("{v:.6}")
}

pub fn write_sweep_csv<W: Write>(rows: impl IntoIterator<Item = impl std::borrow::Borrow<SweepRow>>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        let r = row.borrow();
        let (rmse, psnr, ssim) = match r.metrics {
            Some(m) => (fmt_metric(m.rmse), fmt_metric(m.psnr), fmt_metric(m.ssim)),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            r.noise_kind.clone(),
            r.noise_param.to_string(),
            r.lambda.to_string(),
            r.patch.to_string(),
            r.level.to_string(),
            r.seed.to_string(),
            rmse,
            psnr,
            ssim,
            r.error.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn bad_row(line: u64, message: impl Into<String>) -> Error {
    Error::Sweep(format!("csv line {line}: {}", message.into()))
}

/// Reads rows written by [`write_sweep_csv`].
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != SWEEP_HEADER {
        return Err(Error::Sweep(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let num = |i: usize| field(i).parse::<f64>().map_err(|_| bad_row(line, format!("bad {}", SWEEP_HEADER[i])));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad_row(line, format!("bad {}", SWEEP_HEADER[i])));
        let metrics = if field(6).is_empty() {
            None
        } else {
            Some(MetricsReport { rmse: num(6)?, psnr: num(7)?, ssim: num(8)? })
        };
        rows.push(SweepRow {
            noise_kind: field(0).into(),
            noise_param: num(1)?,
            lambda: num(2)?,
            patch: int(3)? as usize,
            level: int(4)? as usize,
            seed: int(5)?,
            metrics,
            error: field(9).into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(lambda: f64, ssim: Option<f64>) -> SweepRow {
        SweepRow {
            noise_kind: "gaussian".into(),
            noise_param: 0.01,
            lambda,
            patch: 16,
            level: 2,
            seed: 0,
            metrics: ssim.map(|s| MetricsReport { rmse: 0.1, psnr: 20.0, ssim: s }),
            error: String::new(),
        }
    }

    #[test]
    fn argmax_skips_failures_and_keeps_first_tie() {
        let group = [row(1.0, Some(0.5)), row(2.0, None), row(3.0, Some(0.7)), row(4.0, Some(0.7))];
        let best = argmax_row(&group).unwrap();
        assert_eq!(best.lambda, 3.0);
        assert!(best.is_summary());
        assert!(argmax_row(&[row(1.0, None)]).is_none());
    }

    #[test]
    fn empty_grids_are_rejected() {
        let spec = SweepSpec {
            lambda_grid: vec![],
            patch_grid: vec![16],
            level_grid: vec![2],
            noise_specs: vec![NoiseSpec::poisson(0)],
            corpus: synthetic_corpus(1, 16, 0).unwrap(),
            seed: 0,
            focus: FocusSpec::default(),
            base: FusionConfig::default(),
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn noise_seeds_are_distinct() {
        let seeds = [noise_seed(1, 0, 0), noise_seed(1, 0, 1), noise_seed(1, 1, 0), noise_seed(2, 0, 0)];
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
    }
}
