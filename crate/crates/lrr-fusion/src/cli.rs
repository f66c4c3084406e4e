//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, every sweep or eval row
//! failed), 2 usage error (bad flags, bad config, mismatched inputs).

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrr_fusion_core::degrade::{add_noise, focus_image, FocusSpec, NoiseSpec, Side};
use lrr_fusion_core::{fuse, FusionConfig, HighBandMode, TieBreak};

use crate::config::{apply_config, read_config};
use crate::error::Error;
use crate::eval::{evaluate, load_case, read_manifest, write_eval_csv, CaseInput, Method};
use crate::io::{load_image, save_image};
use crate::noise::{default_lambda, parse_noise, LambdaTable};
use crate::sweep::{
    load_corpus, noise_seed, run_sweep, synthetic_corpus, write_sweep_csv, SweepSpec, DEFAULT_CROP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Name of the manifest file `degrade` appends to.
pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Parser)]
#[command(name = "lrr-fusion", version, about = "Multi-focus noisy image fusion with wavelets and low-rank representation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse two registered source images.
    Fuse(FuseArgs),
    /// Make focus-right/focus-left sources from a ground-truth image.
    Degrade(DegradeArgs),
    /// Sweep λ, patch size, wavelet level and noise over a corpus.
    Sweep(SweepArgs),
    /// Compare fusion methods on a manifest of degraded pairs.
    Eval(EvalArgs),
    /// Write synthetic ground-truth scenes.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct FusionFlags {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    /// Wavelet basis: db2 or haar.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long, value_enum)]
    tie_break: Option<TieArg>,
    /// Write the raw winning detail patch instead of its low-rank reconstruction.
    #[arg(long)]
    raw_high: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Png,
    Pgm,
}

impl FormatArg {
    fn ext(self) -> &'static str {
        match self {
            FormatArg::Png => "png",
            FormatArg::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Args)]
struct FuseArgs {
    input1: PathBuf,
    input2: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Noise in the sources (e.g. gaussian:0.001); picks λ from the table.
    #[arg(long)]
    noise: Option<String>,
    #[command(flatten)]
    fusion: FusionFlags,
}

#[derive(Debug, Args)]
struct DegradeArgs {
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// gaussian:VAR[:MEAN], sp:DENSITY or poisson; no noise when omitted.
    #[arg(long)]
    noise: Option<String>,
    /// Write only the source that is sharp on this side.
    #[arg(long, value_enum)]
    focus: Option<SideArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    kernel_size: usize,
    #[arg(long, default_value_t = 7.0)]
    kernel_sigma: f64,
    #[arg(long, value_enum, default_value = "png")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Ground-truth images.
    #[arg(long, num_args = 1..)]
    corpus: Vec<PathBuf>,
    /// Use this many synthetic scenes instead of (or in addition to) files.
    #[arg(long, default_value_t = 0)]
    synthetic: usize,
    /// Side of the centre crop (and of synthetic scenes).
    #[arg(long, default_value_t = DEFAULT_CROP)]
    size: usize,
    /// Do not crop corpus images.
    #[arg(long)]
    full: bool,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4.5,10,20")]
    lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    patches: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    levels: Vec<usize>,
    /// Noise spec; repeat for several.
    #[arg(long, required = true)]
    noise: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Basis, ALM and tie settings; λ, patch and level come from the grids.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "proposed,dwt_baseline")]
    methods: Vec<Method>,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_CROP)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "png")]
    format: FormatArg,
}

/// A command failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure { code: EXIT_FAILURE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::NoiseSpec { .. } | Error::Manifest { .. } | Error::Sweep(_) => EXIT_USAGE,
            Error::Core(
                lrr_fusion_core::Error::DimensionMismatch { .. }
                | lrr_fusion_core::Error::InvalidParameter(_)
                | lrr_fusion_core::Error::PatchTooSmall(_)
                | lrr_fusion_core::Error::ZeroLevels
                | lrr_fusion_core::Error::UnknownBasis(_)
                | lrr_fusion_core::Error::TooSmallForLevels { .. },
            ) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{rendered}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Fuse(a) => cmd_fuse(a, stdout),
        Command::Degrade(a) => cmd_degrade(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Eval(a) => cmd_eval(a, stdout, stderr),
        Command::Synth(a) => cmd_synth(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Defaults, then the config file, then explicit flags.
fn resolve_config(base: FusionConfig, flags: &FusionFlags) -> std::result::Result<FusionConfig, Failure> {
    let mut cfg = match &flags.config {
        Some(path) => apply_config(&base, &read_config(path)?)?,
        None => base,
    };
    if let Some(l) = flags.lambda {
        cfg.lambda = l;
    }
    if let Some(n) = flags.patch_size {
        cfg.patch_size = n;
    }
    if let Some(l) = flags.levels {
        cfg.levels = l;
    }
    if let Some(b) = &flags.basis {
        cfg.basis = b.clone();
    }
    if let Some(t) = flags.tie_break {
        cfg.tie_break = match t {
            TieArg::First => TieBreak::First,
            TieArg::Second => TieBreak::Second,
        };
    }
    if flags.raw_high {
        cfg.high_band = HighBandMode::Raw;
    }
    cfg.validate().map_err(Error::from)?;
    Ok(cfg)
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::runtime(format!("{}: {e}", path.display()))
}

fn cmd_fuse(a: FuseArgs, out: &mut dyn Write) -> CmdResult {
    let mut base = FusionConfig::default();
    if let Some(text) = &a.noise {
        base.lambda = default_lambda(&parse_noise(text, 0)?);
    }
    let cfg = resolve_config(base, &a.fusion)?;
    let i1 = load_image(&a.input1)?;
    let i2 = load_image(&a.input2)?;
    if i1.dims() != i2.dims() {
        return Err(Failure::usage(format!(
            "size mismatch: {} is {}x{}, {} is {}x{}",
            a.input1.display(),
            i1.width(),
            i1.height(),
            a.input2.display(),
            i2.width(),
            i2.height()
        )));
    }
    let start = Instant::now();
    let fused = fuse(&i1, &i2, &cfg).map_err(Error::from)?;
    let elapsed = start.elapsed();
    save_image(&fused, &a.output)?;
    writeln!(
        out,
        "fused {}: lambda={} patch={} levels={} basis={} time={:.3}s",
        a.output.display(),
        cfg.lambda,
        cfg.patch_size,
        cfg.levels,
        cfg.basis,
        elapsed.as_secs_f64()
    )
    .map_err(write_err(Path::new("<stdout>")))?;
    Ok(())
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into())
}

fn cmd_degrade(a: DegradeArgs, out: &mut dyn Write) -> CmdResult {
    let noise: Option<NoiseSpec> = a.noise.as_deref().map(|t| parse_noise(t, a.seed)).transpose()?;
    let focus = FocusSpec { side: Side::Right, kernel_size: a.kernel_size, kernel_sigma: a.kernel_sigma };
    focus.validate().map_err(Error::from)?;
    let gt = load_image(&a.input)?;
    fs::create_dir_all(&a.out_dir).map_err(write_err(&a.out_dir))?;

    let stem = stem_of(&a.input);
    let sides: Vec<(usize, Side, &str)> = match a.focus {
        None => vec![(0, Side::Right, "right"), (1, Side::Left, "left")],
        Some(SideArg::Right) => vec![(0, Side::Right, "right")],
        Some(SideArg::Left) => vec![(1, Side::Left, "left")],
    };
    let mut names = ["-".to_string(), "-".to_string()];
    for (source, side, label) in sides {
        let blurred = focus_image(&gt, &FocusSpec { side, ..focus }).map_err(Error::from)?;
        let img = match &noise {
            Some(n) => add_noise(&blurred, &n.with_seed(noise_seed(a.seed, 0, source))).map_err(Error::from)?,
            None => blurred,
        };
        let name = format!("{stem}_focus_{label}.{}", a.format.ext());
        save_image(&img, a.out_dir.join(&name))?;
        writeln!(out, "wrote {}", a.out_dir.join(&name).display()).map_err(write_err(Path::new("<stdout>")))?;
        names[source] = name;
    }

    // relative to the manifest when the ground truth sits under it
    let gt_path = fs::canonicalize(&a.input).unwrap_or_else(|_| a.input.clone());
    let gt_path = match fs::canonicalize(&a.out_dir) {
        Ok(dir) => gt_path.strip_prefix(&dir).map(Path::to_path_buf).unwrap_or(gt_path),
        Err(_) => gt_path,
    };
    let manifest = a.out_dir.join(MANIFEST_NAME);
    let fresh = !manifest.exists();
    let mut file = OpenOptions::new().create(true).append(true).open(&manifest).map_err(write_err(&manifest))?;
    let mut text = String::new();
    if fresh {
        text.push_str("# gt,src1,src2,noise,seed,kernel_size,kernel_sigma\n");
    }
    text.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        gt_path.display(),
        names[0],
        names[1],
        a.noise.as_deref().unwrap_or("none").trim(),
        a.seed,
        a.kernel_size,
        a.kernel_sigma
    ));
    file.write_all(text.as_bytes()).map_err(write_err(&manifest))?;
    Ok(())
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> std::result::Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Failure::usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::runtime(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn base_from(config: &Option<PathBuf>) -> std::result::Result<FusionConfig, Failure> {
    let base = FusionConfig::default();
    Ok(match config {
        Some(path) => apply_config(&base, &read_config(path)?)?,
        None => base,
    })
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let base = base_from(&a.config)?;
    let noise_specs = a.noise.iter().map(|t| parse_noise(t, a.seed)).collect::<Result<Vec<_>, _>>()?;
    let crop = if a.full { None } else { Some(a.size) };
    let mut corpus = load_corpus(&a.corpus, crop)?;
    corpus.extend(synthetic_corpus(a.synthetic, a.size, a.seed)?);
    if corpus.is_empty() {
        return Err(Failure::usage("empty corpus: give --corpus files or --synthetic N"));
    }
    let spec = SweepSpec {
        lambda_grid: a.lambdas,
        patch_grid: a.patches,
        level_grid: a.levels,
        noise_specs,
        corpus,
        seed: a.seed,
        focus: FocusSpec::default(),
        base,
    };
    let report = with_pool(a.jobs, || run_sweep(&spec))??;
    let file = File::create(&a.out).map_err(write_err(&a.out))?;
    write_sweep_csv(report.all_rows(), BufWriter::new(file))?;

    let failed = report.rows.iter().filter(|r| r.failed()).count();
    let _ = writeln!(
        out,
        "wrote {} rows and {} argmax rows to {}",
        report.rows.len(),
        report.summaries.len(),
        a.out.display()
    );
    if report.all_failed() {
        return Err(Failure::runtime("every sweep cell failed"));
    }
    if failed > 0 {
        let _ = writeln!(err, "warning: {failed} of {} cells failed; see the error column", report.rows.len());
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let base = base_from(&a.config)?;
    let entries = read_manifest(&a.manifest)?;
    if entries.is_empty() {
        return Err(Failure::usage(format!("{}: no entries", a.manifest.display())));
    }
    let cases: Vec<CaseInput> =
        entries.iter().map(|e| load_case(e).map_err(|x| (e.gt.display().to_string(), x.to_string()))).collect();
    let rows = with_pool(a.jobs, || evaluate(&cases, &a.methods, &base, &LambdaTable::published()))?;
    let file = File::create(&a.out).map_err(write_err(&a.out))?;
    write_eval_csv(&rows, BufWriter::new(file))?;

    let per_case: Vec<_> = rows.iter().filter(|r| !r.is_average()).collect();
    let failed = per_case.iter().filter(|r| r.metrics.is_none()).count();
    let _ = writeln!(out, "wrote {} rows to {}", rows.len(), a.out.display());
    if failed == per_case.len() {
        return Err(Failure::runtime("every evaluation failed"));
    }
    if failed > 0 {
        let _ = writeln!(err, "warning: {failed} of {} evaluations failed; see the error column", per_case.len());
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs, out: &mut dyn Write) -> CmdResult {
    fs::create_dir_all(&a.out_dir).map_err(write_err(&a.out_dir))?;
    for item in synthetic_corpus(a.count, a.size, a.seed)? {
        let path = a.out_dir.join(format!("{}.{}", item.name, a.format.ext()));
        save_image(&item.image, &path)?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}
