use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lrr_fusion::eval::EVAL_HEADER;
use lrr_fusion::io::load_image;
use lrr_fusion::noise::parse_noise;
use lrr_fusion::sweep::{degrade_corpus, read_sweep_csv, synthetic_corpus, ARGMAX_MARKER, SWEEP_HEADER};
use lrr_fusion_core::degrade::FocusSpec;
use lrr_fusion_core::{fuse, FusionConfig, Image, MetricsReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lrr-fusion"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

fn asset(name: &str) -> String {
    assets().join(name).display().to_string()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn fuses_the_shipped_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fused.png");
    let o = run(&[
        "fuse",
        &asset("scene_gt_focus_right.png"),
        &asset("scene_gt_focus_left.png"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let summary = text(&o.stdout);
    assert!(summary.contains("lambda=3 patch=16 levels=2"), "{summary}");
    let fused = load_image(&out).unwrap();
    let truth = load_image(asset("scene_gt.png")).unwrap();
    assert_eq!(fused.dims(), truth.dims());
    assert!(MetricsReport::compute(&fused, &truth).unwrap().ssim > 0.8);
}

#[test]
fn noise_flag_selects_lambda_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.png").display().to_string();
    let (a, b) = (asset("scene_gt_focus_right.png"), asset("scene_gt_focus_left.png"));

    let o = run(&["fuse", &a, &b, "-o", &out, "--noise", "gaussian:0.0005"]);
    assert!(text(&o.stdout).contains("lambda=4.5"), "{}", text(&o.stdout));

    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# tuned\nlambda = 7.5\npatch_size = 8\n").unwrap();
    let cfg = cfg.display().to_string();
    let o = run(&["fuse", &a, &b, "-o", &out, "--noise", "gaussian:0.0005", "--config", &cfg]);
    assert!(text(&o.stdout).contains("lambda=7.5 patch=8"), "{}", text(&o.stdout));
    let o = run(&["fuse", &a, &b, "-o", &out, "--config", &cfg, "--lambda", "2", "--basis", "haar"]);
    assert!(text(&o.stdout).contains("lambda=2 patch=8 levels=2 basis=haar"), "{}", text(&o.stdout));
}

#[test]
fn size_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.png");
    lrr_fusion::io::save_image(&Image::constant(20, 10, 0.5).unwrap(), &small).unwrap();
    let out = dir.path().join("f.png");
    let o = run(&["fuse", &asset("scene_gt.png"), small.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("128x128") && err.contains("20x10"), "{err}");
    assert!(!out.exists());
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.png");
    let missing = dir.path().join("nope.png");
    let o = run(&["fuse", missing.to_str().unwrap(), &asset("scene_gt.png"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("nope.png"));

    assert_eq!(run(&["fuse", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = run(&["fuse", &asset("scene_gt.png"), &asset("scene_gt.png"), "-o", out.to_str().unwrap(), "--noise", "speckle:1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["fuse", &asset("scene_gt.png"), &asset("scene_gt.png"), "-o", out.to_str().unwrap(), "--patch-size", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn degrade_is_deterministic_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let input = asset("scene_gt.png");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let o = run(&["degrade", &input, "--out-dir", out_dir.to_str().unwrap(), "--noise", "sp:0.02", "--seed", "5"]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        outputs.push(out_dir);
    }
    for file in ["scene_gt_focus_right.png", "scene_gt_focus_left.png"] {
        assert_eq!(fs::read(outputs[0].join(file)).unwrap(), fs::read(outputs[1].join(file)).unwrap());
    }
    let manifest = fs::read_to_string(outputs[0].join("manifest.csv")).unwrap();
    let last = manifest.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[1..], ["scene_gt_focus_right.png", "scene_gt_focus_left.png", "sp:0.02", "5", "3", "7"]);

    // a second run appends to the same manifest
    let o = run(&["degrade", &input, "--out-dir", outputs[0].to_str().unwrap(), "--noise", "poisson", "--focus", "left"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = fs::read_to_string(outputs[0].join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().filter(|l| !l.starts_with('#')).count(), 2);
    assert!(manifest.lines().last().unwrap().contains(",-,scene_gt_focus_left.png,poisson,"));
}

#[test]
fn zero_variance_only_blurs_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["degrade", &asset("scene_gt.png"), "--out-dir", dir.path().to_str().unwrap(), "--noise", "gaussian:0", "--format", "pgm"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let truth = load_image(asset("scene_gt.png")).unwrap();
    let right = load_image(dir.path().join("scene_gt_focus_right.pgm")).unwrap();
    let left = load_image(dir.path().join("scene_gt_focus_left.pgm")).unwrap();
    let half = truth.width() / 2;
    let mut changed = [0usize; 2];
    for y in 0..truth.height() {
        for x in 0..truth.width() {
            // focus_right keeps the right half sharp
            if x >= half {
                assert_eq!(right.get(x, y), truth.get(x, y));
            } else if right.get(x, y) != truth.get(x, y) {
                changed[0] += 1;
            }
            if x < half {
                assert_eq!(left.get(x, y), truth.get(x, y));
            } else if left.get(x, y) != truth.get(x, y) {
                changed[1] += 1;
            }
        }
    }
    assert!(changed[0] > 0 && changed[1] > 0);
}

#[test]
fn sweep_writes_rows_and_argmax_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep", "--synthetic", "2", "--size", "48", "--lambdas", "1,4.5", "--patches", "16", "--levels", "2",
        "--noise", "gaussian:0.0005", "--seed", "9", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), SWEEP_HEADER.join(","));
    let rows = read_sweep_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    let (data, summary): (Vec<_>, Vec<_>) = rows.iter().partition(|r| !r.is_summary());
    assert_eq!(data.len(), 2);
    assert_eq!(summary[0].error, ARGMAX_MARKER);
    let best = data.iter().max_by(|a, b| a.metrics.unwrap().ssim.total_cmp(&b.metrics.unwrap().ssim)).unwrap();
    assert_eq!(summary[0].lambda, best.lambda);

    // written rows re-read and re-written are unchanged
    let mut again = Vec::new();
    lrr_fusion::sweep::write_sweep_csv(&rows, &mut again).unwrap();
    assert_eq!(text(&again), csv);

    // a row is reproducible from the library with the same seeds
    let corpus = synthetic_corpus(2, 48, 9).unwrap();
    let noise = parse_noise("gaussian:0.0005", 9).unwrap();
    let pairs = degrade_corpus(&corpus, &noise, &FocusSpec::default(), 9).unwrap();
    let row = data.iter().find(|r| r.lambda == 4.5).unwrap();
    let cfg = FusionConfig { lambda: 4.5, ..Default::default() };
    let mean = MetricsReport::mean(
        &pairs.iter().map(|p| MetricsReport::compute(&fuse(&p.first, &p.second, &cfg).unwrap(), &p.truth).unwrap()).collect::<Vec<_>>(),
    )
    .unwrap();
    assert!((mean.ssim - row.metrics.unwrap().ssim).abs() < 1e-6, "{} vs {:?}", mean.ssim, row.metrics);
}

#[test]
fn sweep_without_noise_is_a_usage_error() {
    assert_eq!(run(&["sweep", "--synthetic", "1", "--out", "/dev/null"]).status.code(), Some(2));
}

#[test]
fn eval_is_deterministic_and_ranks_methods() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = asset("manifest.csv");
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "3"].into_iter().enumerate() {
        let out = dir.path().join(format!("eval{i}.csv"));
        let o = run(&["eval", "--manifest", &manifest, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        outputs.push(fs::read_to_string(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let lines: Vec<&str> = outputs[0].lines().collect();
    assert_eq!(lines[0], EVAL_HEADER.join(","));
    assert_eq!(lines.len(), 5);
    let ssim = |method: &str| -> f64 {
        let row = lines.iter().find(|l| l.starts_with(method) && l.contains(",average,")).unwrap();
        row.split(',').nth(7).unwrap().parse().unwrap()
    };
    assert!(ssim("proposed") > ssim("dwt_baseline"));
}

#[test]
fn eval_reports_partial_failures() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.csv");
    fs::write(
        &manifest,
        format!(
            "{},{},{},gaussian:0.001\nmissing.png,a.png,b.png,none\n",
            asset("scene_gt.png"),
            asset("scene_gt_focus_right.png"),
            asset("scene_gt_focus_left.png")
        ),
    )
    .unwrap();
    let out = dir.path().join("e.csv");
    let o = run(&["eval", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o.stderr).contains("warning"));
    assert!(fs::read_to_string(&out).unwrap().contains("1 of 2 failed"));

    fs::write(&manifest, "missing.png,a.png,b.png,none\n").unwrap();
    let o = run(&["eval", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_writes_requested_images() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--out-dir", dir.path().to_str().unwrap(), "--count", "2", "--size", "40", "--seed", "3", "--format", "pgm"]);
    assert_eq!(o.status.code(), Some(0));
    let a = load_image(dir.path().join("synthetic_1.pgm")).unwrap();
    assert_eq!(a.dims(), (40, 40));
}
