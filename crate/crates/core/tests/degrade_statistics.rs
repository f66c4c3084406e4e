use lrr_fusion_core::degrade::{add_noise, gaussian_kernel, make_focus_pair, FocusSpec, NoiseSpec};
use lrr_fusion_core::fusion::spatial_frequency;
use lrr_fusion_core::wavelet::Band;
use lrr_fusion_core::Image;
use proptest::prelude::*;

// exp(-r²/98) at r² = 0, 1, 2, normalized over the 3x3 grid
const CENTER: f64 = 0.11263054840683998;
const EDGE: f64 = 0.1114871009338527;
const CORNER: f64 = 0.11035526196443726;

#[test]
fn blur_kernel_matches_closed_form() {
    let k = gaussian_kernel(3, 7.0).unwrap();
    let expected = [CORNER, EDGE, CORNER, EDGE, CENTER, EDGE, CORNER, EDGE, CORNER];
    for (got, want) in k.as_slice().iter().zip(expected) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
    assert!((k.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // all nine weights are close to uniform
    assert!(k.as_slice().iter().all(|&v| (0.1088..=0.1127).contains(&v)));
}

fn kernel_symmetries_hold(size: usize, sigma: f64) -> bool {
    let k = gaussian_kernel(size, sigma).unwrap();
    let n = size;
    let sum: f64 = k.as_slice().iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return false;
    }
    (0..n).all(|i| {
        (0..n).all(|j| {
            let v = k[(i, j)];
            v == k[(j, n - 1 - i)] && v == k[(i, n - 1 - j)] && v == k[(n - 1 - i, j)] && v == k[(j, i)]
        })
    })
}

proptest! {
    #[test]
    fn kernels_are_normalized_and_symmetric(half in 1usize..6, sigma in 0.1f64..20.0) {
        prop_assert!(kernel_symmetries_hold(2 * half + 1, sigma));
    }
}

fn mid_gray(n: usize) -> Image {
    Image::constant(n, n, 0.5).unwrap()
}

#[test]
fn salt_pepper_fraction() {
    let img = mid_gray(512);
    let out = add_noise(&img, &NoiseSpec::salt_pepper(0.02, 42)).unwrap();
    let corrupted = out.as_slice().iter().filter(|&&v| v != 0.5).count();
    let fraction = corrupted as f64 / (512.0 * 512.0);
    assert!((0.015..=0.025).contains(&fraction), "{fraction}");
    let salt = out.as_slice().iter().filter(|&&v| v == 1.0).count();
    let pepper = out.as_slice().iter().filter(|&&v| v == 0.0).count();
    assert_eq!(salt + pepper, corrupted);
    // equal odds of salt and pepper: each about half of the corrupted pixels
    let ratio = salt as f64 / corrupted as f64;
    assert!((0.45..=0.55).contains(&ratio), "{ratio}");
}

#[test]
fn gaussian_sample_variance() {
    let img = mid_gray(512);
    let out = add_noise(&img, &NoiseSpec::gaussian(0.01, 7)).unwrap();
    let diffs: Vec<f64> = out.as_slice().iter().map(|v| v - 0.5).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    assert!((var - 0.01).abs() <= 0.001, "{var}");
    assert!(mean.abs() < 0.002, "{mean}");
}

#[test]
fn gaussian_mean_shift() {
    let img = Image::constant(256, 256, 0.3).unwrap();
    let spec = NoiseSpec { mean: 0.1, ..NoiseSpec::gaussian(0.0005, 3) };
    let out = add_noise(&img, &spec).unwrap();
    let mean = out.as_slice().iter().sum::<f64>() / out.as_slice().len() as f64;
    assert!((mean - 0.4).abs() < 0.002, "{mean}");
}

#[test]
fn poisson_preserves_mean() {
    for c in [0.2, 0.5, 0.8] {
        let img = Image::constant(512, 512, c).unwrap();
        let out = add_noise(&img, &NoiseSpec::poisson(11)).unwrap();
        let mean = out.as_slice().iter().sum::<f64>() / out.as_slice().len() as f64;
        assert!((mean - c).abs() <= 0.02 * c, "{c}: {mean}");
    }
}

#[test]
fn outputs_stay_in_unit_range() {
    let img = Image::from_fn(64, 64, |x, y| ((x + 2 * y) % 17) as f64 / 16.0).unwrap();
    for spec in [NoiseSpec::gaussian(0.01, 1), NoiseSpec::salt_pepper(0.3, 1), NoiseSpec::poisson(1)] {
        let out = add_noise(&img, &spec).unwrap();
        assert!(out.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn same_seed_same_output() {
    let img = Image::from_fn(80, 60, |x, y| (x * y % 13) as f64 / 12.0).unwrap();
    for spec in [NoiseSpec::gaussian(0.001, 9), NoiseSpec::salt_pepper(0.02, 9), NoiseSpec::poisson(9)] {
        let a = add_noise(&img, &spec).unwrap();
        let b = add_noise(&img, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_noise(&img, &spec.with_seed(10)).unwrap());
    }
}

#[test]
fn noise_at_a_pixel_ignores_image_size() {
    // per-pixel streams: pixel i draws the same numbers whatever surrounds it
    let small = mid_gray(16);
    let big = Image::constant(16, 32, 0.5).unwrap();
    let spec = NoiseSpec::gaussian(0.01, 4);
    let a = add_noise(&small, &spec).unwrap();
    let b = add_noise(&big, &spec).unwrap();
    assert_eq!(a.as_slice(), &b.as_slice()[..256]);
}

fn half_sf(img: &Image, left: bool) -> f64 {
    let half = img.width() / 2;
    let (x0, w) = if left { (0, half) } else { (half, img.width() - half) };
    let crop = img.crop(x0, 0, w, img.height()).unwrap();
    spatial_frequency(&Band::from(&crop)).unwrap().value
}

#[test]
fn blurred_half_has_lower_spatial_frequency() {
    let stripes = Image::from_fn(64, 32, |x, _| if (x / 2) % 2 == 0 { 0.9 } else { 0.1 }).unwrap();
    let (focus_right, focus_left) = make_focus_pair(&stripes, &FocusSpec::default()).unwrap();
    assert!(half_sf(&focus_right, true) < half_sf(&focus_right, false));
    assert!(half_sf(&focus_left, false) < half_sf(&focus_left, true));
}
