//! Every filter against a direct per-pixel evaluation of its definition on
//! random 7×7 images, with borders handled by replicating the edge pixels.

use rand::Rng;
use speckle_core::filters::*;
use speckle_core::imaging::GrayImage;
use speckle_core::rng::stream;

const IMAGES: u64 = 50;
const SIDE: usize = 7;
const TOL: f64 = 1e-6;

fn random_image(seed: u64) -> GrayImage<f64> {
    let mut rng = stream(seed, &[0xF1]);
    GrayImage::from_fn(SIDE, SIDE, |_, _| rng.random_range(0.0..1.0))
}

fn neighborhood(img: &GrayImage<f64>, y: usize, x: usize, k: usize) -> Vec<(isize, isize, f64)> {
    let r = (k / 2) as isize;
    let (h, w) = img.dims();
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
            let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
            out.push((dy, dx, img.get(yy, xx)));
        }
    }
    out
}

fn brute(img: &GrayImage<f64>, f: impl Fn(usize, usize) -> f64) -> GrayImage<f64> {
    GrayImage::from_fn(img.height(), img.width(), f)
}

fn assert_matches(name: &str, seed: u64, got: &GrayImage<f64>, want: &GrayImage<f64>) {
    for (i, (a, b)) in got.pixels().iter().zip(want.pixels()).enumerate() {
        assert!(
            (a - b).abs() < TOL,
            "{name}, image {seed}, pixel {i}: {a} vs {b}"
        );
    }
}

#[test]
fn median_matches_sorted_window() {
    for seed in 0..IMAGES {
        let img = random_image(seed);
        for k in [3, 5] {
            let want = brute(&img, |y, x| {
                let mut v: Vec<f64> = neighborhood(&img, y, x, k)
                    .into_iter()
                    .map(|t| t.2)
                    .collect();
                v.sort_by(f64::total_cmp);
                v[v.len() / 2]
            });
            assert_matches("median", seed, &median_filter(&img, k).unwrap(), &want);
        }
    }
}

#[test]
fn average_matches_window_mean() {
    for seed in 0..IMAGES {
        let img = random_image(seed);
        let want = brute(&img, |y, x| {
            let n = neighborhood(&img, y, x, 3);
            n.iter().map(|t| t.2).sum::<f64>() / n.len() as f64
        });
        assert_matches("average", seed, &average_filter(&img, 3).unwrap(), &want);
    }
}

#[test]
fn gaussian_matches_2d_weighted_sum() {
    let sigma: f64 = 1.0;
    for seed in 0..IMAGES {
        let img = random_image(seed);
        let want = brute(&img, |y, x| {
            let n = neighborhood(&img, y, x, 5);
            let wts: Vec<f64> = n
                .iter()
                .map(|&(dy, dx, _)| (-((dy * dy + dx * dx) as f64) / (2.0 * sigma * sigma)).exp())
                .collect();
            let total: f64 = wts.iter().sum();
            n.iter().zip(&wts).map(|(t, w)| t.2 * w).sum::<f64>() / total
        });
        assert_matches(
            "gaussian",
            seed,
            &gaussian_filter(&img, sigma, 5).unwrap(),
            &want,
        );
    }
}

#[test]
fn bilateral_matches_definition() {
    let (ss, sr): (f64, f64) = (2.0, 0.1);
    for seed in 0..IMAGES {
        let img = random_image(seed);
        let want = brute(&img, |y, x| {
            let c = img.get(y, x);
            let (mut num, mut den) = (0.0, 0.0);
            for (dy, dx, q) in neighborhood(&img, y, x, 5) {
                let w = (-((dy * dy + dx * dx) as f64) / (2.0 * ss * ss)).exp()
                    * (-(q - c).powi(2) / (2.0 * sr * sr)).exp();
                num += w * q;
                den += w;
            }
            num / den
        });
        assert_matches(
            "bilateral",
            seed,
            &bilateral_filter(&img, ss, sr, 5).unwrap(),
            &want,
        );
    }
}

#[test]
fn wiener_matches_local_shrinkage() {
    for seed in 0..IMAGES {
        let img = random_image(seed);
        let stats: Vec<(f64, f64)> = (0..SIDE * SIDE)
            .map(|i| {
                let v: Vec<f64> = neighborhood(&img, i / SIDE, i % SIDE, 3)
                    .into_iter()
                    .map(|t| t.2)
                    .collect();
                let mean = v.iter().sum::<f64>() / 9.0;
                let var = v.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / 9.0;
                (mean, var)
            })
            .collect();
        let noise = stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64;
        let want = brute(&img, |y, x| {
            let (mean, var) = stats[y * SIDE + x];
            let gain = if var > 0.0 {
                (var - noise).max(0.0) / var
            } else {
                0.0
            };
            (mean + gain * (img.get(y, x) - mean)).clamp(0.0, 1.0)
        });
        assert_matches("wiener", seed, &wiener_filter(&img, 3).unwrap(), &want);
    }
}

#[test]
fn one_diffusion_step_matches_update_rule() {
    let (kappa, lambda): (f64, f64) = (0.1, 0.25);
    for seed in 0..IMAGES {
        let img = random_image(seed);
        let want = brute(&img, |y, x| {
            let c = img.get(y, x);
            let n = neighborhood(&img, y, x, 3);
            // Four nearest neighbors: offsets with exactly one nonzero component.
            let flux: f64 = n
                .iter()
                .filter(|t| (t.0 == 0) != (t.1 == 0))
                .map(|t| {
                    let d = t.2 - c;
                    (-(d / kappa).powi(2)).exp() * d
                })
                .sum();
            c + lambda * flux
        });
        assert_matches(
            "diffusion",
            seed,
            &anisotropic_diffusion(&img, 1, kappa, lambda).unwrap(),
            &want,
        );
    }
}

/// Median commutes with strictly increasing intensity maps.
#[test]
fn median_commutes_with_monotone_remap() {
    for seed in 0..IMAGES {
        let img = random_image(seed);
        let remap = |v: f64| v * v;
        let mapped = brute(&img, |y, x| remap(img.get(y, x)));
        let a = median_filter(&mapped, 3).unwrap();
        let b = median_filter(&img, 3).unwrap();
        for (p, q) in a.pixels().iter().zip(b.pixels()) {
            assert!((p - remap(*q)).abs() < 1e-12);
        }
    }
}
