use super::{check_odd, check_positive, Result};
use crate::imaging::GrayImage;
use crate::Real;

/// Median of each `k`×`k` neighborhood.
pub fn median_filter<T: Real>(img: &GrayImage<T>, k: usize) -> Result<GrayImage<T>> {
    check_odd("median kernel", k)?;
    let r = (k / 2) as isize;
    let mut window = Vec::with_capacity(k * k);
    let (h, w) = img.dims();
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            window.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    window.push(img.get_replicated(y + dy, x + dx));
                }
            }
            let mid = window.len() / 2;
            let (_, m, _) =
                window.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite pixels"));
            out.push(*m);
        }
    }
    Ok(GrayImage::from_clamped(h, w, out).expect("dims from source"))
}

/// Mean of each `k`×`k` neighborhood.
pub fn average_filter<T: Real>(img: &GrayImage<T>, k: usize) -> Result<GrayImage<T>> {
    check_odd("average kernel", k)?;
    let uniform = vec![1.0 / k as f64; k];
    Ok(separable(img, &uniform))
}

/// Normalized, sampled 1-D Gaussian of odd length `k`.
pub fn gaussian_kernel(sigma: f64, k: usize) -> Result<Vec<f64>> {
    check_positive("gaussian sigma", sigma)?;
    check_odd("gaussian kernel", k)?;
    let r = (k / 2) as f64;
    let raw: Vec<f64> = (0..k)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// Gaussian smoothing with a `k`×`k` sampled kernel, applied as two 1-D passes.
pub fn gaussian_filter<T: Real>(img: &GrayImage<T>, sigma: f64, k: usize) -> Result<GrayImage<T>> {
    let kernel = gaussian_kernel(sigma, k)?;
    Ok(separable(img, &kernel))
}

/// Horizontal then vertical correlation with the same 1-D kernel.
fn separable<T: Real>(img: &GrayImage<T>, kernel: &[f64]) -> GrayImage<T> {
    let (h, w) = img.dims();
    let r = (kernel.len() / 2) as isize;
    let mut rows = vec![0.0f64; h * w];
    for y in 0..h {
        for x in 0..w as isize {
            rows[y * w + x as usize] = kernel
                .iter()
                .enumerate()
                .map(|(i, &kv)| kv * img.get_replicated(y as isize, x + i as isize - r).f64())
                .sum();
        }
    }
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(i, &kv)| {
                    let yy = (y + i as isize - r).clamp(0, h as isize - 1) as usize;
                    kv * rows[yy * w + x]
                })
                .sum();
            out.push(T::of(v));
        }
    }
    GrayImage::from_clamped(h, w, out).expect("dims from source")
}
