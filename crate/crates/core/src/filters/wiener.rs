use super::{check_odd, Result};
use crate::imaging::GrayImage;
use crate::Real;

const VARIANCE_FLOOR: f64 = 1e-12;

/// Local-statistics (Lee-type) adaptive Wiener filter.
///
/// With `μ`, `σ²` the mean and population variance of the `window`×`window`
/// neighborhood and `ν²` the mean of all local variances (the noise power
/// estimate): `f̂ = μ + max(σ² − ν², 0) / max(σ², ε) · (g − μ)`, clipped to
/// `[0, 1]`.
pub fn wiener_filter<T: Real>(img: &GrayImage<T>, window: usize) -> Result<GrayImage<T>> {
    check_odd("wiener window", window)?;
    let (h, w) = img.dims();
    let r = (window / 2) as isize;
    let count = (window * window) as f64;
    let mut means = Vec::with_capacity(h * w);
    let mut vars = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut s, mut s2) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = img.get_replicated(y + dy, x + dx).f64();
                    s += v;
                    s2 += v * v;
                }
            }
            let mean = s / count;
            means.push(mean);
            vars.push((s2 / count - mean * mean).max(0.0));
        }
    }
    let noise = vars.iter().sum::<f64>() / vars.len() as f64;
    let out = img
        .pixels()
        .iter()
        .zip(means.iter().zip(&vars))
        .map(|(&g, (&mu, &var))| {
            let gain = (var - noise).max(0.0) / var.max(VARIANCE_FLOOR);
            T::of(mu + gain * (g.f64() - mu))
        })
        .collect();
    Ok(GrayImage::from_clamped(h, w, out).expect("dims from source"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_half_collapses_to_local_mean() {
        // Left half flat at 0.3, right half a high-variance pattern.
        let img = GrayImage::<f64>::from_fn(12, 12, |y, x| {
            if x < 6 {
                0.3
            } else if (x + y) % 2 == 0 {
                0.9
            } else {
                0.1
            }
        });
        let out = wiener_filter(&img, 3).unwrap();
        for y in 0..12 {
            for x in 0..5 {
                assert!((out.get(y, x) - 0.3).abs() < 1e-6);
            }
        }
        // The busy half sits above the average variance and is left mostly intact.
        assert!((out.get(6, 8) - img.get(6, 8)).abs() < 0.5);
    }

    #[test]
    fn even_window_rejected() {
        assert!(wiener_filter(&GrayImage::<f32>::filled(4, 4, 0.1), 2).is_err());
    }
}
