//! Full-reference image quality metrics on unit-range images.

use crate::imaging::GrayImage;
use crate::Real;

/// Side of the SSIM Gaussian window.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("image size mismatch: {a:?} vs {b:?}")]
    SizeMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {0:?}")]
    TooSmall((usize, usize)),
    #[error("nothing to evaluate")]
    Empty,
    #[error("{refs} reference images but {tests} test images")]
    Misaligned { refs: usize, tests: usize },
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

fn same_dims<T: Real>(a: &GrayImage<T>, b: &GrayImage<T>) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(MetricsError::SizeMismatch {
            a: a.dims(),
            b: b.dims(),
        });
    }
    Ok(())
}

/// Mean squared pixel difference.
pub fn mse<T: Real>(reference: &GrayImage<T>, test: &GrayImage<T>) -> Result<f64> {
    same_dims(reference, test)?;
    let sum: f64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(&a, &b)| {
            let d = a.f64() - b.f64();
            d * d
        })
        .sum();
    Ok(sum / reference.pixels().len() as f64)
}

/// `10·log10(peak²/mse)`; `+∞` when `mse` is zero.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// Peak signal-to-noise ratio in dB.
pub fn psnr<T: Real>(reference: &GrayImage<T>, test: &GrayImage<T>, peak: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(reference, test)?, peak))
}

fn ssim_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as f64;
    let raw: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable weighted sum over every fully contained window.
fn valid_filter(data: &[f64], h: usize, w: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * data[y * w + x + i])
                .sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * rows[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean structural similarity over all 11×11 Gaussian windows (σ = 1.5)
/// that fit inside the image, with `K1 = 0.01`, `K2 = 0.03`, `L = 1`.
pub fn ssim<T: Real>(reference: &GrayImage<T>, test: &GrayImage<T>) -> Result<f64> {
    same_dims(reference, test)?;
    let (h, w) = reference.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(MetricsError::TooSmall((h, w)));
    }
    let kernel = ssim_window();
    let x: Vec<f64> = reference.pixels().iter().map(|p| p.f64()).collect();
    let y: Vec<f64> = test.pixels().iter().map(|p| p.f64()).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let [mx, my, sxx, syy, sxy] = [&x, &y, &xx, &yy, &xy].map(|d| valid_filter(d, h, w, &kernel));
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let n = mx.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cxy = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

/// All three metrics of one image pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScores {
    pub psnr_db: f64,
    pub ssim: f64,
    pub mse: f64,
}

pub fn score_pair<T: Real>(reference: &GrayImage<T>, test: &GrayImage<T>) -> Result<PairScores> {
    let mse = mse(reference, test)?;
    Ok(PairScores {
        psnr_db: psnr_from_mse(mse, 1.0),
        ssim: ssim(reference, test)?,
        mse,
    })
}

/// Aggregate scores of one method at one noise variance.
///
/// PSNR is averaged in the dB domain while MSE is averaged linearly, so
/// `psnr_db = 10·log10(1/mse)` holds exactly for a single image but only as
/// `psnr_db >= 10·log10(1/mse)` (Jensen) for larger sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub variance: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub mse: f64,
    pub n_images: usize,
    pub seed: u64,
}

impl MetricsRow {
    /// Averages per-pair scores.
    pub fn from_scores(
        method: &str,
        variance: f64,
        seed: u64,
        scores: &[PairScores],
    ) -> Result<Self> {
        if scores.is_empty() {
            return Err(MetricsError::Empty);
        }
        let n = scores.len() as f64;
        let mean = |f: fn(&PairScores) -> f64| scores.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            method: method.to_string(),
            variance,
            psnr_db: mean(|s| s.psnr_db),
            ssim: mean(|s| s.ssim),
            mse: mean(|s| s.mse),
            n_images: scores.len(),
            seed,
        })
    }

    /// Checks the aggregation identity between the PSNR and MSE columns, up to
    /// `slack` dB of reporting rounding.
    pub fn psnr_mse_consistent(&self, slack: f64) -> bool {
        let pooled = psnr_from_mse(self.mse, 1.0);
        if self.n_images == 1 {
            (self.psnr_db - pooled).abs() <= slack
                || (self.psnr_db.is_infinite() && pooled.is_infinite())
        } else {
            self.psnr_db + slack >= pooled
        }
    }
}

/// Scores aligned reference/test lists and averages them into one row.
pub fn evaluate_method<T: Real>(
    references: &[GrayImage<T>],
    tests: &[GrayImage<T>],
    method: &str,
    variance: f64,
    seed: u64,
) -> Result<MetricsRow> {
    if references.len() != tests.len() {
        return Err(MetricsError::Misaligned {
            refs: references.len(),
            tests: tests.len(),
        });
    }
    let scores = references
        .iter()
        .zip(tests)
        .map(|(r, t)| score_pair(r, t))
        .collect::<Result<Vec<_>>>()?;
    MetricsRow::from_scores(method, variance, seed, &scores)
}
