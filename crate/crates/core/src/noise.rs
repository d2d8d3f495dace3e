//! Multiplicative speckle simulation.
//!
//! The degraded image is `g = clip(f + f·η, 0, 1)` with `η ~ N(0, σ²)` drawn
//! independently per pixel. Normals come from `rand_distr::StandardNormal`
//! (ziggurat) over a `ChaCha8Rng` stream seeded from the noise seed, scaled
//! by `σ`.

use rand_distr::{Distribution, StandardNormal};

use crate::imaging::GrayImage;
use crate::{rng, Real};

/// The five variances of the benchmark grid.
pub const CANONICAL_VARIANCES: [f64; 5] = [0.08, 0.1, 0.3, 0.5, 0.7];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise variance must be finite and non-negative, got {0}")]
    InvalidVariance(f64),
    #[error("variance grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, seed: u64) -> Result<Self, NoiseError> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(NoiseError::InvalidVariance(variance));
        }
        Ok(Self { variance, seed })
    }
}

/// Applies speckle to `img`. Variance zero returns an exact copy.
pub fn add_speckle<T: Real>(
    img: &GrayImage<T>,
    spec: NoiseSpec,
) -> Result<GrayImage<T>, NoiseError> {
    let spec = NoiseSpec::new(spec.variance, spec.seed)?;
    if spec.variance == 0.0 {
        return Ok(img.clone());
    }
    let sigma = spec.variance.sqrt();
    let mut rng = rng::stream(spec.seed, &[]);
    let (h, w) = img.dims();
    let pixels = img
        .pixels()
        .iter()
        .map(|&f| {
            let eta: f64 = StandardNormal.sample(&mut rng);
            let f = f.f64();
            T::of(f + f * sigma * eta)
        })
        .collect();
    Ok(GrayImage::from_clamped(h, w, pixels).expect("dims come from a valid image"))
}

/// One noisy copy per variance. The copy at index `i` uses the sub-seed
/// `derive_seed(seed, [i])`.
pub fn noise_grid<T: Real>(
    img: &GrayImage<T>,
    variances: &[f64],
    seed: u64,
) -> Result<Vec<(f64, GrayImage<T>)>, NoiseError> {
    if variances.is_empty() {
        return Err(NoiseError::EmptyGrid);
    }
    variances
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let spec = NoiseSpec::new(v, grid_seed(seed, i))?;
            Ok((v, add_speckle(img, spec)?))
        })
        .collect()
}

/// Sub-seed of the `index`-th variance of a grid.
pub fn grid_seed(seed: u64, index: usize) -> u64 {
    rng::derive_seed(seed, &[index as u64])
}
