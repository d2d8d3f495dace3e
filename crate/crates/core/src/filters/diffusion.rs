use super::{check_lambda, check_positive, Result};
use crate::imaging::GrayImage;
use crate::Real;

/// Perona-Malik anisotropic diffusion.
///
/// Explicit scheme over the four nearest neighbors with conduction
/// `c(∇) = exp(−(∇/κ)²)`: `I ← I + λ Σ_d c(∇_d I)·∇_d I`. Borders replicate,
/// so the outward differences there are zero. For `λ ≤ 0.25` each update is
/// a convex combination of neighboring values, hence range preserving.
pub fn anisotropic_diffusion<T: Real>(
    img: &GrayImage<T>,
    iterations: usize,
    kappa: f64,
    lambda: f64,
) -> Result<GrayImage<T>> {
    check_positive("diffusion kappa", kappa)?;
    check_lambda(lambda)?;
    let (h, w) = img.dims();
    let mut cur: Vec<f64> = img.pixels().iter().map(|p| p.f64()).collect();
    let mut next = cur.clone();
    let inv_k2 = 1.0 / (kappa * kappa);
    let flux = |d: f64| (-d * d * inv_k2).exp() * d;
    for _ in 0..iterations {
        for y in 0..h {
            for x in 0..w {
                let c = cur[y * w + x];
                let north = cur[y.saturating_sub(1) * w + x] - c;
                let south = cur[(y + 1).min(h - 1) * w + x] - c;
                let west = cur[y * w + x.saturating_sub(1)] - c;
                let east = cur[y * w + (x + 1).min(w - 1)] - c;
                next[y * w + x] =
                    c + lambda * (flux(north) + flux(south) + flux(east) + flux(west));
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(
        GrayImage::from_clamped(h, w, cur.into_iter().map(T::of).collect())
            .expect("dims from source"),
    )
}
