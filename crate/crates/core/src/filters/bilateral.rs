use super::{check_odd, check_positive, Result};
use crate::imaging::GrayImage;
use crate::Real;

/// Bilateral filter over a `k`×`k` window.
///
/// Weight of neighbor `q` for center `p`:
/// `exp(−|p−q|²/2σs²) · exp(−(I(p)−I(q))²/2σr²)`, normalized per pixel.
pub fn bilateral_filter<T: Real>(
    img: &GrayImage<T>,
    sigma_spatial: f64,
    sigma_range: f64,
    k: usize,
) -> Result<GrayImage<T>> {
    check_positive("bilateral spatial sigma", sigma_spatial)?;
    check_positive("bilateral range sigma", sigma_range)?;
    check_odd("bilateral kernel", k)?;
    let r = (k / 2) as isize;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dy * dy + dx * dx) as f64))
        .map(|d2| (-d2 / (2.0 * sigma_spatial * sigma_spatial)).exp())
        .collect();
    let range_scale = 1.0 / (2.0 * sigma_range * sigma_range);
    let (h, w) = img.dims();
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let center = img.get_replicated(y, x).f64();
            let (mut num, mut den) = (0.0, 0.0);
            let mut s = spatial.iter();
            for dy in -r..=r {
                for dx in -r..=r {
                    let q = img.get_replicated(y + dy, x + dx).f64();
                    let d = q - center;
                    let wgt = s.next().expect("one spatial weight per tap")
                        * (-d * d * range_scale).exp();
                    num += wgt * q;
                    den += wgt;
                }
            }
            out.push(T::of(num / den));
        }
    }
    Ok(GrayImage::from_clamped(h, w, out).expect("dims from source"))
}
