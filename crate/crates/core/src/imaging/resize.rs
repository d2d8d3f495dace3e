use super::{GrayImage, ImagingError, Result};
use crate::Real;

/// Bilinear resampling with half-pixel-center alignment and clamped borders.
pub fn resize_bilinear<T: Real>(
    img: &GrayImage<T>,
    out_h: usize,
    out_w: usize,
) -> Result<GrayImage<T>> {
    let (h, w) = img.dims();
    if h < 2 || w < 2 {
        return Err(ImagingError::Degenerate {
            op: "resize_bilinear",
            height: h,
            width: w,
        });
    }
    if out_h == 0 || out_w == 0 {
        return Err(ImagingError::EmptyImage {
            height: out_h,
            width: out_w,
        });
    }
    let taps = |out: usize, src: usize| -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / out as f64;
        (0..out)
            .map(|o| {
                let s = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(src - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let ys = taps(out_h, h);
    let xs = taps(out_w, w);
    let mut pixels = Vec::with_capacity(out_h * out_w);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = img.get(y0, x0).f64() * (1.0 - fx) + img.get(y0, x1).f64() * fx;
            let bottom = img.get(y1, x0).f64() * (1.0 - fx) + img.get(y1, x1).f64() * fx;
            pixels.push(T::of(top * (1.0 - fy) + bottom * fy));
        }
    }
    GrayImage::from_clamped(out_h, out_w, pixels)
}
