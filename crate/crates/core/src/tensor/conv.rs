//! 2-D convolution (cross-correlation convention, no kernel flip) and its
//! adjoint, the transposed convolution.
//!
//! Work is split across output planes with rayon. Each plane is accumulated
//! sequentially in a fixed order, so results do not depend on thread count.

use rayon::prelude::*;

use super::{Result, Tensor, TensorError};
use crate::Real;

/// Convolution parameters.
///
/// For [`conv2d`] the weights are laid out `[out_ch, in_ch, kh, kw]` and the
/// bias has `out_ch` entries. For [`transposed_conv2d`] the weights are laid
/// out `[in_ch, out_ch, kh, kw]` (the layout of the convolution it is the
/// adjoint of) and the bias has `out_ch = weights.shape[1]` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams<T> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
    pub stride: usize,
    pub padding: usize,
}

/// Gradients returned by the backward kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Real> ConvParams<T> {
    pub fn new(weights: Tensor<T>, bias: Tensor<T>, stride: usize, padding: usize) -> Result<Self> {
        weights.dims4("ConvParams")?;
        if stride == 0 {
            return Err(TensorError::InvalidParam("stride must be positive".into()));
        }
        if weights.shape()[2] == 0 || weights.shape()[3] == 0 {
            return Err(TensorError::InvalidParam(
                "kernel dims must be positive".into(),
            ));
        }
        Ok(Self {
            weights,
            bias,
            stride,
            padding,
        })
    }

    /// Zero-initialized parameters for a plain convolution.
    pub fn zeros(out_ch: usize, in_ch: usize, k: usize, stride: usize, padding: usize) -> Self {
        Self {
            weights: Tensor::zeros(&[out_ch, in_ch, k, k]),
            bias: Tensor::zeros(&[out_ch]),
            stride,
            padding,
        }
    }

    fn check_bias(&self, op: &'static str, expected: usize) -> Result<()> {
        self.bias.expect_shape(&[expected], op)
    }
}

/// Shape bookkeeping shared by the forward and adjoint kernels. `c` is the
/// channel count of the convolution *input*, `f` of its output.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    f: usize,
    kh: usize,
    kw: usize,
    oh: usize,
    ow: usize,
    stride: usize,
    pad: usize,
}

impl Geometry {
    fn conv(
        op: &'static str,
        input: [usize; 4],
        kernel: [usize; 4],
        stride: usize,
        pad: usize,
    ) -> Result<Self> {
        let [n, c, h, w] = input;
        let [f, kc, kh, kw] = kernel;
        if kc != c {
            return Err(TensorError::DimMismatch {
                op,
                dim: "input channels",
                expected: kc,
                found: c,
            });
        }
        if h + 2 * pad < kh || w + 2 * pad < kw {
            return Err(TensorError::InputTooSmall {
                op,
                height: h + 2 * pad,
                width: w + 2 * pad,
                kh,
                kw,
            });
        }
        Ok(Self {
            n,
            c,
            h,
            w,
            f,
            kh,
            kw,
            oh: (h + 2 * pad - kh) / stride + 1,
            ow: (w + 2 * pad - kw) / stride + 1,
            stride,
            pad,
        })
    }

    fn in_plane(&self) -> usize {
        self.h * self.w
    }

    fn out_plane(&self) -> usize {
        self.oh * self.ow
    }

    fn kernel_len(&self) -> usize {
        self.c * self.kh * self.kw
    }
}

/// Output positions `o` in `[lo, hi)` with `0 <= o*stride + k - pad < in_len`.
#[inline]
fn valid_range(
    k: usize,
    pad: usize,
    stride: usize,
    in_len: usize,
    out_len: usize,
) -> (usize, usize) {
    let lo = if k >= pad {
        0
    } else {
        (pad - k).div_ceil(stride)
    };
    let hi = if in_len + pad < k + 1 {
        0
    } else {
        ((in_len - 1 + pad - k) / stride + 1).min(out_len)
    };
    (lo, hi.max(lo))
}

/// Accumulates `out_row[o] += wv * in_row[o*stride + k - pad]` over `o` in `[lo, hi)`.
#[inline]
fn axpy_gather<T: Real>(
    out_row: &mut [T],
    in_row: &[T],
    wv: T,
    lo: usize,
    hi: usize,
    k: usize,
    g: &Geometry,
) {
    if g.stride == 1 {
        let start = lo + k - g.pad;
        for (o, &i) in out_row[lo..hi]
            .iter_mut()
            .zip(&in_row[start..start + (hi - lo)])
        {
            *o += wv * i;
        }
    } else {
        for o in lo..hi {
            out_row[o] += wv * in_row[o * g.stride + k - g.pad];
        }
    }
}

/// Accumulates `in_row[o*stride + k - pad] += wv * out_row[o]` over `o` in `[lo, hi)`.
#[inline]
fn axpy_scatter<T: Real>(
    in_row: &mut [T],
    out_row: &[T],
    wv: T,
    lo: usize,
    hi: usize,
    k: usize,
    g: &Geometry,
) {
    if g.stride == 1 {
        let start = lo + k - g.pad;
        for (i, &o) in in_row[start..start + (hi - lo)]
            .iter_mut()
            .zip(&out_row[lo..hi])
        {
            *i += wv * o;
        }
    } else {
        for o in lo..hi {
            in_row[o * g.stride + k - g.pad] += wv * out_row[o];
        }
    }
}

/// `out[n, f] = bias[f] + sum_c x[n, c] ⋆ w[f, c]`.
fn correlate<T: Real>(x: &[T], weights: &[T], bias: Option<&[T]>, g: &Geometry) -> Vec<T> {
    let mut out = vec![T::zero(); g.n * g.f * g.out_plane()];
    if g.out_plane() == 0 {
        return out;
    }
    out.par_chunks_mut(g.out_plane())
        .enumerate()
        .for_each(|(idx, plane)| {
            let (n, f) = (idx / g.f, idx % g.f);
            if let Some(b) = bias {
                plane.iter_mut().for_each(|v| *v = b[f]);
            }
            let xn = &x[n * g.c * g.in_plane()..(n + 1) * g.c * g.in_plane()];
            let wf = &weights[f * g.kernel_len()..(f + 1) * g.kernel_len()];
            for c in 0..g.c {
                let xc = &xn[c * g.in_plane()..(c + 1) * g.in_plane()];
                for ky in 0..g.kh {
                    let (y_lo, y_hi) = valid_range(ky, g.pad, g.stride, g.h, g.oh);
                    for kx in 0..g.kw {
                        let wv = wf[(c * g.kh + ky) * g.kw + kx];
                        let (x_lo, x_hi) = valid_range(kx, g.pad, g.stride, g.w, g.ow);
                        for oy in y_lo..y_hi {
                            let iy = oy * g.stride + ky - g.pad;
                            axpy_gather(
                                &mut plane[oy * g.ow..(oy + 1) * g.ow],
                                &xc[iy * g.w..(iy + 1) * g.w],
                                wv,
                                x_lo,
                                x_hi,
                                kx,
                                g,
                            );
                        }
                    }
                }
            }
        });
    out
}

/// Adjoint of [`correlate`] with respect to `x`: maps `[N, F, oh, ow]` back to
/// `[N, C, h, w]`.
fn correlate_adjoint<T: Real>(up: &[T], weights: &[T], g: &Geometry) -> Vec<T> {
    let mut out = vec![T::zero(); g.n * g.c * g.in_plane()];
    if g.in_plane() == 0 {
        return out;
    }
    out.par_chunks_mut(g.in_plane())
        .enumerate()
        .for_each(|(idx, plane)| {
            let (n, c) = (idx / g.c, idx % g.c);
            for f in 0..g.f {
                let uf = &up[(n * g.f + f) * g.out_plane()..(n * g.f + f + 1) * g.out_plane()];
                for ky in 0..g.kh {
                    let (y_lo, y_hi) = valid_range(ky, g.pad, g.stride, g.h, g.oh);
                    for kx in 0..g.kw {
                        let wv = weights[((f * g.c + c) * g.kh + ky) * g.kw + kx];
                        if wv == T::zero() {
                            continue;
                        }
                        let (x_lo, x_hi) = valid_range(kx, g.pad, g.stride, g.w, g.ow);
                        for oy in y_lo..y_hi {
                            let iy = oy * g.stride + ky - g.pad;
                            axpy_scatter(
                                &mut plane[iy * g.w..(iy + 1) * g.w],
                                &uf[oy * g.ow..(oy + 1) * g.ow],
                                wv,
                                x_lo,
                                x_hi,
                                kx,
                                g,
                            );
                        }
                    }
                }
            }
        });
    out
}

/// Gradient of `sum(up ⊙ correlate(x, w))` with respect to `w`.
fn correlate_weight_grad<T: Real>(x: &[T], up: &[T], g: &Geometry) -> Vec<T> {
    let mut out = vec![T::zero(); g.f * g.kernel_len()];
    if g.kernel_len() == 0 {
        return out;
    }
    out.par_chunks_mut(g.kernel_len())
        .enumerate()
        .for_each(|(f, wf)| {
            for c in 0..g.c {
                for ky in 0..g.kh {
                    let (y_lo, y_hi) = valid_range(ky, g.pad, g.stride, g.h, g.oh);
                    for kx in 0..g.kw {
                        let (x_lo, x_hi) = valid_range(kx, g.pad, g.stride, g.w, g.ow);
                        let mut acc = 0.0f64;
                        for n in 0..g.n {
                            let xc =
                                &x[(n * g.c + c) * g.in_plane()..(n * g.c + c + 1) * g.in_plane()];
                            let uf = &up
                                [(n * g.f + f) * g.out_plane()..(n * g.f + f + 1) * g.out_plane()];
                            for oy in y_lo..y_hi {
                                let iy = oy * g.stride + ky - g.pad;
                                let xrow = &xc[iy * g.w..(iy + 1) * g.w];
                                let urow = &uf[oy * g.ow..(oy + 1) * g.ow];
                                let mut row = T::zero();
                                if g.stride == 1 {
                                    let start = x_lo + kx - g.pad;
                                    for (&u, &xv) in urow[x_lo..x_hi]
                                        .iter()
                                        .zip(&xrow[start..start + (x_hi - x_lo)])
                                    {
                                        row += u * xv;
                                    }
                                } else {
                                    for ox in x_lo..x_hi {
                                        row += urow[ox] * xrow[ox * g.stride + kx - g.pad];
                                    }
                                }
                                acc += row.f64();
                            }
                        }
                        wf[(c * g.kh + ky) * g.kw + kx] = T::of(acc);
                    }
                }
            }
        });
    out
}

/// Per-channel sum over batch and space of an `[N, C, H, W]` buffer.
fn channel_sums<T: Real>(data: &[T], n: usize, c: usize, plane: usize) -> Vec<T> {
    (0..c)
        .map(|ch| {
            let s: f64 = (0..n)
                .flat_map(|b| data[(b * c + ch) * plane..(b * c + ch + 1) * plane].iter())
                .map(|v| v.f64())
                .sum();
            T::of(s)
        })
        .collect()
}

/// Cross-correlation of an `[N, C, H, W]` batch with `[F, C, kh, kw]` weights.
///
/// Output is `[N, F, H', W']` with `H' = (H + 2·padding − kh)/stride + 1`.
pub fn conv2d<T: Real>(input: &Tensor<T>, params: &ConvParams<T>) -> Result<Tensor<T>> {
    let g = Geometry::conv(
        "conv2d",
        input.dims4("conv2d")?,
        params.weights.dims4("conv2d")?,
        params.stride,
        params.padding,
    )?;
    params.check_bias("conv2d bias", g.f)?;
    let out = correlate(
        input.data(),
        params.weights.data(),
        Some(params.bias.data()),
        &g,
    );
    Tensor::new(vec![g.n, g.f, g.oh, g.ow], out)
}

/// Gradients of a scalar loss through [`conv2d`], given `dL/d output`.
pub fn conv2d_backward<T: Real>(
    input: &Tensor<T>,
    params: &ConvParams<T>,
    upstream: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let g = Geometry::conv(
        "conv2d_backward",
        input.dims4("conv2d_backward")?,
        params.weights.dims4("conv2d_backward")?,
        params.stride,
        params.padding,
    )?;
    params.check_bias("conv2d_backward bias", g.f)?;
    upstream.expect_shape(&[g.n, g.f, g.oh, g.ow], "conv2d_backward upstream")?;
    let up = upstream.data();
    Ok(ConvGrads {
        input: Tensor::new(
            input.shape().to_vec(),
            correlate_adjoint(up, params.weights.data(), &g),
        )?,
        weights: Tensor::new(
            params.weights.shape().to_vec(),
            correlate_weight_grad(input.data(), up, &g),
        )?,
        bias: Tensor::new(vec![g.f], channel_sums(up, g.n, g.f, g.out_plane()))?,
    })
}

/// Geometry of the convolution whose adjoint is the transposed convolution
/// of an `[N, F, H', W']` input.
fn transposed_geometry<T: Real>(
    op: &'static str,
    input: &Tensor<T>,
    params: &ConvParams<T>,
) -> Result<Geometry> {
    let [n, f, ih, iw] = input.dims4(op)?;
    let [wf, c, kh, kw] = params.weights.dims4(op)?;
    if wf != f {
        return Err(TensorError::DimMismatch {
            op,
            dim: "input channels",
            expected: wf,
            found: f,
        });
    }
    let (s, p) = (params.stride, params.padding);
    let full_h = (ih.max(1) - 1) * s + kh;
    let full_w = (iw.max(1) - 1) * s + kw;
    if ih == 0 || iw == 0 || full_h <= 2 * p || full_w <= 2 * p {
        return Err(TensorError::InputTooSmall {
            op,
            height: ih,
            width: iw,
            kh,
            kw,
        });
    }
    let g = Geometry::conv(
        op,
        [n, c, full_h - 2 * p, full_w - 2 * p],
        [f, c, kh, kw],
        s,
        p,
    )?;
    debug_assert_eq!((g.oh, g.ow), (ih, iw));
    Ok(g)
}

/// Transposed convolution: the adjoint of [`conv2d`] with the same weights,
/// plus a per-output-channel bias.
///
/// Input `[N, F, H', W']`, weights `[F, C, kh, kw]`, output `[N, C, H, W]` with
/// `H = (H' − 1)·stride + kh − 2·padding`. A 2×2 kernel at stride 2 exactly
/// doubles the spatial size.
pub fn transposed_conv2d<T: Real>(input: &Tensor<T>, params: &ConvParams<T>) -> Result<Tensor<T>> {
    let g = transposed_geometry("transposed_conv2d", input, params)?;
    params.check_bias("transposed_conv2d bias", g.c)?;
    let mut out = correlate_adjoint(input.data(), params.weights.data(), &g);
    let bias = params.bias.data();
    for (idx, plane) in out.chunks_mut(g.in_plane()).enumerate() {
        let b = bias[idx % g.c];
        plane.iter_mut().for_each(|v| *v += b);
    }
    Tensor::new(vec![g.n, g.c, g.h, g.w], out)
}

/// Gradients of a scalar loss through [`transposed_conv2d`].
pub fn transposed_conv2d_backward<T: Real>(
    input: &Tensor<T>,
    params: &ConvParams<T>,
    upstream: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let g = transposed_geometry("transposed_conv2d_backward", input, params)?;
    params.check_bias("transposed_conv2d_backward bias", g.c)?;
    upstream.expect_shape(&[g.n, g.c, g.h, g.w], "transposed_conv2d_backward upstream")?;
    let up = upstream.data();
    Ok(ConvGrads {
        input: Tensor::new(
            input.shape().to_vec(),
            correlate(up, params.weights.data(), None, &g),
        )?,
        weights: Tensor::new(
            params.weights.shape().to_vec(),
            correlate_weight_grad(up, input.data(), &g),
        )?,
        bias: Tensor::new(vec![g.c], channel_sums(up, g.n, g.c, g.in_plane()))?,
    })
}
