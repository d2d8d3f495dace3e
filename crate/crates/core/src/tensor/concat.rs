use super::{Result, Tensor, TensorError};
use crate::Real;

/// Concatenates two `[N, C, H, W]` tensors along channels; `a` comes first.
pub fn concat_channels<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let [n, ca, h, w] = a.dims4("concat_channels")?;
    let [nb, cb, hb, wb] = b.dims4("concat_channels")?;
    if (n, h, w) != (nb, hb, wb) {
        return Err(TensorError::ShapeMismatch {
            op: "concat_channels",
            expected: vec![n, cb, h, w],
            found: b.shape().to_vec(),
        });
    }
    let (sa, sb) = (ca * h * w, cb * h * w);
    let mut data = Vec::with_capacity(a.len() + b.len());
    for i in 0..n {
        data.extend_from_slice(&a.data()[i * sa..(i + 1) * sa]);
        data.extend_from_slice(&b.data()[i * sb..(i + 1) * sb]);
    }
    Tensor::new(vec![n, ca + cb, h, w], data)
}

/// Inverse of [`concat_channels`]: the first `first` channels, then the rest.
/// This is also the backward of concatenation.
pub fn split_channels<T: Real>(t: &Tensor<T>, first: usize) -> Result<(Tensor<T>, Tensor<T>)> {
    let [n, c, h, w] = t.dims4("split_channels")?;
    if first > c {
        return Err(TensorError::DimMismatch {
            op: "split_channels",
            dim: "channels",
            expected: first,
            found: c,
        });
    }
    let plane = h * w;
    let (sa, sb) = (first * plane, (c - first) * plane);
    let mut a = Vec::with_capacity(n * sa);
    let mut b = Vec::with_capacity(n * sb);
    for chunk in t.data().chunks(c * plane) {
        a.extend_from_slice(&chunk[..sa]);
        b.extend_from_slice(&chunk[sa..]);
    }
    Ok((
        Tensor::new(vec![n, first, h, w], a)?,
        Tensor::new(vec![n, c - first, h, w], b)?,
    ))
}
