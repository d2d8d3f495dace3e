use super::{Result, Tensor};
use crate::Real;

/// Mean squared error and its gradient `2(pred − target)/count`.
pub fn mse_loss<T: Real>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    pred.expect_shape(target.shape(), "mse_loss")?;
    let count = pred.len().max(1) as f64;
    let sq: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let d = p.f64() - t.f64();
            d * d
        })
        .sum();
    let scale = T::of(2.0 / count);
    let grad = pred.zip_map(target, "mse_loss", |p, t| scale * (p - t))?;
    Ok((T::of(sq / count), grad))
}
