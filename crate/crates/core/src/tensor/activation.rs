use super::{Result, Tensor};
use crate::Real;

pub fn relu<T: Real>(input: &Tensor<T>) -> Tensor<T> {
    input.map(|v| v.max(T::zero()))
}

/// Masks `upstream` where the forward input was `<= 0`.
pub fn relu_backward<T: Real>(input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    input.zip_map(upstream, "relu_backward", |x, u| {
        if x > T::zero() {
            u
        } else {
            T::zero()
        }
    })
}

pub fn sigmoid<T: Real>(input: &Tensor<T>) -> Tensor<T> {
    input.map(sigmoid_scalar)
}

#[inline]
fn sigmoid_scalar<T: Real>(x: T) -> T {
    // Evaluated on the side that cannot overflow exp().
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Backward of [`sigmoid`], expressed through the forward *output* `s`:
/// `ds/dx = s·(1 − s)`.
pub fn sigmoid_backward<T: Real>(output: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    output.zip_map(upstream, "sigmoid_backward", |s, u| u * s * (T::one() - s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_examples() {
        let x = Tensor::<f32>::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let neg = Tensor::<f32>::from_fn(&[2, 3], |i| -(i as f32) - 0.5);
        assert!(relu(&neg).data().iter().all(|&v| v == 0.0));
        let g = relu_backward(&x, &Tensor::full(&[3], 1.0)).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn sigmoid_examples() {
        let x = Tensor::<f64>::new(vec![3], vec![0.0, 20.0, -800.0]).unwrap();
        let s = sigmoid(&x);
        assert_eq!(s.data()[0], 0.5);
        assert!((s.data()[1] - 1.0).abs() < 1e-8);
        assert!(s.data()[2] >= 0.0 && s.data()[2].is_finite());
        let g = sigmoid_backward(&s, &Tensor::full(&[3], 1.0)).unwrap();
        assert_eq!(g.data()[0], 0.25);
        let h = 1e-6_f64;
        let fd = (sigmoid_scalar(h) - sigmoid_scalar(-h)) / (2.0 * h);
        assert!((fd - 0.25).abs() < 1e-9);
    }

    #[test]
    fn sigmoid_output_in_open_unit_interval_for_moderate_inputs() {
        let x = Tensor::<f32>::from_fn(&[64], |i| (i as f32 - 32.0) * 0.4);
        assert!(sigmoid(&x).data().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
