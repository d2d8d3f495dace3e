use super::{GradTensor, Result, Tensor};
use crate::Real;

/// Per-parameter Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub first_moment: Tensor<T>,
    pub second_moment: Tensor<T>,
    pub step_count: u64,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Real> AdamState<T> {
    /// Fresh state with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(shape: &[usize]) -> Self {
        Self::with_hyper(shape, T::of(0.9), T::of(0.999), T::of(1e-8))
    }

    pub fn with_hyper(shape: &[usize], beta1: T, beta2: T, epsilon: T) -> Self {
        Self {
            first_moment: Tensor::zeros(shape),
            second_moment: Tensor::zeros(shape),
            step_count: 0,
            beta1,
            beta2,
            epsilon,
        }
    }
}

/// One bias-corrected Adam update of `param.value` from `param.grad`.
///
/// The gradient accumulator is left untouched; callers zero it between steps.
pub fn adam_step<T: Real>(
    param: &mut GradTensor<T>,
    state: &mut AdamState<T>,
    lr: T,
) -> Result<()> {
    let shape = param.value.shape().to_vec();
    param.grad.expect_shape(&shape, "adam_step grad")?;
    state
        .first_moment
        .expect_shape(&shape, "adam_step first moment")?;
    state
        .second_moment
        .expect_shape(&shape, "adam_step second moment")?;

    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);
    let one = T::one();

    let values = param.value.data_mut();
    let m = state.first_moment.data_mut();
    let v = state.second_moment.data_mut();
    for (((p, &g), m), v) in values.iter_mut().zip(param.grad.data()).zip(m).zip(v) {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_fresh_parameter_unchanged() {
        let mut p = GradTensor::new(Tensor::<f32>::from_fn(&[4], |i| i as f32 - 1.5));
        let before = p.value.clone();
        let mut s = AdamState::new(&[4]);
        for _ in 0..5 {
            adam_step(&mut p, &mut s, 1e-2).unwrap();
        }
        assert_eq!(p.value, before);
        assert_eq!(s.step_count, 5);
    }

    #[test]
    fn moments_decay_under_zero_gradient() {
        let mut p = GradTensor::new(Tensor::<f64>::zeros(&[2]));
        let mut s = AdamState::new(&[2]);
        s.first_moment = Tensor::full(&[2], 1.0);
        s.second_moment = Tensor::full(&[2], 1.0);
        adam_step(&mut p, &mut s, 1e-3).unwrap();
        assert!((s.first_moment.data()[0] - 0.9).abs() < 1e-15);
        assert!((s.second_moment.data()[0] - 0.999).abs() < 1e-15);
    }

    #[test]
    fn first_step_is_bounded_by_lr() {
        let lr = 1e-3;
        let grads = [3.0, -0.5, 1e-4, -250.0];
        let mut p = GradTensor::new(Tensor::<f64>::zeros(&[4]));
        p.grad = Tensor::new(vec![4], grads.to_vec()).unwrap();
        let mut s = AdamState::new(&[4]);
        adam_step(&mut p, &mut s, lr).unwrap();
        for (&g, &v) in grads.iter().zip(p.value.data()) {
            // m̂ = g, v̂ = g², so Δ = −lr·g/(|g| + ε)
            let expected = -lr * g / (g.abs() + 1e-8);
            assert!((v - expected).abs() < 1e-15);
            assert!(v.abs() <= lr * (1.0 + 1e-12));
            assert_eq!(v.signum(), -g.signum());
        }
    }

    #[test]
    fn two_step_hand_trace() {
        // g = 0.5 both steps, lr = 0.1.
        // step 1: m = 0.05, v = 0.00025, m̂ = 0.5, v̂ = 0.25, Δ = 0.1·0.5/(0.5+1e-8)
        // step 2: m = 0.095, v = 0.00049975, m̂ = 0.095/0.19 = 0.5,
        //         v̂ = 0.00049975/0.001999 = 0.25, Δ identical to step 1.
        let mut p = GradTensor::new(Tensor::<f64>::full(&[1], 1.0));
        p.grad = Tensor::full(&[1], 0.5);
        let mut s = AdamState::new(&[1]);
        let step = 0.1 * 0.5 / (0.5 + 1e-8);
        adam_step(&mut p, &mut s, 0.1).unwrap();
        assert!((p.value.data()[0] - (1.0 - step)).abs() < 1e-14);
        adam_step(&mut p, &mut s, 0.1).unwrap();
        assert!((s.first_moment.data()[0] - 0.095).abs() < 1e-15);
        assert!((s.second_moment.data()[0] - 0.00049975).abs() < 1e-15);
        assert!((p.value.data()[0] - (1.0 - 2.0 * step)).abs() < 1e-12);
        assert_eq!(s.step_count, 2);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = GradTensor::new(Tensor::<f32>::zeros(&[3]));
        let mut s = AdamState::new(&[2]);
        assert!(adam_step(&mut p, &mut s, 1e-3).is_err());
    }
}
