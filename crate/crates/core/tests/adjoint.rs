//! The transposed convolution is the adjoint of the strided convolution with
//! the same weights: <conv(x), y> = <tconv(y), x> when both biases are zero.

use rand::Rng;
use speckle_core::rng::stream;
use speckle_core::tensor::*;

#[test]
fn inner_product_identity() {
    for seed in 0..25u64 {
        let mut rng = stream(seed, &[0xAD]);
        let (n, c, f) = (
            rng.random_range(1..3),
            rng.random_range(1..4),
            rng.random_range(1..4),
        );
        let k = rng.random_range(1..4);
        let stride = rng.random_range(1..3);
        // Spatial sizes where the strided convolution tiles the input exactly.
        let (oh, ow) = (rng.random_range(1..5), rng.random_range(1..5));
        let (h, w) = ((oh - 1) * stride + k, (ow - 1) * stride + k);
        let mut rand =
            |shape: &[usize]| Tensor::<f64>::from_fn(shape, |_| rng.random_range(-1.0..1.0));
        let weights = rand(&[f, c, k, k]);
        let x = rand(&[n, c, h, w]);
        let y = rand(&[n, f, oh, ow]);

        let forward = ConvParams::new(weights.clone(), Tensor::zeros(&[f]), stride, 0).unwrap();
        let cx = conv2d(&x, &forward).unwrap();
        assert_eq!(cx.shape(), y.shape());

        // Transposed layout is [in, out, k, k]: here "in" is the conv's f.
        let adjoint = ConvParams::new(weights, Tensor::zeros(&[c]), stride, 0).unwrap();
        let ty = transposed_conv2d(&y, &adjoint).unwrap();
        assert_eq!(ty.shape(), x.shape());

        let lhs = cx.dot(&y).unwrap();
        let rhs = ty.dot(&x).unwrap();
        assert!(
            (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
            "seed {seed}: {lhs} vs {rhs}"
        );
    }
}
