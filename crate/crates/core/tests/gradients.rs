//! Central finite-difference checks of every backward pass.
//!
//! Each check contracts the forward output with a random upstream tensor to
//! get a scalar loss, perturbs every input entry by ±1e-3, and compares the
//! numeric gradient with the analytic one in relative L2 norm.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use speckle_core::dae::{Network, NetworkConfig};
use speckle_core::rng::stream;
use speckle_core::tensor::*;

const STEP: f64 = 1e-3;
const TOLERANCE: f64 = 1e-3;
const INSTANCES: u64 = 20;

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| rng.random_range(-1.0..1.0))
}

/// Values whose magnitude stays at least `gap` away from zero.
fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize], gap: f64) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| {
        let m = rng.random_range(gap..1.0);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    })
}

fn numeric_grad(x: &Tensor<f64>, loss: impl Fn(&Tensor<f64>) -> f64) -> Tensor<f64> {
    numeric_grad_with(STEP, x, loss)
}

fn numeric_grad_with(
    step: f64,
    x: &Tensor<f64>,
    loss: impl Fn(&Tensor<f64>) -> f64,
) -> Tensor<f64> {
    let mut probe = x.clone();
    let mut out = Tensor::zeros(x.shape());
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + step;
        let plus = loss(&probe);
        probe.data_mut()[i] = orig - step;
        let minus = loss(&probe);
        probe.data_mut()[i] = orig;
        out.data_mut()[i] = (plus - minus) / (2.0 * step);
    }
    out
}

fn relative_error(analytic: &Tensor<f64>, numeric: &Tensor<f64>) -> f64 {
    let diff: f64 = analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / (analytic.norm() + numeric.norm()).max(1e-12)
}

fn assert_close(what: &str, analytic: &Tensor<f64>, numeric: &Tensor<f64>) {
    let e = relative_error(analytic, numeric);
    assert!(e < TOLERANCE, "{what}: relative error {e:.3e}");
}

fn contract(out: &Tensor<f64>, up: &Tensor<f64>) -> f64 {
    out.dot(up).unwrap()
}

#[test]
fn conv2d_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = stream(seed, &[1]);
        let (n, c, f) = (
            rng.random_range(1..3),
            rng.random_range(1..4),
            rng.random_range(1..4),
        );
        let k = [1, 3, 5][rng.random_range(0..3)];
        let stride = rng.random_range(1..3);
        let pad = rng.random_range(0..=k / 2);
        let (h, w) = (rng.random_range(k..k + 5), rng.random_range(k..k + 5));
        let x = random(&mut rng, &[n, c, h, w]);
        let p = ConvParams::new(
            random(&mut rng, &[f, c, k, k]),
            random(&mut rng, &[f]),
            stride,
            pad,
        )
        .unwrap();
        let out = conv2d(&x, &p).unwrap();
        let up = random(&mut rng, out.shape());
        let g = conv2d_backward(&x, &p, &up).unwrap();

        assert_close(
            "conv input",
            &g.input,
            &numeric_grad(&x, |x| contract(&conv2d(x, &p).unwrap(), &up)),
        );
        let gw = numeric_grad(&p.weights, |w| {
            let q = ConvParams::new(w.clone(), p.bias.clone(), stride, pad).unwrap();
            contract(&conv2d(&x, &q).unwrap(), &up)
        });
        assert_close("conv weights", &g.weights, &gw);
        let gb = numeric_grad(&p.bias, |b| {
            let q = ConvParams::new(p.weights.clone(), b.clone(), stride, pad).unwrap();
            contract(&conv2d(&x, &q).unwrap(), &up)
        });
        assert_close("conv bias", &g.bias, &gb);
    }
}

#[test]
fn transposed_conv2d_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = stream(seed, &[2]);
        let (n, c, f) = (
            rng.random_range(1..3),
            rng.random_range(1..4),
            rng.random_range(1..4),
        );
        let k = rng.random_range(1..4);
        let stride = rng.random_range(1..3);
        let (h, w) = (rng.random_range(1..5), rng.random_range(1..5));
        let x = random(&mut rng, &[n, c, h, w]);
        let p = ConvParams::new(
            random(&mut rng, &[c, f, k, k]),
            random(&mut rng, &[f]),
            stride,
            0,
        )
        .unwrap();
        let out = transposed_conv2d(&x, &p).unwrap();
        let up = random(&mut rng, out.shape());
        let g = transposed_conv2d_backward(&x, &p, &up).unwrap();

        let gx = numeric_grad(&x, |x| contract(&transposed_conv2d(x, &p).unwrap(), &up));
        assert_close("tconv input", &g.input, &gx);
        let gw = numeric_grad(&p.weights, |w| {
            let q = ConvParams::new(w.clone(), p.bias.clone(), stride, 0).unwrap();
            contract(&transposed_conv2d(&x, &q).unwrap(), &up)
        });
        assert_close("tconv weights", &g.weights, &gw);
        let gb = numeric_grad(&p.bias, |b| {
            let q = ConvParams::new(p.weights.clone(), b.clone(), stride, 0).unwrap();
            contract(&transposed_conv2d(&x, &q).unwrap(), &up)
        });
        assert_close("tconv bias", &g.bias, &gb);
    }
}

#[test]
fn maxpool_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = stream(seed, &[3]);
        let shape = [
            rng.random_range(1..3),
            rng.random_range(1..3),
            2 * rng.random_range(1..4),
            2 * rng.random_range(1..4),
        ];
        // A shuffled ramp keeps every pair of values 0.01 apart, well beyond the step.
        let count: usize = shape.iter().product();
        let mut ranks: Vec<usize> = (0..count).collect();
        rand::seq::SliceRandom::shuffle(ranks.as_mut_slice(), &mut rng);
        let x = Tensor::new(
            shape.to_vec(),
            ranks.iter().map(|&r| r as f64 * 0.01).collect(),
        )
        .unwrap();
        let (out, idx) = maxpool2x2(&x).unwrap();
        let up = random(&mut rng, out.shape());
        let g = maxpool2x2_backward(&up, &idx).unwrap();
        let gx = numeric_grad(&x, |x| contract(&maxpool2x2(x).unwrap().0, &up));
        assert_close("maxpool", &g, &gx);
    }
}

#[test]
fn activation_and_loss_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = stream(seed, &[4]);
        let shape = [
            rng.random_range(1..3),
            rng.random_range(1..4),
            rng.random_range(1..6),
            rng.random_range(1..6),
        ];
        let x = away_from_zero(&mut rng, &shape, 0.01);
        let up = random(&mut rng, &shape);

        let g = relu_backward(&x, &up).unwrap();
        assert_close("relu", &g, &numeric_grad(&x, |x| contract(&relu(x), &up)));

        let s = sigmoid(&x);
        let g = sigmoid_backward(&s, &up).unwrap();
        assert_close(
            "sigmoid",
            &g,
            &numeric_grad(&x, |x| contract(&sigmoid(x), &up)),
        );

        let target = random(&mut rng, &shape);
        let (_, g) = mse_loss(&x, &target).unwrap();
        assert_close(
            "mse",
            &g,
            &numeric_grad(&x, |x| mse_loss(x, &target).unwrap().0),
        );

        let b = random(&mut rng, &[shape[0], 2, shape[2], shape[3]]);
        let cat_up = random(&mut rng, &[shape[0], shape[1] + 2, shape[2], shape[3]]);
        let (ga, gb) = split_channels(&cat_up, shape[1]).unwrap();
        let na = numeric_grad(&x, |x| contract(&concat_channels(x, &b).unwrap(), &cat_up));
        let nb = numeric_grad(&b, |b| contract(&concat_channels(&x, b).unwrap(), &cat_up));
        assert_close("concat first", &ga, &na);
        assert_close("concat second", &gb, &nb);
    }
}

/// Whole-network check: gradients with respect to the input and to every
/// parameter tensor, for both variants. A full network has hundreds of ReLU
/// pre-activations, some of which inevitably sit within 1e-3 of the kink,
/// so the composition is probed with a smaller step than the layer checks.
const NETWORK_STEP: f64 = 1e-5;

#[test]
fn network_gradients() {
    for seed in 0..4u64 {
        for use_skip in [false, true] {
            let cfg = NetworkConfig::new(use_skip, 2).with_input_size(6, 6);
            let mut net = Network::<f64>::new(cfg, seed).unwrap();
            // Positive biases keep most ReLUs away from their kink.
            for p in net
                .parameters_mut()
                .into_iter()
                .filter(|p| p.shape().len() == 1)
            {
                p.data_mut().iter_mut().for_each(|b| *b = 0.1);
            }
            let mut rng = stream(seed, &[5, use_skip as u64]);
            let x = Tensor::from_fn(&[2, 1, 6, 6], |_| rng.random_range(0.0..1.0));
            let target = Tensor::from_fn(&[2, 1, 6, 6], |_| rng.random_range(0.0..1.0));

            let cache = net.forward_cached(&x).unwrap();
            let (_, up) = mse_loss(cache.output(), &target).unwrap();
            net.zero_grad();
            let gx = net.backward(&cache, &up).unwrap();
            let loss = |n: &Network<f64>, x: &Tensor<f64>| {
                mse_loss(&n.forward(x).unwrap(), &target).unwrap().0
            };

            assert_close(
                "network input",
                &gx,
                &numeric_grad_with(NETWORK_STEP, &x, |x| loss(&net, x)),
            );
            let analytic: Vec<Tensor<f64>> = net.gradients().into_iter().cloned().collect();
            for (i, ga) in analytic.iter().enumerate() {
                let base: Vec<Tensor<f64>> = net.parameters().into_iter().cloned().collect();
                let gn = numeric_grad_with(NETWORK_STEP, &base[i], |p| {
                    let mut probe = net.clone();
                    let mut params = base.clone();
                    params[i] = p.clone();
                    probe.load_parameters(params).unwrap();
                    loss(&probe, &x)
                });
                assert_close(&format!("network param {i} (skip={use_skip})"), ga, &gn);
            }
        }
    }
}
