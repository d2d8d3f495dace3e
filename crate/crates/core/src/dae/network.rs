use rand::Rng;

use super::checkpoint::Checkpoint;
use super::config::{LayerKind, NetworkConfig};
use super::{DaeError, Result};
use crate::imaging::GrayImage;
use crate::tensor::{
    concat_channels, conv2d, conv2d_backward, maxpool2x2, maxpool2x2_backward, relu, relu_backward,
    sigmoid, sigmoid_backward, split_channels, transposed_conv2d, transposed_conv2d_backward,
    ConvParams, PoolIndices, Tensor,
};
use crate::{rng, Real};

/// Stream index of parameter initialization under the run seed.
const INIT_STREAM: u64 = 0x1417;

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    /// Input of every layer.
    inputs: Vec<Tensor<T>>,
    /// Output (post-activation) of every layer.
    outputs: Vec<Tensor<T>>,
    pool: Option<PoolIndices>,
}

impl<T: Real> ForwardCache<T> {
    pub fn output(&self) -> &Tensor<T> {
        self.outputs.last().expect("network has layers")
    }
}

/// A built autoencoder: the layer table plus parameters and gradient buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    config: NetworkConfig,
    /// Parameters of each layer (`None` for pooling/concatenation).
    params: Vec<Option<ConvParams<T>>>,
    /// Gradient accumulators `(weights, bias)`, aligned with `params`.
    grads: Vec<Option<(Tensor<T>, Tensor<T>)>>,
    /// Index of the layer each concat draws from.
    skip_sources: Vec<Option<usize>>,
}

impl<T: Real> Network<T> {
    /// Builds a network with He-uniform weights (bound `sqrt(6 / fan_in)`,
    /// `fan_in = in_ch·kh·kw`) drawn from the seed, and zero biases.
    pub fn new(config: NetworkConfig, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, &[INIT_STREAM]);
        Self::build(config, |shape, fan_in| {
            let bound = (6.0 / fan_in as f64).sqrt();
            Tensor::from_fn(shape, |_| T::of(rng.random_range(-bound..bound)))
        })
    }

    /// Builds a network with every weight and bias zero.
    pub fn zeroed(config: NetworkConfig) -> Result<Self> {
        Self::build(config, |shape, _| Tensor::zeros(shape))
    }

    fn build(
        config: NetworkConfig,
        mut init: impl FnMut(&[usize], usize) -> Tensor<T>,
    ) -> Result<Self> {
        config.validate()?;
        let mut params = Vec::with_capacity(config.layers.len());
        let mut skip_sources = Vec::with_capacity(config.layers.len());
        for spec in &config.layers {
            let p = match spec.kind {
                LayerKind::Conv3x3 | LayerKind::Conv3x3Sigmoid => {
                    let w = init(&[spec.out_ch, spec.in_ch, 3, 3], spec.in_ch * 9);
                    Some(ConvParams::new(w, Tensor::zeros(&[spec.out_ch]), 1, 1)?)
                }
                LayerKind::TransposedConv2x2 => {
                    // Layout [in, out, k, k]; fan-in is taken over the input channels.
                    let w = init(&[spec.in_ch, spec.out_ch, 2, 2], spec.in_ch * 4);
                    Some(ConvParams::new(w, Tensor::zeros(&[spec.out_ch]), 2, 0)?)
                }
                LayerKind::MaxPool2x2 | LayerKind::ConcatSkip => None,
            };
            params.push(p);
            skip_sources.push(
                spec.skip_source
                    .as_deref()
                    .and_then(|tag| config.tag_index(tag)),
            );
        }
        let grads = params
            .iter()
            .map(|p| {
                p.as_ref().map(|p| {
                    (
                        Tensor::zeros(p.weights.shape()),
                        Tensor::zeros(p.bias.shape()),
                    )
                })
            })
            .collect();
        Ok(Self {
            config,
            params,
            grads,
            skip_sources,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// Parameter tensors in layer order, weights before bias.
    pub fn parameters(&self) -> Vec<&Tensor<T>> {
        self.params
            .iter()
            .flatten()
            .flat_map(|p| [&p.weights, &p.bias])
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.params
            .iter_mut()
            .flatten()
            .flat_map(|p| [&mut p.weights, &mut p.bias])
            .collect()
    }

    /// Gradient accumulators aligned with [`Network::parameters`].
    pub fn gradients(&self) -> Vec<&Tensor<T>> {
        self.grads
            .iter()
            .flatten()
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    /// `(parameter, gradient)` pairs aligned with [`Network::parameters`].
    pub(crate) fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor<T>, &mut Tensor<T>)> {
        self.params
            .iter_mut()
            .flatten()
            .zip(self.grads.iter_mut().flatten())
            .flat_map(|(p, (gw, gb))| [(&mut p.weights, gw), (&mut p.bias, gb)])
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    /// Replaces every parameter tensor; shapes must match.
    pub fn load_parameters(&mut self, tensors: Vec<Tensor<T>>) -> Result<()> {
        let mut slots = self.parameters_mut();
        if slots.len() != tensors.len() {
            return Err(DaeError::Checkpoint(format!(
                "expected {} parameter tensors, got {}",
                slots.len(),
                tensors.len()
            )));
        }
        for (slot, t) in slots.iter_mut().zip(&tensors) {
            t.expect_shape(slot.shape(), "load_parameters")?;
        }
        for (slot, t) in slots.into_iter().zip(tensors) {
            *slot = t;
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for (w, b) in self.grads.iter_mut().flatten() {
            w.data_mut().iter_mut().for_each(|v| *v = T::zero());
            b.data_mut().iter_mut().for_each(|v| *v = T::zero());
        }
    }

    /// Euclidean norm of the accumulated weight gradient of layer `index`.
    pub fn layer_grad_norm(&self, index: usize) -> Option<f64> {
        self.grads.get(index)?.as_ref().map(|(w, _)| w.norm())
    }

    fn check_input(&self, batch: &Tensor<T>) -> Result<()> {
        let (h, w) = self.config.input_size;
        match *batch.shape() {
            [n, 1, bh, bw] if n > 0 && bh == h && bw == w => Ok(()),
            _ => Err(DaeError::InputShape {
                height: h,
                width: w,
                found: batch.shape().to_vec(),
            }),
        }
    }

    /// Runs one layer.
    fn layer_forward(
        &self,
        index: usize,
        input: &Tensor<T>,
        tagged: &[Option<Tensor<T>>],
        pool: &mut Option<PoolIndices>,
    ) -> Result<Tensor<T>> {
        let spec = &self.config.layers[index];
        let out = match spec.kind {
            LayerKind::Conv3x3 => relu(&conv2d(input, self.layer_params(index))?),
            LayerKind::Conv3x3Sigmoid => sigmoid(&conv2d(input, self.layer_params(index))?),
            LayerKind::TransposedConv2x2 => transposed_conv2d(input, self.layer_params(index))?,
            LayerKind::MaxPool2x2 => {
                let (out, idx) = maxpool2x2(input)?;
                *pool = Some(idx);
                out
            }
            LayerKind::ConcatSkip => {
                let src = self.skip_sources[index].expect("validated skip source");
                let skip = tagged[src]
                    .as_ref()
                    .expect("skip source runs before the concat");
                concat_channels(input, skip)?
            }
        };
        Ok(out)
    }

    fn layer_params(&self, index: usize) -> &ConvParams<T> {
        self.params[index].as_ref().expect("parameterized layer")
    }

    /// Forward pass over an `[N, 1, H, W]` batch.
    pub fn forward(&self, batch: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(batch)?;
        let mut tagged: Vec<Option<Tensor<T>>> = vec![None; self.config.layers.len()];
        let mut pool = None;
        let mut x = batch.clone();
        for index in 0..self.config.layers.len() {
            let out = self.layer_forward(index, &x, &tagged, &mut pool)?;
            if self.config.layers[index].tag.is_some() {
                tagged[index] = Some(out.clone());
            }
            x = out;
        }
        Ok(x)
    }

    /// Forward pass keeping every intermediate for [`Network::backward`].
    pub fn forward_cached(&self, batch: &Tensor<T>) -> Result<ForwardCache<T>> {
        self.check_input(batch)?;
        let n_layers = self.config.layers.len();
        let mut inputs: Vec<Tensor<T>> = Vec::with_capacity(n_layers);
        let mut outputs: Vec<Tensor<T>> = Vec::with_capacity(n_layers);
        let mut tagged: Vec<Option<Tensor<T>>> = vec![None; n_layers];
        let mut pool = None;
        for index in 0..n_layers {
            let input = if index == 0 {
                batch.clone()
            } else {
                outputs[index - 1].clone()
            };
            let out = self.layer_forward(index, &input, &tagged, &mut pool)?;
            if self.config.layers[index].tag.is_some() {
                tagged[index] = Some(out.clone());
            }
            inputs.push(input);
            outputs.push(out);
        }
        Ok(ForwardCache {
            inputs,
            outputs,
            pool,
        })
    }

    /// Backpropagates `dL/d output`, accumulating parameter gradients into the
    /// network's buffers. Returns `dL/d input`.
    pub fn backward(&mut self, cache: &ForwardCache<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        upstream.expect_shape(cache.output().shape(), "network backward")?;
        let n_layers = self.config.layers.len();
        let mut pending: Vec<Option<Tensor<T>>> = vec![None; n_layers];
        let mut grad = upstream.clone();
        for index in (0..n_layers).rev() {
            if let Some(extra) = pending[index].take() {
                grad = grad.zip_map(&extra, "skip gradient", |a, b| a + b)?;
            }
            let input = &cache.inputs[index];
            let output = &cache.outputs[index];
            let kind = self.config.layers[index].kind;
            grad = match kind {
                LayerKind::Conv3x3 | LayerKind::Conv3x3Sigmoid => {
                    // relu'(z) = [z > 0] = [relu(z) > 0]
                    let pre = if kind == LayerKind::Conv3x3 {
                        relu_backward(output, &grad)?
                    } else {
                        sigmoid_backward(output, &grad)?
                    };
                    let g = conv2d_backward(input, self.layer_params(index), &pre)?;
                    self.accumulate(index, &g.weights, &g.bias);
                    g.input
                }
                LayerKind::TransposedConv2x2 => {
                    let g = transposed_conv2d_backward(input, self.layer_params(index), &grad)?;
                    self.accumulate(index, &g.weights, &g.bias);
                    g.input
                }
                LayerKind::MaxPool2x2 => {
                    let idx = cache.pool.as_ref().expect("pool indices recorded");
                    maxpool2x2_backward(&grad, idx)?
                }
                LayerKind::ConcatSkip => {
                    let (dec, skip) = split_channels(&grad, input.shape()[1])?;
                    let src = self.skip_sources[index].expect("validated skip source");
                    pending[src] = Some(match pending[src].take() {
                        Some(p) => p.zip_map(&skip, "skip gradient", |a, b| a + b)?,
                        None => skip,
                    });
                    dec
                }
            };
        }
        Ok(grad)
    }

    fn accumulate(&mut self, index: usize, gw: &Tensor<T>, gb: &Tensor<T>) {
        let (w, b) = self.grads[index].as_mut().expect("parameterized layer");
        for (a, &d) in w.data_mut().iter_mut().zip(gw.data()) {
            *a += d;
        }
        for (a, &d) in b.data_mut().iter_mut().zip(gb.data()) {
            *a += d;
        }
    }

    /// Denoises one image of the network's input size; output clamped to `[0, 1]`.
    pub fn denoise(&self, img: &GrayImage<T>) -> Result<GrayImage<T>> {
        let out = self.forward(&img.to_tensor())?;
        let (h, w) = img.dims();
        Ok(GrayImage::from_clamped(h, w, out.into_data())?)
    }

    /// Rebuilds a network from a checkpoint.
    pub fn from_checkpoint(checkpoint: &Checkpoint<T>) -> Result<Self> {
        let mut net = Self::zeroed(checkpoint.config.clone())?;
        net.load_parameters(checkpoint.params.clone())?;
        Ok(net)
    }
}

/// Runs a checkpointed network on one image.
pub fn denoise<T: Real>(checkpoint: &Checkpoint<T>, img: &GrayImage<T>) -> Result<GrayImage<T>> {
    Network::from_checkpoint(checkpoint)?.denoise(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(skip: bool) -> NetworkConfig {
        NetworkConfig::new(skip, 4).with_input_size(16, 16)
    }

    #[test]
    fn both_variants_preserve_shape() {
        for skip in [false, true] {
            let net = Network::<f32>::new(NetworkConfig::new(skip, 4), 1).unwrap();
            let x = Tensor::full(&[1, 1, 128, 128], 0.5);
            let y = net.forward(&x).unwrap();
            assert_eq!(y.shape(), &[1, 1, 128, 128]);
            assert!(y.data().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn zero_weights_give_half() {
        let net = Network::<f32>::zeroed(small(true)).unwrap();
        let x = Tensor::from_fn(&[2, 1, 16, 16], |i| (i % 7) as f32 / 7.0);
        assert!(net.forward(&x).unwrap().data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = Network::<f32>::new(small(false), 5).unwrap();
        let b = Network::<f32>::new(small(false), 5).unwrap();
        let c = Network::<f32>::new(small(false), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn he_uniform_bounds() {
        let net = Network::<f64>::new(small(true), 2).unwrap();
        for (spec, p) in net.config.layers.iter().zip(&net.params) {
            if let Some(p) = p {
                let [_, _, kh, kw] = p.weights.dims4("t").unwrap();
                let bound = (6.0 / (spec.in_ch * kh * kw) as f64).sqrt();
                assert!(p.weights.data().iter().all(|v| v.abs() <= bound));
                assert!(p.bias.data().iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn wrong_input_shape() {
        let net = Network::<f32>::new(small(false), 1).unwrap();
        assert!(matches!(
            net.forward(&Tensor::zeros(&[1, 1, 16, 8])),
            Err(DaeError::InputShape { .. })
        ));
        assert!(net.forward(&Tensor::zeros(&[1, 2, 16, 16])).is_err());
    }
}
