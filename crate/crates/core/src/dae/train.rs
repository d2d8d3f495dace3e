use rand::seq::SliceRandom;
use rand::Rng;

use super::checkpoint::Checkpoint;
use super::network::Network;
use super::{DaeError, Result};
use crate::imaging::{load_resized, DatasetManifest, GrayImage, Split};
use crate::noise::{add_speckle, NoiseSpec, CANONICAL_VARIANCES};
use crate::tensor::{adam_step, mse_loss, AdamState, GradTensor, Tensor};
use crate::{rng, Real};

// Stream indices under the run seed.
const SHUFFLE_STREAM: u64 = 0x5401;
const VARIANCE_STREAM: u64 = 0x5402;
const TRAIN_NOISE_STREAM: u64 = 0x5403;
const VAL_NOISE_STREAM: u64 = 0x5404;

/// Largest number of images pushed through the network at once. Larger
/// batches accumulate gradients over several micro-batches.
const MICRO_BATCH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Adam step size. Zero is accepted (parameters then never move).
    pub learning_rate: f64,
    pub noise_variances: Vec<f64>,
    pub seed: u64,
    /// Stop once validation loss has not improved for this many epochs.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    /// 300 epochs, batches of 64, learning rate 1e-3, canonical variances.
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 64,
            learning_rate: 1e-3,
            noise_variances: CANONICAL_VARIANCES.to_vec(),
            seed: 0,
            patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DaeError::TrainConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning rate must be finite and non-negative");
        }
        if self.noise_variances.is_empty() {
            return bad("noise variance list is empty");
        }
        for &v in &self.noise_variances {
            NoiseSpec::new(v, 0)?;
        }
        if self.patience == Some(0) {
            return bad("patience must be positive");
        }
        Ok(())
    }
}

/// Losses of one epoch (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    /// Parameters of the epoch with the lowest validation loss.
    pub checkpoint: Checkpoint<T>,
    pub history: Vec<EpochRecord>,
}

/// Adam over every parameter of a network.
#[derive(Debug, Clone)]
pub struct AdamOptimizer<T> {
    states: Vec<AdamState<T>>,
    pub learning_rate: T,
}

impl<T: Real> AdamOptimizer<T> {
    pub fn new(net: &Network<T>, learning_rate: f64) -> Self {
        Self {
            states: net
                .parameters()
                .iter()
                .map(|p| AdamState::new(p.shape()))
                .collect(),
            learning_rate: T::of(learning_rate),
        }
    }

    /// Applies one update from the network's accumulated gradients.
    pub fn step(&mut self, net: &mut Network<T>) -> Result<()> {
        for ((value, grad), state) in net.params_and_grads_mut().into_iter().zip(&mut self.states) {
            let mut param = GradTensor {
                value: std::mem::replace(value, Tensor::zeros(&[0])),
                grad: std::mem::replace(grad, Tensor::zeros(&[0])),
            };
            let res = adam_step(&mut param, state, self.learning_rate);
            *value = param.value;
            *grad = param.grad;
            res?;
        }
        Ok(())
    }
}

fn to_batch<T: Real>(images: &[&GrayImage<T>]) -> Result<Tensor<T>> {
    let items: Vec<Tensor<T>> = images.iter().map(|i| i.to_tensor()).collect();
    Ok(Tensor::stack_batch(&items)?)
}

/// Accumulates gradients of the batch-mean MSE over `(noisy, clean)` pairs
/// and returns the loss. Gradients are not zeroed first.
pub fn accumulate_batch_gradient<T: Real>(
    net: &mut Network<T>,
    noisy: &[&GrayImage<T>],
    clean: &[&GrayImage<T>],
) -> Result<f64> {
    let total = noisy.len();
    let mut loss = 0.0;
    for (nz, cl) in noisy.chunks(MICRO_BATCH).zip(clean.chunks(MICRO_BATCH)) {
        let scale = nz.len() as f64 / total as f64;
        let cache = net.forward_cached(&to_batch(nz)?)?;
        let (l, grad) = mse_loss(cache.output(), &to_batch(cl)?)?;
        let s = T::of(scale);
        net.backward(&cache, &grad.map(|g| g * s))?;
        loss += l.f64() * scale;
    }
    Ok(loss)
}

/// Mean per-pixel MSE of the network's reconstructions.
pub fn mean_loss<T: Real>(
    net: &Network<T>,
    noisy: &[GrayImage<T>],
    clean: &[GrayImage<T>],
) -> Result<f64> {
    let mut total = 0.0;
    for (nz, cl) in noisy.chunks(MICRO_BATCH).zip(clean.chunks(MICRO_BATCH)) {
        let nz: Vec<&GrayImage<T>> = nz.iter().collect();
        let cl: Vec<&GrayImage<T>> = cl.iter().collect();
        let out = net.forward(&to_batch(&nz)?)?;
        let (l, _) = mse_loss(&out, &to_batch(&cl)?)?;
        total += l.f64() * nz.len() as f64;
    }
    Ok(total / noisy.len() as f64)
}

/// Validation pairs: image `i` gets variance `variances[i % len]` and a
/// fixed noise seed, so the loss is comparable across epochs.
fn validation_pairs<T: Real>(val: &[GrayImage<T>], cfg: &TrainConfig) -> Result<Vec<GrayImage<T>>> {
    val.iter()
        .enumerate()
        .map(|(i, img)| {
            let variance = cfg.noise_variances[i % cfg.noise_variances.len()];
            let seed = rng::derive_seed(cfg.seed, &[VAL_NOISE_STREAM, i as u64]);
            Ok(add_speckle(img, NoiseSpec { variance, seed })?)
        })
        .collect()
}

/// Trains on in-memory clean images.
///
/// Every epoch shuffles the training set, pairs each clean image with a
/// freshly drawn speckled copy whose variance is picked from
/// `cfg.noise_variances`, and takes one Adam step per batch on the MSE
/// between reconstruction and clean image. After each epoch the validation
/// loss is measured and the best parameters so far are retained.
pub fn train_on_images<T: Real>(
    net: &mut Network<T>,
    train: &[GrayImage<T>],
    val: &[GrayImage<T>],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(DaeError::TrainConfig(
            "train and validation sets must be non-empty".into(),
        ));
    }
    let (h, w) = net.config().input_size;
    for img in train.iter().chain(val) {
        if img.dims() != (h, w) {
            return Err(DaeError::InputShape {
                height: h,
                width: w,
                found: vec![1, 1, img.height(), img.width()],
            });
        }
    }

    let val_noisy = validation_pairs(val, cfg)?;
    let mut optimizer = AdamOptimizer::new(net, cfg.learning_rate);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<Tensor<T>>)> = None;
    let mut last_finite: Option<usize> = None;

    for epoch in 1..=cfg.epochs {
        let e = epoch as u64;
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng::stream(cfg.seed, &[SHUFFLE_STREAM, e]));
        let mut variance_rng = rng::stream(cfg.seed, &[VARIANCE_STREAM, e]);

        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let noisy = batch
                .iter()
                .map(|&i| {
                    let variance = cfg.noise_variances
                        [variance_rng.random_range(0..cfg.noise_variances.len())];
                    let seed = rng::derive_seed(cfg.seed, &[TRAIN_NOISE_STREAM, e, i as u64]);
                    add_speckle(&train[i], NoiseSpec { variance, seed })
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let noisy_refs: Vec<&GrayImage<T>> = noisy.iter().collect();
            let clean_refs: Vec<&GrayImage<T>> = batch.iter().map(|&i| &train[i]).collect();

            net.zero_grad();
            let loss = accumulate_batch_gradient(net, &noisy_refs, &clean_refs)?;
            if !loss.is_finite() || !net.gradients().iter().all(|g| g.all_finite()) {
                return Err(DaeError::Diverged {
                    epoch,
                    last_finite_epoch: last_finite,
                });
            }
            optimizer.step(net)?;
            epoch_loss += loss * batch.len() as f64;
        }
        let train_loss = epoch_loss / train.len() as f64;
        let val_loss = mean_loss(net, &val_noisy, val)?;
        if !(train_loss.is_finite() && val_loss.is_finite()) {
            return Err(DaeError::Diverged {
                epoch,
                last_finite_epoch: last_finite,
            });
        }
        last_finite = Some(epoch);
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });

        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((
                val_loss,
                epoch,
                net.parameters().into_iter().cloned().collect(),
            ));
        }
        if let (Some(patience), Some((_, best_epoch, _))) = (cfg.patience, &best) {
            if epoch - best_epoch >= patience {
                break;
            }
        }
    }

    let (best_val_loss, epoch, params) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        checkpoint: Checkpoint {
            config: net.config().clone(),
            params,
            epoch,
            best_val_loss,
            seed: cfg.seed,
        },
        history,
    })
}

/// Trains on the train/val splits of a manifest, resizing every image to
/// the network's input size.
pub fn train<T: Real>(
    net: &mut Network<T>,
    manifest: &DatasetManifest,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    let (h, w) = net.config().input_size;
    if h != w {
        return Err(DaeError::TrainConfig(
            "manifest training needs a square input size".into(),
        ));
    }
    let load = |split: Split| -> Result<Vec<GrayImage<T>>> {
        manifest
            .split(split)
            .into_iter()
            .map(|e| Ok(load_resized(&e.path, h)?))
            .collect()
    };
    let train_set = load(Split::Train)?;
    let val_set = load(Split::Val)?;
    train_on_images(net, &train_set, &val_set, cfg)
}
