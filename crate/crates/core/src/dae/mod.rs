//! Convolutional denoising autoencoders.
//!
//! Two variants share one layer table: a plain encoder/decoder, and one whose
//! decoder concatenates the full-resolution encoder features back in after
//! upsampling (the skip pathway). See [`NetworkConfig::new`] for the table.

mod checkpoint;
mod config;
mod network;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{ConfigError, LayerKind, LayerSpec, NetworkConfig, SKIP_TAG};
pub use network::{denoise, ForwardCache, Network};
pub use train::{
    accumulate_batch_gradient, mean_loss, train, train_on_images, AdamOptimizer, EpochRecord,
    TrainConfig, TrainOutcome,
};

use crate::imaging::ImagingError;
use crate::noise::NoiseError;
use crate::tensor::TensorError;

#[derive(Debug, thiserror::Error)]
pub enum DaeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("network expects input [N, 1, {height}, {width}], got {found:?}")]
    InputShape {
        height: usize,
        width: usize,
        found: Vec<usize>,
    },
    #[error("training diverged in epoch {epoch} (last finite epoch: {last_finite_epoch:?})")]
    Diverged {
        epoch: usize,
        last_finite_epoch: Option<usize>,
    },
    #[error("invalid training configuration: {0}")]
    TrainConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = DaeError> = std::result::Result<T, E>;
