//! Speckle denoising toolkit.
//!
//! The pipeline is built from a handful of loosely coupled pieces:
//!
//! * [`tensor`]: a small N-d tensor with forward/backward kernels for the
//!   layers a convolutional autoencoder needs, plus Adam.
//! * [`imaging`]: PNG ingestion, bilinear resizing, dataset manifests and a
//!   synthetic phantom generator.
//! * [`noise`]: seeded multiplicative speckle injection.
//! * [`filters`]: the classical despeckling baselines.
//! * [`metrics`]: MSE, PSNR and SSIM.
//! * [`dae`]: the denoising autoencoders (with and without a skip pathway),
//!   their training loop and checkpoint container.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`). The pipeline
//! itself runs at 32-bit precision; the 64-bit instantiation is mostly used
//! for finite-difference gradient checks.

pub mod dae;
pub mod filters;
pub mod imaging;
pub mod metrics;
pub mod noise;
pub mod rng;
mod scalar;
pub mod tensor;

pub use scalar::Real;

/// 32-bit tensor, the precision the training pipeline runs at.
pub type Tensor32 = tensor::Tensor<f32>;
/// 64-bit tensor.
pub type Tensor64 = tensor::Tensor<f64>;
/// 32-bit grayscale image.
pub type Image32 = imaging::GrayImage<f32>;
/// 64-bit grayscale image.
pub type Image64 = imaging::GrayImage<f64>;
/// Autoencoder running at 32-bit precision.
pub type Network32 = dae::Network<f32>;
