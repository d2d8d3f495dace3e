//! Benchmark harness for speckle denoising: corpus preparation, training of
//! the two autoencoder variants, evaluation of every method over a grid of
//! noise levels, and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod method;
pub mod report;

pub use commands::{
    bench, curves, evaluate, panel, prepare, train, Denoisers, ReportBundle, RunPaths,
};
pub use config::{BenchConfig, DataSource, Preset, DESK_SEED};
pub use error::{BenchError, Result};
pub use method::Method;
