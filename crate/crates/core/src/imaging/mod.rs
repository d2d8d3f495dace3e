//! Grayscale images, PNG I/O, resizing and dataset handling.

mod gray;
mod manifest;
mod phantom;
mod png_io;
mod resize;

pub use gray::GrayImage;
pub use manifest::{
    build_manifest, split_counts, ClassLabel, DatasetManifest, ManifestEntry, Split,
};
pub use phantom::{generate_phantom_corpus, phantom_image, PHANTOM_SIZE};
pub use png_io::{load_png, save_png};
pub use resize::resize_bilinear;

use std::path::PathBuf;

/// Side length images are resized to before training and evaluation.
pub const WORKING_SIZE: usize = 128;

#[derive(Debug, thiserror::Error)]
pub enum ImagingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot decode PNG: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: cannot encode PNG: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: unsupported color type {color}")]
    UnsupportedColor { path: PathBuf, color: String },
    #[error("image {height}x{width} needs {expected} pixels, got {found}")]
    PixelCount {
        height: usize,
        width: usize,
        expected: usize,
        found: usize,
    },
    #[error("pixel {index} = {value} is outside [0, 1]")]
    PixelRange { index: usize, value: f64 },
    #[error("image dimensions must be positive, got {height}x{width}")]
    EmptyImage { height: usize, width: usize },
    #[error("{op}: source {height}x{width} is too small")]
    Degenerate {
        op: &'static str,
        height: usize,
        width: usize,
    },
    #[error("image size mismatch: {a:?} vs {b:?}")]
    SizeMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("no usable PNG images under {0}")]
    EmptyCorpus(PathBuf),
    #[error("manifest line {line}: {reason}")]
    ManifestParse { line: usize, reason: String },
}

pub type Result<T, E = ImagingError> = std::result::Result<T, E>;

/// Loads a PNG and resizes it to `size`×`size`.
pub fn load_resized<T: crate::Real>(path: &std::path::Path, size: usize) -> Result<GrayImage<T>> {
    let img = load_png::<f64>(path)?;
    let img = if img.dims() == (size, size) {
        img
    } else {
        resize_bilinear(&img, size, size)?
    };
    Ok(img.cast())
}
