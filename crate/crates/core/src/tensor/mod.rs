//! Minimal N-d tensor and the layer kernels of the denoising autoencoder.
//!
//! Tensors are dense and row-major. Image batches use the `[N, C, H, W]`
//! layout throughout. Every forward kernel has a matching backward kernel
//! that takes the upstream gradient and returns gradients for the inputs
//! and parameters.

mod activation;
mod adam;
mod concat;
mod conv;
mod loss;
mod pool;

pub use activation::{relu, relu_backward, sigmoid, sigmoid_backward};
pub use adam::{adam_step, AdamState};
pub use concat::{concat_channels, split_channels};
pub use conv::{
    conv2d, conv2d_backward, transposed_conv2d, transposed_conv2d_backward, ConvGrads, ConvParams,
};
pub use loss::mse_loss;
pub use pool::{maxpool2x2, maxpool2x2_backward, PoolIndices};

use crate::Real;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("shape {shape:?} needs {expected} values, got {found}")]
    DataLength {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("shape must have positive dimensions, got {0:?}")]
    EmptyDimension(Vec<usize>),
    #[error("{op}: expected a rank-{expected} tensor, got shape {found:?}")]
    Rank {
        op: &'static str,
        expected: usize,
        found: Vec<usize>,
    },
    #[error("{op}: shape mismatch, expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("{op}: {dim} mismatch, expected {expected}, found {found}")]
    DimMismatch {
        op: &'static str,
        dim: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{op}: padded input {height}x{width} is smaller than the {kh}x{kw} kernel")]
    InputTooSmall {
        op: &'static str,
        height: usize,
        width: usize,
        kh: usize,
        kw: usize,
    },
    #[error("maxpool2x2: spatial dims must be even, got {height}x{width}")]
    OddSpatial { height: usize, width: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T, E = TensorError> = std::result::Result<T, E>;

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    /// Builds a tensor, checking `product(shape) == data.len()`.
    ///
    /// Zero-sized dimensions are allowed (an empty channel block is useful
    /// for concatenation); the data length must still match.
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::DataLength {
                shape,
                expected,
                found: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    /// Fills a tensor from its flat row-major index.
    pub fn from_fn(shape: &[usize], f: impl FnMut(usize) -> T) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: (0..n).map(f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Reinterprets the data under a new shape with the same element count.
    pub fn reshape(self, shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), self.data)
    }

    /// `[N, C, H, W]` of a rank-4 tensor.
    pub fn dims4(&self, op: &'static str) -> Result<[usize; 4]> {
        match *self.shape.as_slice() {
            [n, c, h, w] => Ok([n, c, h, w]),
            _ => Err(TensorError::Rank {
                op,
                expected: 4,
                found: self.shape.clone(),
            }),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two same-shape tensors.
    pub fn zip_map(&self, other: &Self, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.expect_shape(other.shape(), op)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn expect_shape(&self, expected: &[usize], op: &'static str) -> Result<()> {
        if self.shape != expected {
            return Err(TensorError::ShapeMismatch {
                op,
                expected: expected.to_vec(),
                found: self.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn sum(&self) -> T {
        T::of(self.data.iter().map(|v| v.f64()).sum::<f64>())
    }

    /// Inner product accumulated in `f64`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.expect_shape(other.shape(), "dot")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.f64() * b.f64())
            .sum())
    }

    /// Euclidean norm accumulated in `f64`.
    pub fn norm(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.f64() * v.f64())
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Precision conversion.
    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::of(v.f64())).collect(),
        }
    }

    /// Copy of the `index`-th item along the leading axis, keeping the axis
    /// with extent 1.
    pub fn batch_item(&self, index: usize) -> Self {
        let per: usize = self.shape[1..].iter().product();
        let mut shape = self.shape.clone();
        shape[0] = 1;
        Self {
            shape,
            data: self.data[index * per..(index + 1) * per].to_vec(),
        }
    }

    /// Stacks tensors along the leading axis. All must share trailing dims.
    pub fn stack_batch(items: &[Self]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| TensorError::InvalidParam("stack_batch: no items".into()))?;
        let tail = &first.shape[1..];
        let mut data = Vec::with_capacity(first.len() * items.len());
        let mut n = 0;
        for item in items {
            if &item.shape[1..] != tail {
                return Err(TensorError::ShapeMismatch {
                    op: "stack_batch",
                    expected: first.shape.clone(),
                    found: item.shape.clone(),
                });
            }
            n += item.shape[0];
            data.extend_from_slice(&item.data);
        }
        let mut shape = first.shape.clone();
        shape[0] = n;
        Ok(Self { shape, data })
    }
}

/// A trainable parameter: value plus accumulated gradient of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GradTensor<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

impl<T: Real> GradTensor<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape());
        Self { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.data_mut().iter_mut().for_each(|g| *g = T::zero());
    }

    /// Adds `delta` into the gradient accumulator.
    pub fn accumulate(&mut self, delta: &Tensor<T>) -> Result<()> {
        delta.expect_shape(self.value.shape(), "accumulate")?;
        for (g, &d) in self.grad.data_mut().iter_mut().zip(delta.data()) {
            *g += d;
        }
        Ok(())
    }
}
