//! Versioned binary checkpoint container.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic          8 bytes  "DAECKPT\n"
//! version        u32      (currently 1)
//! scalar width   u8       4 = f32, 8 = f64
//! use_skip       u8
//! base_channels  u32
//! input h, w     u32, u32
//! layer count    u32
//!   per layer:   kind u8, in_ch u32, out_ch u32, tag str, skip_source str
//!                (str = u8 present flag, then u32 length + UTF-8 bytes)
//! epoch          u32
//! best val loss  f64
//! seed           u64
//! tensor count   u32
//!   per tensor:  rank u32, dims u32 × rank, values × product(dims)
//! ```

use std::path::Path;

use super::config::{LayerKind, LayerSpec, NetworkConfig};
use super::{DaeError, Result};
use crate::tensor::Tensor;
use crate::Real;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"DAECKPT\n";
pub const CHECKPOINT_VERSION: u32 = 1;

const KINDS: [LayerKind; 5] = [
    LayerKind::Conv3x3,
    LayerKind::MaxPool2x2,
    LayerKind::TransposedConv2x2,
    LayerKind::ConcatSkip,
    LayerKind::Conv3x3Sigmoid,
];

/// Trained parameters plus everything needed to rebuild the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub config: NetworkConfig,
    /// Parameter tensors in [`super::Network::parameters`] order.
    pub params: Vec<Tensor<T>>,
    /// Epoch the parameters were taken from.
    pub epoch: usize,
    pub best_val_loss: f64,
    pub seed: u64,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: Option<&str>) {
        match s {
            Some(s) => {
                self.u8(1);
                self.u32(s.len());
                self.0.extend_from_slice(s.as_bytes());
            }
            None => self.u8(0),
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| DaeError::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn str(&mut self) -> Result<Option<String>> {
        match self.u8()? {
            0 => Ok(None),
            1 => {
                let n = self.u32()?;
                let bytes = self.take(n)?;
                String::from_utf8(bytes.to_vec())
                    .map(Some)
                    .map_err(|_| DaeError::Checkpoint("invalid UTF-8 in layer tag".into()))
            }
            f => Err(DaeError::Checkpoint(format!("bad string flag {f}"))),
        }
    }
}

impl<T: Real> Checkpoint<T> {
    fn width() -> u8 {
        std::mem::size_of::<T>() as u8
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(CHECKPOINT_MAGIC);
        w.u32(CHECKPOINT_VERSION as usize);
        w.u8(Self::width());
        w.u8(self.config.use_skip as u8);
        w.u32(self.config.base_channels);
        w.u32(self.config.input_size.0);
        w.u32(self.config.input_size.1);
        w.u32(self.config.layers.len());
        for l in &self.config.layers {
            w.u8(KINDS.iter().position(|&k| k == l.kind).expect("known kind") as u8);
            w.u32(l.in_ch);
            w.u32(l.out_ch);
            w.str(l.tag.as_deref());
            w.str(l.skip_source.as_deref());
        }
        w.u32(self.epoch);
        w.f64(self.best_val_loss);
        w.u64(self.seed);
        w.u32(self.params.len());
        for t in &self.params {
            w.u32(t.shape().len());
            for &d in t.shape() {
                w.u32(d);
            }
            for &v in t.data() {
                if Self::width() == 4 {
                    w.0.extend_from_slice(&(v.f64() as f32).to_le_bytes());
                } else {
                    w.f64(v.f64());
                }
            }
        }
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(DaeError::Checkpoint(
                "not a checkpoint file (bad magic)".into(),
            ));
        }
        let version = r.u32()?;
        if version as u32 != CHECKPOINT_VERSION {
            return Err(DaeError::Checkpoint(format!(
                "unsupported version {version}"
            )));
        }
        let width = r.u8()?;
        if width != 4 && width != 8 {
            return Err(DaeError::Checkpoint(format!(
                "unsupported scalar width {width}"
            )));
        }
        let use_skip = r.u8()? != 0;
        let base_channels = r.u32()?;
        let input_size = (r.u32()?, r.u32()?);
        let n_layers = r.u32()?;
        let mut layers = Vec::with_capacity(n_layers.min(1024));
        for _ in 0..n_layers {
            let kind = *KINDS
                .get(r.u8()? as usize)
                .ok_or_else(|| DaeError::Checkpoint("unknown layer kind".into()))?;
            layers.push(LayerSpec {
                kind,
                in_ch: r.u32()?,
                out_ch: r.u32()?,
                tag: r.str()?,
                skip_source: r.str()?,
            });
        }
        let config = NetworkConfig {
            use_skip,
            base_channels,
            input_size,
            layers,
        };
        config.validate()?;
        let epoch = r.u32()?;
        let best_val_loss = r.f64()?;
        let seed = r.u64()?;
        let n_tensors = r.u32()?;
        let mut params = Vec::with_capacity(n_tensors.min(1024));
        for _ in 0..n_tensors {
            let rank = r.u32()?;
            let dims = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
            let count: usize = dims.iter().product();
            if count.saturating_mul(width as usize) > buf.len() {
                return Err(DaeError::Checkpoint("tensor larger than file".into()));
            }
            let data = (0..count)
                .map(|_| {
                    Ok(if width == 4 {
                        T::of(r.f32()? as f64)
                    } else {
                        T::of(r.f64()?)
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            params.push(Tensor::new(dims, data)?);
        }
        if r.pos != buf.len() {
            return Err(DaeError::Checkpoint(
                "trailing bytes after last tensor".into(),
            ));
        }
        Ok(Self {
            config,
            params,
            epoch,
            best_val_loss,
            seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|source| DaeError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| DaeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
