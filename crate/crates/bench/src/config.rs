//! Benchmark configuration.
//!
//! Files are line oriented: `key = value`, with `#` starting a comment.
//! Lists are comma separated. Recognized keys:
//!
//! ```text
//! seed                            u64
//! out                             output directory
//! data.phantoms                   number of synthetic phantoms to generate
//! data.root                       corpus directory with normal/ benign/ malignant/
//! noise.variances                 list of speckle variances
//! methods                         list of method names
//! filters.median.kernel           odd window side
//! filters.average.kernel          odd window side
//! filters.gaussian.sigma          > 0
//! filters.gaussian.kernel         odd window side
//! filters.bilateral.sigma_spatial > 0
//! filters.bilateral.sigma_range   > 0
//! filters.bilateral.kernel        odd window side
//! filters.wiener.window           odd window side
//! filters.anisotropic.iterations  > 0
//! filters.anisotropic.kappa       > 0
//! filters.anisotropic.lambda      (0, 0.25]
//! train.epochs                    > 0
//! train.batch_size                > 0
//! train.learning_rate             > 0
//! train.patience                  > 0, or "none"
//! train.base_channels             > 0
//! panel.image                     manifest image id
//! panel.variance                  speckle variance of the panel
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use speckle_core::dae::TrainConfig;
use speckle_core::filters::FilterConfig;
use speckle_core::noise::{NoiseSpec, CANONICAL_VARIANCES};

use crate::error::{BenchError, Result};
use crate::method::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 20 phantoms and 8-channel networks; runs in minutes on one core.
    Desk,
    /// 300 epochs, batches of 64, 32-channel networks, learning rate 1e-3.
    Paper,
    /// As `Paper` but with a learning rate of 1e-10.
    PaperLiteral,
}

impl FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            "paper-literal" => Ok(Preset::PaperLiteral),
            other => Err(BenchError::Config(format!("unknown preset {other:?}"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
            Preset::PaperLiteral => "paper-literal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Phantoms(usize),
    Directory(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub data: DataSource,
    pub seed: u64,
    pub variances: Vec<f64>,
    pub methods: Vec<Method>,
    pub filters: FilterConfig,
    /// Training settings. Its seed is overwritten by `seed` before use.
    pub train: TrainConfig,
    pub base_channels: usize,
    pub out_dir: PathBuf,
    pub panel_image: Option<String>,
    pub panel_variance: f64,
}

pub const DESK_SEED: u64 = 1;

impl BenchConfig {
    pub fn preset(preset: Preset) -> Self {
        let canonical = CANONICAL_VARIANCES.to_vec();
        let (data, train, base_channels) = match preset {
            Preset::Desk => (
                DataSource::Phantoms(20),
                TrainConfig {
                    epochs: 40,
                    batch_size: 1,
                    learning_rate: 1e-3,
                    noise_variances: canonical.clone(),
                    seed: DESK_SEED,
                    patience: None,
                },
                8,
            ),
            Preset::Paper | Preset::PaperLiteral => (
                DataSource::Directory(PathBuf::from("data/busi")),
                TrainConfig {
                    epochs: 300,
                    batch_size: 64,
                    learning_rate: if preset == Preset::Paper { 1e-3 } else { 1e-10 },
                    noise_variances: canonical.clone(),
                    seed: DESK_SEED,
                    patience: None,
                },
                32,
            ),
        };
        Self {
            data,
            seed: DESK_SEED,
            variances: canonical,
            methods: Method::ALL.to_vec(),
            filters: FilterConfig::default(),
            train,
            base_channels,
            out_dir: PathBuf::from(format!("runs/{preset}")),
            panel_image: None,
            panel_variance: 0.7,
        }
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |reason: String| BenchError::ConfigLine {
                line: i + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("expected `key = value`, got {line:?}")))?;
            self.set(key.trim(), value.trim()).map_err(fail)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<N: FromStr>(key: &str, v: &str) -> std::result::Result<N, String> {
            v.parse().map_err(|_| format!("{key}: cannot parse {v:?}"))
        }
        fn list(v: &str) -> impl Iterator<Item = &str> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty())
        }
        let f = &mut self.filters;
        match key {
            "seed" => self.seed = num(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "data.phantoms" => self.data = DataSource::Phantoms(num(key, value)?),
            "data.root" => self.data = DataSource::Directory(PathBuf::from(value)),
            "noise.variances" => {
                self.variances = list(value)
                    .map(|v| num(key, v))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "methods" => {
                self.methods = list(value)
                    .map(|v| v.parse::<Method>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "filters.median.kernel" => f.median_kernel = num(key, value)?,
            "filters.average.kernel" => f.average_kernel = num(key, value)?,
            "filters.gaussian.sigma" => f.gaussian_sigma = num(key, value)?,
            "filters.gaussian.kernel" => f.gaussian_kernel = num(key, value)?,
            "filters.bilateral.sigma_spatial" => f.bilateral_sigma_spatial = num(key, value)?,
            "filters.bilateral.sigma_range" => f.bilateral_sigma_range = num(key, value)?,
            "filters.bilateral.kernel" => f.bilateral_kernel = num(key, value)?,
            "filters.wiener.window" => f.wiener_window = num(key, value)?,
            "filters.anisotropic.iterations" => f.pm_iterations = num(key, value)?,
            "filters.anisotropic.kappa" => f.pm_kappa = num(key, value)?,
            "filters.anisotropic.lambda" => f.pm_lambda = num(key, value)?,
            "train.epochs" => self.train.epochs = num(key, value)?,
            "train.batch_size" => self.train.batch_size = num(key, value)?,
            "train.learning_rate" => self.train.learning_rate = num(key, value)?,
            "train.patience" => {
                self.train.patience = if value == "none" {
                    None
                } else {
                    Some(num(key, value)?)
                };
            }
            "train.base_channels" => self.base_channels = num(key, value)?,
            "panel.image" => self.panel_image = Some(value.to_string()),
            "panel.variance" => self.panel_variance = num(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Checks every field and propagates the run seed and variance grid into
    /// the training settings.
    pub fn finalize(mut self) -> Result<Self> {
        self.train.seed = self.seed;
        self.train.noise_variances = self.variances.clone();
        let bad = |m: String| Err(BenchError::Config(m));
        if self.variances.is_empty() {
            return bad("noise.variances is empty".into());
        }
        for &v in self.variances.iter().chain([&self.panel_variance]) {
            if NoiseSpec::new(v, 0).is_err() {
                return bad(format!("invalid noise variance {v}"));
            }
        }
        if self.methods.is_empty() {
            return bad("methods is empty".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad("methods lists a name twice".into());
        }
        if let DataSource::Phantoms(0) = self.data {
            return bad("data.phantoms must be positive".into());
        }
        if !(self.train.learning_rate > 0.0 && self.train.learning_rate.is_finite()) {
            return bad("train.learning_rate must be positive".into());
        }
        if self.base_channels == 0 {
            return bad("train.base_channels must be positive".into());
        }
        self.filters.validate()?;
        self.train.validate()?;
        Ok(self)
    }
}
