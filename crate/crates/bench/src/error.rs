use std::path::PathBuf;

use speckle_core::dae::DaeError;
use speckle_core::filters::FilterError;
use speckle_core::imaging::ImagingError;
use speckle_core::metrics::MetricsError;
use speckle_core::noise::NoiseError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("config line {line}: {reason}")]
    ConfigLine { line: usize, reason: String },
    #[error("data: {0}")]
    Data(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dae(#[from] DaeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    /// Process exit status: 2 for configuration problems, 3 for data
    /// problems, 4 for numeric divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::ConfigLine { .. } | BenchError::Filter(_) => 2,
            BenchError::Noise(NoiseError::InvalidVariance(_)) => 2,
            BenchError::Dae(DaeError::Diverged { .. }) => 4,
            BenchError::Dae(DaeError::TrainConfig(_) | DaeError::Config(_)) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
