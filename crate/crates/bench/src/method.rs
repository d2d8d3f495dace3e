use std::fmt;
use std::str::FromStr;

use speckle_core::filters::FilterKind;

/// Every method the harness can benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    AeNoSkip,
    AeSkip,
    Median,
    Gaussian,
    Average,
    Bilateral,
    Wiener,
    Anisotropic,
}

impl Method {
    /// Registry order, which is also the panel tile order.
    pub const ALL: [Method; 8] = [
        Method::AeNoSkip,
        Method::AeSkip,
        Method::Median,
        Method::Gaussian,
        Method::Average,
        Method::Bilateral,
        Method::Wiener,
        Method::Anisotropic,
    ];

    /// Series order for the SSIM curve file: the legend set first, the rest
    /// after it.
    pub const CURVE_ORDER: [Method; 8] = [
        Method::AeSkip,
        Method::AeNoSkip,
        Method::Gaussian,
        Method::Average,
        Method::Bilateral,
        Method::Median,
        Method::Wiener,
        Method::Anisotropic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::AeNoSkip => "ae_no_skip",
            Method::AeSkip => "ae_skip",
            Method::Median => "median",
            Method::Gaussian => "gaussian",
            Method::Average => "average",
            Method::Bilateral => "bilateral",
            Method::Wiener => "wiener",
            Method::Anisotropic => "anisotropic",
        }
    }

    /// Human-readable label for reports.
    pub fn label(self) -> &'static str {
        match self {
            Method::AeNoSkip => "Autoencoder (no skip)",
            Method::AeSkip => "Autoencoder (skip)",
            Method::Median => "Median",
            Method::Gaussian => "Gaussian",
            Method::Average => "Average",
            Method::Bilateral => "Bilateral",
            Method::Wiener => "Wiener",
            Method::Anisotropic => "Anisotropic diffusion",
        }
    }

    pub fn filter(self) -> Option<FilterKind> {
        match self {
            Method::AeNoSkip | Method::AeSkip => None,
            Method::Median => Some(FilterKind::Median),
            Method::Gaussian => Some(FilterKind::Gaussian),
            Method::Average => Some(FilterKind::Average),
            Method::Bilateral => Some(FilterKind::Bilateral),
            Method::Wiener => Some(FilterKind::Wiener),
            Method::Anisotropic => Some(FilterKind::Anisotropic),
        }
    }

    /// `Some(use_skip)` for the autoencoder variants.
    pub fn autoencoder(self) -> Option<bool> {
        match self {
            Method::AeNoSkip => Some(false),
            Method::AeSkip => Some(true),
            _ => None,
        }
    }

    pub fn is_classical(self) -> bool {
        self.filter().is_some()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method {0:?}")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}
