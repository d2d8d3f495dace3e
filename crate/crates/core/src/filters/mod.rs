//! Classical despeckling baselines.
//!
//! Every filter treats pixels outside the image by edge replication and maps
//! unit-range images to unit-range images.

mod bilateral;
mod diffusion;
mod local;
mod wiener;

pub use bilateral::bilateral_filter;
pub use diffusion::anisotropic_diffusion;
pub use local::{average_filter, gaussian_filter, gaussian_kernel, median_filter};
pub use wiener::wiener_filter;

use crate::imaging::GrayImage;
use crate::Real;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("{what} must be odd and positive, got {value}")]
    EvenWindow { what: &'static str, value: usize },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("diffusion step lambda must lie in (0, 0.25], got {0}")]
    UnstableLambda(f64),
}

pub type Result<T, E = FilterError> = std::result::Result<T, E>;

/// Parameters of the classical filters.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub median_kernel: usize,
    pub average_kernel: usize,
    pub gaussian_sigma: f64,
    pub gaussian_kernel: usize,
    pub bilateral_sigma_spatial: f64,
    pub bilateral_sigma_range: f64,
    pub bilateral_kernel: usize,
    pub wiener_window: usize,
    pub pm_iterations: usize,
    pub pm_kappa: f64,
    pub pm_lambda: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            median_kernel: 3,
            average_kernel: 3,
            gaussian_sigma: 1.0,
            gaussian_kernel: 5,
            bilateral_sigma_spatial: 2.0,
            bilateral_sigma_range: 0.1,
            bilateral_kernel: 5,
            wiener_window: 3,
            pm_iterations: 10,
            pm_kappa: 0.1,
            pm_lambda: 0.25,
        }
    }
}

/// The six classical filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Median,
    Gaussian,
    Average,
    Bilateral,
    Wiener,
    Anisotropic,
}

impl FilterKind {
    pub const ALL: [FilterKind; 6] = [
        FilterKind::Median,
        FilterKind::Gaussian,
        FilterKind::Average,
        FilterKind::Bilateral,
        FilterKind::Wiener,
        FilterKind::Anisotropic,
    ];
}

impl FilterConfig {
    /// Checks every parameter.
    pub fn validate(&self) -> Result<()> {
        check_odd("median kernel", self.median_kernel)?;
        check_odd("average kernel", self.average_kernel)?;
        check_odd("gaussian kernel", self.gaussian_kernel)?;
        check_odd("bilateral kernel", self.bilateral_kernel)?;
        check_odd("wiener window", self.wiener_window)?;
        check_positive("gaussian sigma", self.gaussian_sigma)?;
        check_positive("bilateral spatial sigma", self.bilateral_sigma_spatial)?;
        check_positive("bilateral range sigma", self.bilateral_sigma_range)?;
        check_positive("diffusion kappa", self.pm_kappa)?;
        check_lambda(self.pm_lambda)?;
        if self.pm_iterations == 0 {
            return Err(FilterError::NonPositive {
                what: "diffusion iterations",
                value: 0.0,
            });
        }
        Ok(())
    }

    /// Runs one filter with this configuration.
    pub fn apply<T: Real>(&self, kind: FilterKind, img: &GrayImage<T>) -> Result<GrayImage<T>> {
        match kind {
            FilterKind::Median => median_filter(img, self.median_kernel),
            FilterKind::Average => average_filter(img, self.average_kernel),
            FilterKind::Gaussian => gaussian_filter(img, self.gaussian_sigma, self.gaussian_kernel),
            FilterKind::Bilateral => bilateral_filter(
                img,
                self.bilateral_sigma_spatial,
                self.bilateral_sigma_range,
                self.bilateral_kernel,
            ),
            FilterKind::Wiener => wiener_filter(img, self.wiener_window),
            FilterKind::Anisotropic => {
                anisotropic_diffusion(img, self.pm_iterations, self.pm_kappa, self.pm_lambda)
            }
        }
    }
}

pub(crate) fn check_odd(what: &'static str, value: usize) -> Result<()> {
    if value % 2 == 1 {
        Ok(())
    } else {
        Err(FilterError::EvenWindow { what, value })
    }
}

pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(FilterError::NonPositive { what, value })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 0.25 {
        Ok(())
    } else {
        Err(FilterError::UnstableLambda(lambda))
    }
}
