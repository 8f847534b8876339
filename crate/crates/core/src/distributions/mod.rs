//! Univariate normal, χ² and F utilities and the multivariate normal CDF.

mod mvn;
mod univariate;

pub use mvn::{mvn_cdf, MvnConfig, MvnCdfResult, MAX_MVN_DIMENSION};
pub use univariate::{chi2_sf, f_sf, normal_cdf, normal_pdf, normal_quantile};
