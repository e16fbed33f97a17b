//! Numerical substrate: normal and truncated-normal distributions, ranks,
//! and seedable random streams.

pub mod normal;
mod rank;
mod rng;
mod truncnorm;

pub use normal::{
    log_norm_cdf, log_norm_interval_mass, log_norm_sf, norm_cdf, norm_interval_mass, norm_pdf,
    norm_quantile, norm_sf,
};
pub use rank::ranks;
pub use rng::RngStream;
pub use truncnorm::TruncatedNormal;
