//! Model-free inference for the area under the ROC curve.
//!
//! The crate builds a Gibbs posterior for the AUC from the squared-error
//! empirical risk of the Mann–Whitney statistic, calibrates its learning
//! rate either by bootstrap plus stochastic approximation or from the
//! Hoeffding variance of the Mann–Whitney estimator, and ships the binormal
//! rank-likelihood Gibbs sampler as a baseline. The [`harness`] module runs
//! the simulation studies and real-data workflow on top of those pieces.
//!
//! Module map:
//!
//! - [`stats`]: normal and truncated-normal numerics, ranks, RNG streams
//! - [`auc`]: Mann–Whitney estimate, empirical risk, variance components
//! - [`gibbs`]: posterior construction, moments, HPD intervals, analytic rate
//! - [`calibrate`]: bootstrap calibration of the learning rate and the oracle rate
//! - [`brl`]: binormal rank-likelihood sampler
//! - [`harness`]: scenario generators, study runner, data files and reports

pub mod auc;
pub mod brl;
pub mod calibrate;
mod error;
pub mod gibbs;
pub mod harness;
pub mod stats;

pub use auc::{AucEstimate, ScoreData};
pub use error::{Error, Result};
pub use gibbs::{CredibleInterval, GibbsPosterior, Prior};
pub use stats::{RngStream, TruncatedNormal};
