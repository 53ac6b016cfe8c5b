//! Global significance test for linear models with more markers than samples.
//!
//! The test statistic is `U(r)`, the number of non-zero LASSO coefficients at a
//! regularization parameter `λ_r` calibrated by Monte Carlo simulation under
//! the global null `β₁ = … = β_p = 0`, using the observed marker correlation
//! structure. The null is rejected when `U(r) > r`.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

pub mod baselines;
pub mod calibration;
pub mod data;
pub mod error;
pub mod global_test;
pub mod lasso;
pub mod power;
pub mod rng;
pub mod scalar;
pub mod tdist;

pub use error::{Error, Result};
pub use rng::RngSpec;
pub use scalar::Scalar;

pub type Matrix = data::Matrix<f64>;
pub type Dataset = data::Dataset<f64>;
pub type SpectralFactor = data::SpectralFactor<f64>;
pub type LassoFit = lasso::LassoFit<f64>;
pub type CalibrationTable = calibration::CalibrationTable<f64>;
pub type TestOutcome = global_test::TestOutcome<f64>;
pub type MarginalTestResult = baselines::MarginalTestResult<f64>;

pub type Dataset32 = data::Dataset<f32>;
pub type SpectralFactor32 = data::SpectralFactor<f32>;
pub type LassoFit32 = lasso::LassoFit<f32>;
pub type CalibrationTable32 = calibration::CalibrationTable<f32>;
