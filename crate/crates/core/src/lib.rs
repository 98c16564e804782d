//! Prediction limits and equal-density prediction intervals for one- and
//! multi-step-ahead forecasting in a Gaussian AR(1) process, including
//! coverage-corrected ("improved") variants that offset the O(1/n) coverage
//! error introduced by plugging in an estimated autoregression coefficient.
//!
//! The crate provides:
//! - exact conditional predictive distributions and AR(1) simulation
//!   ([`ar1_model`]),
//! - autoregression-coefficient estimators with their conditional biases
//!   ([`estimators`]),
//! - closed-form and simulated coverage corrections ([`correction`]),
//! - estimative and improved limits/intervals ([`prediction`]),
//! - Monte-Carlo coverage, scaling, and efficiency studies ([`harness`]),
//! - a batch front end over JSON configs emitting CSV reports ([`cli`]).
//!
//! Numerical code is generic over the scalar type via [`Scalar`]
//! (implemented for `f64` and `f32`); the aliases below fix the common
//! double-precision case.

pub mod ar1_model;
pub mod cli;
pub mod correction;
pub mod error;
pub mod estimators;
pub mod harness;
mod mc;
pub mod normal;
pub mod prediction;
mod scalar;

pub use ar1_model::{
    conditional_predictive, simulate_backward, simulate_forward, Ar1Params, PredictiveDist,
    SeedSpec, TimeSeries,
};
pub use correction::{
    closed_form_c_interval, closed_form_c_limit, d_from_c, delta_from_c, simulated_c, Correction,
    Source, Target,
};
pub use error::{Error, Result};
pub use estimators::{conditional_bias, estimate, inverse_information, EstimatorKind};
pub use harness::{
    conditional_coverage, efficiency_study, scaling_study, CoverageOptions, CoverageReport,
    EfficiencyReport, Method, ScalingReport,
};
pub use prediction::{
    equal_density_interval, equal_density_interval_unimodal, estimative_upper_limit,
    improved_interval, improved_upper_limit, CentralInterval, Flavor, UpperLimit,
};
pub use scalar::Scalar;

pub type Ar1ParamsF64 = Ar1Params<f64>;
pub type TimeSeriesF64 = TimeSeries<f64>;
pub type PredictiveDistF64 = PredictiveDist<f64>;
pub type CorrectionF64 = Correction<f64>;
pub type UpperLimitF64 = UpperLimit<f64>;
pub type CentralIntervalF64 = CentralInterval<f64>;
pub type CoverageReportF64 = CoverageReport<f64>;
pub type ScalingReportF64 = ScalingReport<f64>;
pub type EfficiencyReportF64 = EfficiencyReport<f64>;
