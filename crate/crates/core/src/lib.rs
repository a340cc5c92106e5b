//! Thresholded wavelet density estimation for dependent data.
//!
//! The numerical core ([`wavelet`], [`estimator`], [`cross_validation`],
//! [`kernel`]) is generic over [`Real`] (`f32` or `f64`). The simulators,
//! risk aggregation and experiment harness work in `f64`.

// `!(a < b)` is used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cross_validation;
pub mod error;
pub mod estimator;
pub mod fit;
pub mod harness;
pub mod kernel;
pub mod processes;
pub mod risk;
pub mod scalar;
pub mod wavelet;

pub use cross_validation::{fit_cv, CvFit, CvMode, CvSelection};
pub use error::{Error, Result};
pub use estimator::{DensityEstimate, Sample, ThresholdMode};
pub use fit::{fit_method, FitOptions, Method};
pub use processes::{simulate, ProcessCase, ProcessSpec, TargetDensity, TargetKind};
pub use risk::{DecayProfile, RiskReport};
pub use scalar::Real;
pub use wavelet::{Family, Kind, WaveletFilter, WaveletTables};

pub type Tables = WaveletTables<f64>;
pub type Tables32 = WaveletTables<f32>;
pub type Filter = WaveletFilter<f64>;
pub type Filter32 = WaveletFilter<f32>;
pub type Estimate = DensityEstimate<f64>;
pub type Estimate32 = DensityEstimate<f32>;
pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
