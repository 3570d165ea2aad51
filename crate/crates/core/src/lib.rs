// NaN must fail range checks, so they are written as `!(x > a)`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod errmodel;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod recurrence;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GaussRule64 = quadrature::GaussRule<f64>;
pub type GaussRule32 = quadrature::GaussRule<f32>;
pub type ModelProblem64 = spectral::ModelProblem<f64>;
pub type SpectralSolution64 = spectral::SpectralSolution<f64>;
pub type LagSeries64 = recurrence::LagSeries<f64>;
