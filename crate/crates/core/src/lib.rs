//! Integration against the Jacobi weight `b (1 - |x|^2)^(mu - 1/2)` on the
//! unit ball: positive cubature, reproducing kernels, filtered
//! hyperinterpolation, Monte Carlo and control-variate quadrature, and
//! fooling functions for deterministic rules.
//!
//! The deterministic numerics are generic over [`Real`]; the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversarial;
pub mod basis;
pub mod cubature;
pub mod domain;
pub mod error;
pub mod filtering;
pub mod harness;
pub mod hyperinterp;
pub mod orthopoly;
pub mod random;
pub mod randomized;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use filtering::Filter;
pub use random::SeededStream;
pub use scalar::Real;
pub use spectral::Route;

pub type WeightConfig = orthopoly::WeightConfig<f64>;
pub type BallPoint = domain::BallPoint<f64>;
pub type CubatureRule = cubature::CubatureRule<f64>;
pub type BandlimitedFunction = spectral::BandlimitedFunction<f64>;
pub type KernelSlice = spectral::KernelSlice<f64>;
pub type FilteredKernel = filtering::FilteredKernel<f64>;
pub type HyperinterpOperator = hyperinterp::HyperinterpOperator<f64>;
