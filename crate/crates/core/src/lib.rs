//! # qic-core
//!
//! Exact density-operator simulation and numerics for quantum information
//! causality games: few-qubit linear algebra, entropies, qubit channels and
//! twirling, teleportation and superdense coding, the QIC/IC-2 games with
//! exact and Monte-Carlo evaluators, closed-form and root-solved bounds, and
//! a property-based fuzzer for the entropic inequality chain.
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f64` and `f32` are provided); the `*64` aliases below fix the default
//! double-precision instantiation.

pub mod bounds;
pub mod channels;
pub mod entropy;
mod error;
pub mod games;
pub mod linalg;
pub mod propcheck;
pub mod protocols;
mod rng;
mod scalar;

pub use error::{QicError, Result};
pub use rng::RngStream;
pub use scalar::Scalar;

/// Double-precision instantiations of the core types.
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type PureState64 = linalg::PureState<f64>;
pub type DensityOperator64 = linalg::DensityOperator<f64>;
pub type BlochVector64 = linalg::BlochVector<f64>;
pub type KrausChannel64 = channels::KrausChannel<f64>;
pub type DepolarizingParam64 = channels::DepolarizingParam<f64>;
pub type Strategy64 = games::Strategy<f64>;
pub type Ic2Strategy64 = games::Ic2Strategy<f64>;
pub type NonlocalStrategy64 = games::NonlocalStrategy<f64>;
pub type GameResult64 = games::GameResult<f64>;
pub type BoundResult64 = bounds::BoundResult<f64>;
pub type FuzzConfig64 = propcheck::FuzzConfig<f64>;
pub type ViolationReport64 = propcheck::ViolationReport<f64>;

/// Single-precision instantiations; validation tolerances widen to match.
pub type ComplexMatrix32 = linalg::ComplexMatrix<f32>;
pub type PureState32 = linalg::PureState<f32>;
pub type DensityOperator32 = linalg::DensityOperator<f32>;
