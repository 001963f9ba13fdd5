//! Numerical toolkit for a locally-linear latent-order-book market model:
//! the self-consistent price equation, its finite-difference book dynamics,
//! impact relaxation, closed-form book shapes, large-rate expansions,
//! round-trip cost positivity, and mechanical/informational decomposition.

pub mod book;
pub mod config;
pub mod csvio;
pub mod decomposition;
pub mod error;
pub mod experiments;
pub mod expansion;
pub mod manipulation;
pub mod model;
pub mod numerics;
pub mod relaxation;
pub mod shape;
pub mod scalar;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete f64 aliases for the common case.
pub type ModelParams = model::ModelParams<f64>;
pub type PricePath = model::PricePath<f64>;
pub type TradingSchedule = schedule::TradingSchedule<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
