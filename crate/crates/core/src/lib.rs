//! Weak Chebyshev Greedy Algorithm and Thresholding Greedy Algorithm in the
//! sequence spaces ℓ^p(ℓ^q) and f_{p,q}, with exact norming functionals,
//! best N-term oracles, checkers for the geometric properties that drive
//! Lebesgue-type inequalities, and an experiment harness.
//!
//! The spaces, the solver and the greedy drivers are generic over the scalar
//! type ([`Scalar`], implemented for `f32` and `f64`). Property checks and
//! experiments run in `f64`.

pub mod chebyshev;
pub mod error;
pub mod experiments;
pub mod fpq;
pub mod greedy;
pub mod io;
pub mod lorentz;
pub mod lpq;
pub mod properties;
pub mod scalar;
pub mod space;

pub use chebyshev::{canonical_project, chebyshev_project, ChebyshevResult, SolverConfig, SolverStatus};
pub use error::{Error, Result};
pub use fpq::{DyadicAxisIndex, FpqParams, FpqVector, Rectangle};
pub use greedy::{GreedyConfig, GreedyTrace, TieBreak};
pub use lpq::{LpqIndex, LpqParams, LpqVector};
pub use scalar::Scalar;
pub use space::SpaceVector;

pub type LpqParams64 = LpqParams<f64>;
pub type LpqParams32 = LpqParams<f32>;
pub type LpqVector64 = LpqVector<f64>;
pub type LpqVector32 = LpqVector<f32>;
pub type FpqParams64 = FpqParams<f64>;
pub type FpqParams32 = FpqParams<f32>;
pub type FpqVector64 = FpqVector<f64>;
pub type FpqVector32 = FpqVector<f32>;

/// Library version recorded in experiment output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
