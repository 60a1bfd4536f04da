//! Information-theoretic sample-complexity lower bounds for adaptive
//! sparse recovery, with Monte-Carlo validation.
//!
//! The library answers two questions about recovering an unknown
//! `K`-subset of `N` variables from `T` sequential observations:
//!
//! 1. **How many measurements are necessary?** Subset-maximized lower
//!    bounds of the form `T >= max_j log C(N-j, K-j) / I_j`, evaluated
//!    with exact, closed-form, or estimated conditional mutual
//!    information, for adaptive and nonadaptive strategies alike
//!    ([`bounds`], [`infotheory`]).
//! 2. **Do simulated strategies respect them?** A seeded experiment
//!    harness measures error probabilities of maximum-likelihood decoding
//!    under three observation models (Boolean-OR group testing, 1-bit
//!    compressive sensing, linear compressive sensing) and compares every
//!    measured point against the finite-sample error lower bound
//!    ([`harness`], [`strategies`], [`decoders`], [`acceptance`]).
//!
//! All information quantities are computed and stored in nats; bit
//! conversion is a display concern. The numeric kernels are generic over
//! the scalar type through [`scalar::Real`]; the harness and CLI run at
//! the concrete [`Scalar`] alias.

pub mod acceptance;
pub mod bounds;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod linalg;
pub mod models;
pub mod scalar;
pub mod strategies;
pub mod types;

/// Concrete scalar used by the simulation harness and CLI.
pub type Scalar = f64;

/// Information quantity in natural log units, at the default scalar.
pub type Nats = Scalar;

pub use error::{Error, Result};
pub use scalar::Real;
