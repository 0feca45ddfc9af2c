//! Computational toolkit for the two-dimensional compound-Poisson risk model
//! with constant interest rate.
//!
//! Capabilities:
//! - event-driven simulation of the coupled reserve processes with exact
//!   per-path ruin functionals ([`simulate`]);
//! - deterministic parallel Monte Carlo estimators for finite-time joint
//!   ruin probabilities and ruin-time Laplace transforms ([`estimate`]);
//! - a fixed-point solver for the integro-differential equation satisfied
//!   by the joint Laplace transforms, iterating a certified contraction
//!   operator on a wedge-domain grid ([`ide`]);
//! - heavy-tail finite-time asymptotic approximations and their empirical
//!   verification against Monte Carlo ([`asymptotics`]).
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `ruin2d` binary for the config-driven experiment runner.

pub mod asymptotics;
pub mod claims;
pub mod config;
pub mod estimate;
pub mod ide;
pub mod model;
pub mod quad;
pub mod report;
pub mod rng;
pub mod runner;
pub mod simulate;

pub use claims::{ClaimDistribution, DiscountedClaimLaw, RegVaryingClaim};
pub use estimate::{FiniteRuinKind, LaplaceKind};
pub use model::{InitialReserves, ModelParams, Regime};
pub use report::EstimateReport;
