//! Closed-form moments for Markov processes whose generator maps polynomials
//! of degree `n` into polynomials of degree at most `n`.
//!
//! The moment equations of such a process are a lower-triangular linear ODE
//! system, and the matrices involved nest: the system for the first `n`
//! moments is a leading block of the system for the first `n + 1`. The
//! [`matrix`] module exploits that nesting to extend exponentials, powers,
//! inverses and eigendecompositions one row at a time.

pub mod engine;
pub mod error;
pub mod euler;
pub mod matrix;
pub mod mc;
pub mod processes;

pub use engine::{
    steady_nth, steady_recursive, steady_vector, transient_scalar, transient_vector, validate,
    validate_dense, CoefficientSystem, Diagnostics, InitialMomentVector, MomentTime, MomentVector,
};
pub use error::{Error, Result};
pub use euler::{bench, error_metrics, euler_solve, BenchRecord, EulerConfig, Method};
pub use matrix::{EigenPair, MatryoshkanMatrix};
pub use mc::{estimate_moments, simulate, MomentEstimate, SimConfig};
pub use processes::{
    EphemeralSpec, GenericGeneratorSpec, GrowthCollapseSpec, HawkesSpec, ItoSpec, JumpMoments,
    ProcessSpec, ProcessSystem, ShotNoiseSpec,
};
