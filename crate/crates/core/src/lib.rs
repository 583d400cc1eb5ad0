//! Tamed discretizations of the kinetic (underdamped) Langevin diffusion for
//! strongly log-concave targets whose gradients grow superlinearly.
//!
//! The crate is organised bottom-up:
//!
//! * [`potential`]: target potentials and sampled checks of strong
//!   monotonicity and local Lipschitz continuity of the gradient.
//! * [`taming`]: the step-size dependent, monotonicity-preserving tamed drift.
//! * [`schemes`]: the tamed stochastic exponential scheme, the tamed OBABO
//!   splitting, the Verlet map, an RK4 Hamiltonian reference flow, the
//!   coordinate maps used by the log-Sobolev arguments and chain drivers.
//! * [`metrics`]: weighted norms, Wasserstein-2 estimators, finite-difference
//!   Jacobian norms and convergence-order fits.
//! * [`propcheck`]: verification suites producing pass/fail reports.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the `*64`
//! aliases below fix the scalar to `f64`, which the suites use.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod metrics;
pub mod potential;
pub mod propcheck;
pub mod scalar;
pub mod schemes;
pub mod taming;
pub mod vecops;

pub use error::{Error, Result};
pub use metrics::{SampleCloud, WeightedNormParams};
pub use potential::{builtin_potential, BuiltinPotential, PotentialSpec};
pub use scalar::Scalar;
pub use schemes::{
    NoiseCovariance, NoiseStream, PhaseState, PsiCoefficients, RunRecord, Scheme, SchemeParams,
};
pub use taming::TamedDrift;

pub type PotentialSpec64 = PotentialSpec<f64>;
pub type PotentialSpec32 = PotentialSpec<f32>;
pub type TamedDrift64 = TamedDrift<f64>;
pub type TamedDrift32 = TamedDrift<f32>;
pub type PhaseState64 = PhaseState<f64>;
pub type PhaseState32 = PhaseState<f32>;
pub type SchemeParams64 = SchemeParams<f64>;
pub type SchemeParams32 = SchemeParams<f32>;
pub type RunRecord64 = RunRecord<f64>;
pub type SampleCloud64 = SampleCloud<f64>;
