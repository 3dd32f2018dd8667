//! Successive conjugation of a perturbed family of ℤ² actions back to the
//! model action.
//!
//! Each step smooths the current perturbation, splits it into a coboundary
//! `d₁H` plus a quadratically small remainder, and conjugates the whole family
//! by `h(x) = x·exp H(x)`. The family parameter `λ` is re-solved after every
//! step so that the averages, which no conjugacy can remove, vanish.

pub mod config;
pub mod engine;
pub mod family;
pub mod stencil;
pub mod trace;

use heiskam_dynamics::DynamicsError;
use heiskam_torus::TorusError;
use thiserror::Error;

pub use config::{ErrConstants, KamConfig};
pub use engine::{iterative_step, run, verify_conjugacy, KamFailure, KamOutcome, StepOutput};
pub use family::{FamilyBase, FamilyFields, KamState, PerturbationFamily};
pub use stencil::{family_norms, solve_parameter, solve_parameter_with, Stencil};
pub use trace::{KamTrace, StepRecord, TRACE_VERSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KamError {
    #[error("no convergence after {iterations} steps (eps = {eps:e})")]
    NoConvergence { iterations: usize, eps: f64 },
    #[error("step {step} inadmissible: {value:e} ≥ {bound:e}")]
    StepInadmissible { step: usize, value: f64, bound: f64 },
    #[error("Newton solve for the parameter diverged (|Φ| = {residual:e} after {iterations} iterations)")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("parameter left the ball: |λ| = {norm:e} > {radius:e}")]
    OutOfBall { norm: f64, radius: f64 },
    #[error("stencil does not resolve derivatives of order {order}")]
    StencilTooCoarse { order: usize },
    #[error("average obstruction {defect:e} exceeds the quadratic bound {bound:e}")]
    NontrivialClass { defect: f64, bound: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

pub type Result<T> = std::result::Result<T, KamError>;
