//! The Schrödinger representation at parameter 1 on a spectral grid.
//!
//! In rotated coordinates `z = A(x)` the generator τ⃗ acts by translation
//! `z₁ ↦ z₁ − τ` and η⃗ by the modulation `exp(iν₂z₂)`. Functions are sampled
//! on `[−L, L)ⁿ`; translations are FFT phase shifts and modulations are
//! pointwise products, both exact for band-limited samples that vanish at the
//! box boundary.

pub mod bump;
pub mod frame;
pub mod grid;
pub mod norm;
pub mod ops;
pub mod solve;

use thiserror::Error;

pub use bump::{build_bump, BumpProfile};
pub use frame::{build_frame, RotatedFrame};
pub use grid::{GaussianPacket, GridField};
pub use norm::box_norm;
pub use ops::{l_eta_apply, l_tau_apply, pi_m_tau, r_psi_apply, r_psi_checked};
pub use solve::{solve_l_eta, solve_l_tau, split_infinite, transfer_solve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchrodingerError {
    #[error("degenerate frequency pair: {0}")]
    DegeneratePair(String),
    #[error("Hermite expansion does not resolve the field (remainder {remainder:e}, top shell {top_shell:e})")]
    ResolutionExceeded { remainder: f64, top_shell: f64 },
    #[error("bump projection annihilates a nonzero field for both bumps")]
    DegenerateProjection,
    #[error("field is not in the {which}-annihilator (defect {defect:e})")]
    NotInAnnihilator { which: &'static str, defect: f64 },
    #[error("L_τ g ≠ L_η f (relative defect {defect:e})")]
    CompatibilityViolation { defect: f64 },
    #[error("φ is not L_η f − L_τ g (relative mismatch {defect:e})")]
    NotACochain { defect: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SchrodingerError>;
