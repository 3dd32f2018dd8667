//! Cohomology of the translation pair `(Y_τ, Y_η)` in two settings: smooth
//! functions on 𝕋²ⁿ (the finite-dimensional representations) and constant
//! elements of 𝔥.

pub mod constant;
pub mod finite;
pub mod heis;

use heiskam_fourier::FourierError;
use thiserror::Error;

pub use constant::{
    cohomology_basis, constant_coboundary, constant_cocycle_space, family_generators,
    is_constant_cocycle, rank_of_pairs, reduce_conjugacy, ChartId, ConstantPair, FamilyParameter,
    ReducedParameter, CONSTRAINT_TOL,
};
pub use finite::{
    coboundary, project_r, solve_common_coboundary, split_torus, tame_ratio, CoboundarySolution,
    TorusSplit,
};
pub use heis::HeisVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("(f, g) is not a cocycle: ‖L_τ g − L_η f‖ = {defect:e}")]
    CocycleViolation { defect: f64 },
    #[error("obstruction: f has coefficient {value:e} at m = {m:?} with vanishing τ-block")]
    ObstructionNonzero { m: Vec<i32>, value: f64 },
    #[error("φ is not the defect L_η f − L_τ g (mismatch {defect:e})")]
    NotACochain { defect: f64 },
    #[error("commutation relation violated by {defect:e}")]
    ConstraintViolated { defect: f64 },
    #[error("chart is singular here (slope {slope:e})")]
    ChartSingular { slope: f64 },
    #[error("field has nonzero mean {mean:e}")]
    NonZeroMean { mean: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

pub type Result<T> = std::result::Result<T, TorusError>;
