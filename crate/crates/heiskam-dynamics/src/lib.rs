//! Torus-class perturbations of the translation action on the Heisenberg
//! nilmanifold.
//!
//! A map of the class is `p ↦ p·exp(Y + F(x, ξ))` with `Y ∈ 𝔥` constant and
//! `F` a vector field whose coefficients depend only on the torus variables
//! `u = (x, ξ) mod 1`. Products in exponential coordinates follow
//! `exp(A)exp(B) = exp(A + B + ½[A, B])`, so the class is closed under
//! composition and conjugation: the center coordinate only ever enters
//! through brackets, which are central.
//!
//! Perturbations depending on the center coordinate are out of scope here.

pub mod coboundary;
pub mod displaced;
pub mod field;
pub mod grid;
pub mod maps;

use heiskam_fourier::FourierError;
use heiskam_torus::TorusError;
use thiserror::Error;

pub use coboundary::{d1, d2, split_vf, VfSplit};
pub use displaced::DisplacedEvaluator;
pub use field::{bracket, TorusClassVectorField};
pub use grid::SampleGrid;
pub use maps::{
    commutation_identity_defect, commutator_defect, compose_maps, compose_on_grid,
    compose_with_model, compose_with_perturbed, conjugate_map, conjugate_map_report,
    conjugate_on_grid, conjugation_formula, model_generator, ConjugateReport, ConjugationSamples,
    PerturbedMap,
};

/// Relative energy above the cutoff tolerated after a refit.
pub const ALIASING_TOL: f64 = 1e-9;
/// Iteration cap for inverting `u ↦ u + off(H(u))`.
pub const MAX_INVERSION_ITERS: usize = 30;
/// Off-center averages below this count as zero in [`split_vf`].
pub const AVERAGE_TOL: f64 = 1e-10;
/// Sup-norm bound on `F`, `G` for the commutator defect.
pub const SMALLNESS_BOUND: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("refit lost {ratio:e} of the norm above the cutoff")]
    AliasingExceeded { ratio: f64 },
    #[error("inversion of x·exp H(x) did not converge ({iterations} iterations, step {step:e})")]
    InversionDiverged { iterations: usize, step: f64 },
    #[error("average obstruction {defect:e} is not removable")]
    NontrivialClass { defect: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;
