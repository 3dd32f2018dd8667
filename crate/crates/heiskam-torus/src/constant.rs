//! Constant (Lie-algebra) cohomology of the translation pair and the
//! finite-dimensional family of algebraic actions.

use heiskam_diophantine::FrequencyPair;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::heis::HeisVector;
use crate::{Result, TorusError};

/// Tolerance of the commutation relation on family parameters.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// A pair of constant fields `(F, G)`.
pub type ConstantPair = (HeisVector, HeisVector);

/// Flat `(F, G)` coordinates, length `2(2n+1)`.
pub fn pair_to_vec(p: &ConstantPair) -> Vec<f64> {
    let mut v = p.0.to_vec();
    v.extend(p.1.to_vec());
    v
}

pub fn pair_from_vec(v: &[f64]) -> ConstantPair {
    let h = v.len() / 2;
    (
        HeisVector::from_slice(&v[..h]),
        HeisVector::from_slice(&v[h..]),
    )
}

/// `[Y_τ, G] − [Y_η, F]` (Z-coefficient): zero exactly on cocycles.
pub fn cocycle_defect(p: &ConstantPair, pair: &FrequencyPair) -> f64 {
    let yt = HeisVector::y_tau(&pair.tau_vec);
    let ye = HeisVector::y_eta(&pair.eta_vec);
    yt.omega(&p.1) - ye.omega(&p.0)
}

/// Normal vector of the cocycle hyperplane `τ·g_Λ + η·f_X = 0` in `(F, G)` coordinates.
fn cocycle_normal(pair: &FrequencyPair) -> Vec<f64> {
    let n = pair.n();
    let mut w = vec![0.0; 2 * (2 * n + 1)];
    w[..n].copy_from_slice(&pair.eta_vec);
    let g0 = 2 * n + 1;
    w[g0 + n..g0 + 2 * n].copy_from_slice(&pair.tau_vec);
    w
}

fn orthonormal_complement(normal: &[f64], support: &[usize]) -> Vec<Vec<f64>> {
    let dim = normal.len();
    let nn = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![normal.iter().map(|x| x / nn).collect()];
    for &i in support {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    basis.remove(0);
    basis
}

/// Orthonormal basis of the constant cocycles `{(F, G) : [Y_τ, G] = [Y_η, F]}`;
/// it has `4n+1` elements (9 for n = 2).
pub fn constant_cocycle_space(pair: &FrequencyPair) -> Vec<ConstantPair> {
    let w = cocycle_normal(pair);
    let all: Vec<usize> = (0..w.len()).collect();
    orthonormal_complement(&w, &all)
        .iter()
        .map(|v| pair_from_vec(v))
        .collect()
}

/// Membership test for the cocycle space, relative to the pair's size.
pub fn is_constant_cocycle(p: &ConstantPair, pair: &FrequencyPair, tol: f64) -> bool {
    let scale = pair_to_vec(p)
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    cocycle_defect(p, pair).abs() <= tol * scale
}

/// `(F, G) = ([Y_τ, H], [Y_η, H])`: central, with `f₅ = τ·h_Λ`, `g₅ = −η·h_X`.
pub fn constant_coboundary(h: &HeisVector, pair: &FrequencyPair) -> ConstantPair {
    (
        HeisVector::y_tau(&pair.tau_vec).bracket(h),
        HeisVector::y_eta(&pair.eta_vec).bracket(h),
    )
}

/// Representatives of the constant cohomology: off-center cocycles, `4n−1` of them
/// (7 for n = 2), orthonormal.
pub fn cohomology_basis(pair: &FrequencyPair) -> Vec<ConstantPair> {
    let n = pair.n();
    let w = cocycle_normal(pair);
    let g0 = 2 * n + 1;
    let support: Vec<usize> = (0..2 * n).chain(g0..g0 + 2 * n).collect();
    orthonormal_complement(&w, &support)
        .iter()
        .map(|v| pair_from_vec(v))
        .collect()
}

/// Numerical rank of a set of pairs viewed as vectors.
pub fn rank_of_pairs(pairs: &[ConstantPair], tol: f64) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    let cols: Vec<Vec<f64>> = pairs.iter().map(pair_to_vec).collect();
    let m = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    m.rank(tol)
}

/// Coordinate charts on the constraint manifold of family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartId {
    /// All coefficients except the `Λ₁`-coefficient of `F₂`, which is solved for.
    SolveF2Lambda1,
}

/// A parameter `λ = (F₁, F₂)` of the algebraic family `y_i^λ = x·exp(Y_i + F_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParameter {
    pub f1: HeisVector,
    pub f2: HeisVector,
    pub chart_id: ChartId,
}

impl FamilyParameter {
    pub fn zero(n: usize) -> Self {
        Self {
            f1: HeisVector::zero(n),
            f2: HeisVector::zero(n),
            chart_id: ChartId::SolveF2Lambda1,
        }
    }

    pub fn n(&self) -> usize {
        self.f1.n()
    }

    /// Number of chart coordinates, `2(2n+1) − 1` (9 for n = 2).
    pub fn chart_dim(n: usize) -> usize {
        2 * (2 * n + 1) - 1
    }

    /// `[Y₁+F₁, Y₂+F₂]` (Z-coefficient); zero iff the generated maps commute.
    pub fn relation_defect(&self, pair: &FrequencyPair) -> f64 {
        let a = HeisVector::y_tau(&pair.tau_vec).add(&self.f1);
        let b = HeisVector::y_eta(&pair.eta_vec).add(&self.f2);
        a.omega(&b)
    }

    /// Chart coordinates: the flat `(F₁, F₂)` vector with the solved slot removed.
    pub fn chart_coords(&self) -> Vec<f64> {
        let n = self.n();
        let mut v = self.f1.to_vec();
        v.extend(self.f2.to_vec());
        v.remove(Self::solved_slot(n));
        v
    }

    /// Index of the solved coefficient in the flat `(F₁, F₂)` vector.
    pub fn solved_slot(n: usize) -> usize {
        (2 * n + 1) + n
    }

    /// Point of the constraint manifold with the given chart coordinates.
    pub fn from_chart(coords: &[f64], pair: &FrequencyPair) -> Result<Self> {
        let n = pair.n();
        if coords.len() != Self::chart_dim(n) {
            return Err(TorusError::InvalidInput(format!(
                "{} chart coordinates, expected {}",
                coords.len(),
                Self::chart_dim(n)
            )));
        }
        let slot = Self::solved_slot(n);
        let mut v = coords.to_vec();
        v.insert(slot, 0.0);
        let (f1, mut f2) = pair_from_vec(&v);
        // Relation is affine in the solved slot with slope τ₁ + f1_X1.
        let slope = pair.tau_vec[0] + f1.x_part[0];
        if slope.abs() < 1e-12 {
            return Err(TorusError::ChartSingular { slope });
        }
        let trial = Self {
            f1: f1.clone(),
            f2: f2.clone(),
            chart_id: ChartId::SolveF2Lambda1,
        };
        let rest = trial.relation_defect(pair);
        f2.lam_part[0] = -rest / slope;
        Ok(Self {
            f1,
            f2,
            chart_id: ChartId::SolveF2Lambda1,
        })
    }

    /// The ten (for n = 2) coefficients `f_i^k` in the order `F₁, F₂`.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.f1.to_vec();
        v.extend(self.f2.to_vec());
        v
    }
}

/// The constant fields `(F₁^λ, F₂^λ)`, checked against the commutation relation.
pub fn family_generators(lam: &FamilyParameter, pair: &FrequencyPair) -> Result<ConstantPair> {
    let d = lam.relation_defect(pair);
    if d.abs() > CONSTRAINT_TOL {
        return Err(TorusError::ConstraintViolated { defect: d });
    }
    Ok((lam.f1.clone(), lam.f2.clone()))
}

/// Canonical representative of the algebraic-conjugacy class of `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedParameter {
    pub lam: FamilyParameter,
    /// Minimal-norm constant `H` with `(F_i)_c = −[Y_i, H]`.
    pub h: HeisVector,
    /// True when the off-center parts vanish, so `exp H` conjugates exactly.
    pub exact: bool,
}

/// Remove the centers of `λ`, the directions swept by constant conjugacies.
pub fn reduce_conjugacy(lam: &FamilyParameter, pair: &FrequencyPair) -> ReducedParameter {
    let n = lam.n();
    let tau2: f64 = pair.tau_vec.iter().map(|x| x * x).sum();
    let eta2: f64 = pair.eta_vec.iter().map(|x| x * x).sum();
    // f1_c = −τ·h_Λ and f2_c = η·h_X.
    let h = HeisVector::new(
        pair.eta_vec
            .iter()
            .map(|e| lam.f2.z_part * e / eta2)
            .collect(),
        pair.tau_vec
            .iter()
            .map(|t| -lam.f1.z_part * t / tau2)
            .collect(),
        0.0,
    );
    let exact = lam
        .f1
        .off_center()
        .iter()
        .chain(lam.f2.off_center().iter())
        .all(|&x| x == 0.0);
    let mut out = lam.clone();
    out.f1.z_part = 0.0;
    out.f2.z_part = 0.0;
    debug_assert_eq!(out.n(), n);
    ReducedParameter { lam: out, h, exact }
}
