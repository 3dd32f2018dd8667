//! Rotated coordinates in which τ⃗ acts by translation in `z₁` and η⃗ by
//! modulation in `z₂`.

use heiskam_diophantine::FrequencyPair;
use nalgebra::DMatrix;

use crate::{Result, SchrodingerError};

/// Special-orthogonal `A` with `Aτ⃗ = (τ, 0, …)` and `Aη⃗ = (0, ν₂, 0, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedFrame {
    pub a: DMatrix<f64>,
    pub tau: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Representation parameter (fixed to +1).
    pub rep_parameter: i32,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rows `τ⃗/τ`, `±η⃗/|η⃗|`, then Gram–Schmidt on the standard axes. The sign of
/// row 2 is chosen so that `det A = +1`.
pub fn build_frame(pair: &FrequencyPair) -> Result<RotatedFrame> {
    build_frame_from(&pair.tau_vec, &pair.eta_vec)
}

pub fn build_frame_from(tau_vec: &[f64], eta_vec: &[f64]) -> Result<RotatedFrame> {
    let n = tau_vec.len();
    if n < 2 || eta_vec.len() != n {
        return Err(SchrodingerError::DegeneratePair(
            "need two vectors of equal length n ≥ 2".into(),
        ));
    }
    let tau = dot(tau_vec, tau_vec).sqrt();
    let r1: Vec<f64> = tau_vec.iter().map(|x| x / tau).collect();
    let mut r2 = eta_vec.to_vec();
    let d = dot(&r2, &r1);
    for (x, y) in r2.iter_mut().zip(&r1) {
        *x -= d * y;
    }
    let nr2 = dot(&r2, &r2).sqrt();
    if !(tau > 0.0) || nr2 <= 1e-12 * dot(eta_vec, eta_vec).sqrt().max(f64::MIN_POSITIVE) {
        return Err(SchrodingerError::DegeneratePair(
            "τ⃗ and η⃗ do not span a 2-plane".into(),
        ));
    }
    let r2: Vec<f64> = r2.iter().map(|x| x / nr2).collect();
    let mut rows = vec![r1, r2];
    for i in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                let d = dot(&v, r);
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= d * y;
                }
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-6 {
            rows.push(v.iter().map(|x| x / nv).collect());
        }
    }
    let mut a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    if a.determinant() < 0.0 {
        for j in 0..n {
            a[(1, j)] = -a[(1, j)];
        }
    }
    let nu1 = (0..n).map(|j| a[(0, j)] * eta_vec[j]).sum();
    let nu2 = (0..n).map(|j| a[(1, j)] * eta_vec[j]).sum();
    Ok(RotatedFrame {
        a,
        tau,
        nu1,
        nu2,
        rep_parameter: 1,
    })
}

impl RotatedFrame {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `‖AAᵀ − I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.n();
        (&self.a * self.a.transpose() - DMatrix::identity(n, n))
            .abs()
            .max()
    }

    pub fn determinant(&self) -> f64 {
        self.a.determinant()
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.a[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Spacing `2π/|ν₂|` of the zero hyperplanes of the modulation multiplier.
    pub fn eta_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.nu2.abs()
    }
}
