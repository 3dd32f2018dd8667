//! Constant elements of the Heisenberg Lie algebra 𝔥.

use serde::{Deserialize, Serialize};

/// `Σ x_i X_i + Σ λ_i Λ_i + z Z`, basis order `X₁…X_n, Λ₁…Λ_n, Z`, with
/// `[X_i, Λ_j] = δ_ij Z` and `Z` central.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisVector {
    pub x_part: Vec<f64>,
    pub lam_part: Vec<f64>,
    pub z_part: f64,
}

impl HeisVector {
    pub fn zero(n: usize) -> Self {
        Self {
            x_part: vec![0.0; n],
            lam_part: vec![0.0; n],
            z_part: 0.0,
        }
    }

    pub fn new(x_part: Vec<f64>, lam_part: Vec<f64>, z_part: f64) -> Self {
        assert_eq!(x_part.len(), lam_part.len());
        Self {
            x_part,
            lam_part,
            z_part,
        }
    }

    /// Central element `z Z`.
    pub fn central(n: usize, z: f64) -> Self {
        Self {
            z_part: z,
            ..Self::zero(n)
        }
    }

    /// `Y_τ = Σ τ_i X_i`.
    pub fn y_tau(tau: &[f64]) -> Self {
        Self::new(tau.to_vec(), vec![0.0; tau.len()], 0.0)
    }

    /// `Y_η = Σ η_i Λ_i`.
    pub fn y_eta(eta: &[f64]) -> Self {
        Self::new(vec![0.0; eta.len()], eta.to_vec(), 0.0)
    }

    pub fn n(&self) -> usize {
        self.x_part.len()
    }

    /// Coordinates as a flat `2n+1` vector.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x_part.clone();
        v.extend_from_slice(&self.lam_part);
        v.push(self.z_part);
        v
    }

    pub fn from_slice(v: &[f64]) -> Self {
        assert!(v.len() % 2 == 1, "length must be 2n+1");
        let n = v.len() / 2;
        Self::new(v[..n].to_vec(), v[n..2 * n].to_vec(), v[2 * n])
    }

    /// Off-center part as a `2n` vector.
    pub fn off_center(&self) -> Vec<f64> {
        let mut v = self.x_part.clone();
        v.extend_from_slice(&self.lam_part);
        v
    }

    /// Symplectic pairing `ω(U, V) = U_X·V_Λ − U_Λ·V_X`, the Z-coefficient of `[U, V]`.
    pub fn omega(&self, other: &Self) -> f64 {
        let a: f64 = self
            .x_part
            .iter()
            .zip(&other.lam_part)
            .map(|(u, v)| u * v)
            .sum();
        let b: f64 = self
            .lam_part
            .iter()
            .zip(&other.x_part)
            .map(|(u, v)| u * v)
            .sum();
        a - b
    }

    /// Lie bracket; always central.
    pub fn bracket(&self, other: &Self) -> Self {
        Self::central(self.n(), self.omega(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        Self {
            x_part: self
                .x_part
                .iter()
                .zip(&other.x_part)
                .map(|(u, v)| u + a * v)
                .collect(),
            lam_part: self
                .lam_part
                .iter()
                .zip(&other.lam_part)
                .map(|(u, v)| u + a * v)
                .collect(),
            z_part: self.z_part + a * other.z_part,
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::zero(self.n()).axpy(a, self)
    }

    /// Euclidean norm of the coordinates.
    pub fn norm(&self) -> f64 {
        self.to_vec().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}
