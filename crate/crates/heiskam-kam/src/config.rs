//! Schedule, tolerances and the step bounds.

use serde::{Deserialize, Serialize};

use crate::{KamError, Result};

/// Constants of the five-term remainder bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrConstants {
    pub c: f64,
    pub c_r: f64,
    pub c_r0: f64,
}

impl Default for ErrConstants {
    fn default() -> Self {
        Self {
            c: 1.0,
            c_r: 1.0,
            c_r0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KamConfig {
    /// Regularity offset `r₀`.
    pub r0: u32,
    /// Working regularity `r`.
    pub r: u32,
    /// `t_n = t₀ ρⁿ`.
    pub t0: f64,
    pub rho: f64,
    /// Fourier cutoff of every field in the loop.
    pub cutoff: usize,
    pub eps_target: f64,
    pub max_iters: usize,
    pub newton_tol: f64,
    /// Radius of the parameter ball around 0 (sup norm).
    pub lambda_ball_radius: f64,
    /// Bound `C̄` of the admissibility gate.
    pub c_bar: f64,
    /// Constant of the average gate `|Ave[Y₂,F₁] − Ave[Y₁,F₂]| ≤ C‖F₁‖‖F₂‖`.
    pub c_avg: f64,
    /// Sobolev index standing in for the `C⁰` norm `‖·‖₀`.
    pub base_regularity: f64,
    /// Sample points per active axis are `grid_factor·(cutoff + 1)`.
    pub grid_factor: usize,
    /// Points per active axis of the grid used by the conjugacy check.
    pub check_points: usize,
    pub err_constants: ErrConstants,
}

impl Default for KamConfig {
    fn default() -> Self {
        Self {
            r0: 3,
            r: 12,
            t0: 8.0,
            rho: 1.4,
            cutoff: 64,
            eps_target: 1e-10,
            max_iters: 10,
            newton_tol: 1e-14,
            lambda_ball_radius: 1e-2,
            c_bar: 1e4,
            c_avg: 10.0,
            base_regularity: 3.0,
            grid_factor: 2,
            check_points: 97,
            err_constants: ErrConstants::default(),
        }
    }
}

impl KamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(KamError::InvalidConfig(m.into()));
        if self.r0 == 0 || self.r == 0 {
            return bad("r0 and r must be positive");
        }
        if !(self.t0 > 0.0) || !(self.rho > 1.0) {
            return bad("schedule needs t0 > 0 and rho > 1");
        }
        if self.cutoff == 0 || self.grid_factor < 2 || self.check_points < 3 {
            return bad("cutoff, grid_factor ≥ 2 and check_points ≥ 3 required");
        }
        if !(self.eps_target > 0.0) || !(self.newton_tol > 0.0) || !(self.lambda_ball_radius > 0.0)
        {
            return bad("tolerances and radius must be positive");
        }
        if !(self.c_bar > 0.0) || !(self.c_avg > 0.0) {
            return bad("gate constants must be positive");
        }
        Ok(())
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t0 * self.rho.powi(n as i32)
    }

    /// Spacing of the λ-stencil.
    pub fn stencil_spacing(&self) -> f64 {
        1e-4 * self.lambda_ball_radius
    }

    /// Sobolev index of `δ_{r,n}`, i.e. `‖·‖_{r₀+r}` over the base index.
    pub fn delta_regularity(&self) -> f64 {
        self.base_regularity + (self.r0 + self.r) as f64
    }

    /// `t^{r₀} ε^{1−1/(r+r₀)} δ^{1/(r+r₀)}`.
    pub fn admissibility(&self, t: f64, eps: f64, delta: f64) -> f64 {
        let q = 1.0 / (self.r + self.r0) as f64;
        t.powi(self.r0 as i32) * eps.powf(1.0 - q) * delta.powf(q)
    }

    /// The five-term bound `Err_{n+1}(t, r)`.
    pub fn err_predicted(&self, t: f64, eps: f64, delta: f64) -> f64 {
        let k = &self.err_constants;
        let rr = (self.r0 + self.r) as f64;
        let a = (self.r0 as f64 + 1.0) / rr;
        let t2 = t.powi(2 * self.r0 as i32);
        k.c * eps * eps
            + k.c * delta.powf(a) * eps.powf(2.0 - a)
            + k.c_r * t.powi(-(self.r as i32)) * delta
            + k.c_r0 * t2 * eps.powf(2.0 - 1.0 / rr) * delta.powf(1.0 / rr)
            + k.c_r0 * t2 * eps.powf(3.0 - 1.0 / rr) * delta.powf(2.0 / rr)
    }

    /// `(1 + C t^{r₀} ε^{1−1/(r+r₀)} δ^{1/(r+r₀)}) K_n`.
    pub fn k_predicted(&self, t: f64, eps: f64, delta: f64, k: f64) -> f64 {
        (1.0 + self.err_constants.c * self.admissibility(t, eps, delta)) * k
    }

    /// `C Err + C K (K t^{r₀} ε + Err)²`, the bound on `|λ_{n+1} − λ_n|`.
    pub fn dlambda_bound(&self, t: f64, eps: f64, k: f64, err: f64) -> f64 {
        let c = self.err_constants.c;
        let inner = k * t.powi(self.r0 as i32) * eps + err;
        c * err + c * k * inner * inner
    }
}
