//! Cohomological equations over the translation pair on 𝕋²ⁿ.
//!
//! `m₁` denotes the τ-block of a mode (its first n entries). Division is by
//! the small divisors `ζ(m, κ) = exp(2πi m·κ⃗) − 1`, which are nonzero exactly
//! when the corresponding block of `m` is nonzero.

use heiskam_diophantine::{FrequencyPair, Kappa};
use heiskam_fourier::{Mode, TorusField, ZERO_MEAN_TOL};
use num_complex::Complex64;

use crate::{Result, TorusError};

/// Relative tolerance of the cocycle compatibility `L_τ g = L_η f`.
pub const COCYCLE_TOL: f64 = 1e-10;
/// Relative level below which a coefficient stratum counts as vanishing.
pub const OBSTRUCTION_TOL: f64 = 1e-12;
/// Relative tolerance of the defect identity `L_η f − L_τ g = φ`.
pub const COCHAIN_TOL: f64 = 1e-10;

fn tau_block_zero(m: &Mode, n: usize) -> bool {
    m[..n].iter().all(|&x| x == 0)
}

fn check_zero_mean(f: &TorusField) -> Result<()> {
    let mean = f.mean().norm();
    if mean > ZERO_MEAN_TOL * (1.0 + f.sobolev_norm(0.0)) {
        return Err(TorusError::NonZeroMean { mean });
    }
    Ok(())
}

/// `R h`: keeps the coefficients with `m₁ ≠ 0`.
pub fn project_r(h: &TorusField) -> TorusField {
    let n = h.n();
    h.filter_modes(|m| !tau_block_zero(m, n))
}

/// `L_κ h` as a coefficient multiplier.
pub fn coboundary(h: &TorusField, kappa: Kappa, pair: &FrequencyPair) -> TorusField {
    h.coboundary_unchecked(kappa, pair)
}

/// The primary transfer solution `P_m = f_m/ζ(m,τ)` for `m₁ ≠ 0`, `g_m/ζ(m,η)` otherwise.
pub fn primary_solution(f: &TorusField, g: &TorusField, pair: &FrequencyPair) -> TorusField {
    let n = f.n();
    let mut p = TorusField::zero(n, f.cutoff().max(g.cutoff()), false);
    for (m, c) in f.iter() {
        if !tau_block_zero(m, n) {
            p.add_at(&m[..2 * n], c / pair.zeta(&m[..2 * n], Kappa::Tau))
                .expect("inside cutoff");
        }
    }
    for (m, c) in g.iter() {
        if tau_block_zero(m, n) && m.iter().any(|&x| x != 0) {
            p.add_at(&m[..2 * n], c / pair.zeta(&m[..2 * n], Kappa::Eta))
                .expect("inside cutoff");
        }
    }
    if f.is_real_valued() && g.is_real_valued() {
        p.symmetrize_real();
    }
    p
}

/// Output of [`solve_common_coboundary`].
#[derive(Debug, Clone)]
pub struct CoboundarySolution {
    pub p: TorusField,
    /// `‖L_τ P − f‖_0 / (‖f‖_0 + ‖g‖_0)`.
    pub residual_tau: f64,
    /// `‖L_η P − g‖_0 / (‖f‖_0 + ‖g‖_0)`.
    pub residual_eta: f64,
}

/// `‖P‖_s / (‖f‖_{s+2γ} + ‖g‖_{s+2γ})`.
pub fn tame_ratio(p: &TorusField, f: &TorusField, g: &TorusField, s: f64, gamma: f64) -> f64 {
    let den = f.sobolev_norm(s + 2.0 * gamma) + g.sobolev_norm(s + 2.0 * gamma);
    if den == 0.0 {
        0.0
    } else {
        p.sobolev_norm(s) / den
    }
}

/// Solve `L_τ P = f`, `L_η P = g` for a zero-mean cocycle `(f, g)`.
pub fn solve_common_coboundary(
    f: &TorusField,
    g: &TorusField,
    pair: &FrequencyPair,
) -> Result<CoboundarySolution> {
    check_dims(f, g, pair)?;
    check_zero_mean(f)?;
    check_zero_mean(g)?;
    let n = f.n();
    let scale = f.sobolev_norm(0.0) + g.sobolev_norm(0.0);
    for (m, c) in f.iter() {
        if tau_block_zero(m, n) && c.norm() > OBSTRUCTION_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(TorusError::ObstructionNonzero {
                m: m[..2 * n].to_vec(),
                value: c.norm(),
            });
        }
    }
    let defect = coboundary(g, Kappa::Tau, pair)
        .sub(&coboundary(f, Kappa::Eta, pair))?
        .sobolev_norm(0.0);
    if defect > COCYCLE_TOL * scale {
        return Err(TorusError::CocycleViolation { defect });
    }
    let p = primary_solution(f, g, pair);
    let rt = coboundary(&p, Kappa::Tau, pair).sub(f)?.sobolev_norm(0.0);
    let re = coboundary(&p, Kappa::Eta, pair).sub(g)?.sobolev_norm(0.0);
    let den = if scale > 0.0 { scale } else { 1.0 };
    Ok(CoboundarySolution {
        p,
        residual_tau: rt / den,
        residual_eta: re / den,
    })
}

fn check_dims(f: &TorusField, g: &TorusField, pair: &FrequencyPair) -> Result<()> {
    if f.n() != pair.n() || g.n() != pair.n() {
        return Err(TorusError::InvalidInput(format!(
            "fields on 𝕋^{} and 𝕋^{} for frequency vectors of length {}",
            f.dim(),
            g.dim(),
            pair.n()
        )));
    }
    Ok(())
}

/// Output of [`split_torus`].
#[derive(Debug, Clone)]
pub struct TorusSplit {
    pub p: TorusField,
    /// `f − L_τ P`.
    pub f_res: TorusField,
    /// `g − L_η P`.
    pub g_res: TorusField,
    /// Set when the single-mode fallback replaced a vanishing primary solution.
    pub fallback: bool,
}

impl TorusSplit {
    /// `max(‖f_res‖_s, ‖g_res‖_s) / ‖φ‖_{s+2γ}` (0 when φ = 0).
    pub fn measured_constant(&self, phi: &TorusField, s: f64, gamma: f64) -> f64 {
        let den = phi.sobolev_norm(s + 2.0 * gamma);
        if den == 0.0 {
            return 0.0;
        }
        self.f_res.sobolev_norm(s).max(self.g_res.sobolev_norm(s)) / den
    }
}

/// Split an almost-cocycle `(f, g)` with defect `φ = L_η f − L_τ g` into a
/// coboundary part `(L_τ P, L_η P)` and residuals controlled by `φ`.
pub fn split_torus(
    f: &TorusField,
    g: &TorusField,
    phi: &TorusField,
    pair: &FrequencyPair,
) -> Result<TorusSplit> {
    check_dims(f, g, pair)?;
    check_zero_mean(f)?;
    check_zero_mean(g)?;
    check_zero_mean(phi)?;
    let expect = coboundary(f, Kappa::Eta, pair).sub(&coboundary(g, Kappa::Tau, pair))?;
    let defect = expect.sub(phi)?.sobolev_norm(0.0);
    let scale = f.sobolev_norm(0.0) + g.sobolev_norm(0.0) + phi.sobolev_norm(0.0);
    if defect > COCHAIN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(TorusError::NotACochain { defect });
    }
    let mut p = primary_solution(f, g, pair);
    let mut fallback = false;
    if p.max_abs() == 0.0 && phi.max_abs() > 0.0 {
        let mut best: Option<(&Mode, Complex64)> = None;
        for (m, c) in phi.iter() {
            if best.map_or(true, |(_, b)| c.norm() > b.norm()) {
                best = Some((m, *c));
            }
        }
        let (m0, c0) = best.expect("nonzero φ has a coefficient");
        p = TorusField::single_mode(f.n(), phi.cutoff(), &m0[..f.dim()], c0)?;
        fallback = true;
    }
    let f_res = f.sub(&coboundary(&p, Kappa::Tau, pair))?;
    let g_res = g.sub(&coboundary(&p, Kappa::Eta, pair))?;
    Ok(TorusSplit {
        p,
        f_res,
        g_res,
        fallback,
    })
}
