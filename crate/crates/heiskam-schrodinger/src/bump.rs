//! Compactly supported spectral bump and its inverse transform.

use std::f64::consts::PI;

use crate::frame::RotatedFrame;
use crate::grid::GridField;

/// Quadrature nodes for the inverse transform of the bump.
const BUMP_QUADRATURE_NODES: usize = 4001;

/// `ψ̂` supported in `[−w, w]`, `w ≤ 1/(2τ)`, with `ψ̂(0) = 1`, and samples of `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    pub tau: f64,
    /// Half-width of the support of `ψ̂`.
    pub half_width: f64,
    /// `ψ(z_k)` on the working grid (real, even).
    pub psi_samples: Vec<f64>,
}

impl BumpProfile {
    /// `ψ̂(ω) = exp(1 − 1/(1 − (ω/w)²))` for `|ω| < w`, else 0.
    pub fn hat_psi(&self, omega: f64) -> f64 {
        hat(omega, self.half_width)
    }

    /// `ψ(z) = ∫ ψ̂(ω) cos(2πωz) dω` by the trapezoid rule, which converges
    /// faster than any power for the smooth compactly supported `ψ̂`.
    pub fn psi(&self, z: f64) -> f64 {
        psi_at(z, self.half_width, BUMP_QUADRATURE_NODES)
    }
}

fn hat(omega: f64, w: f64) -> f64 {
    let x = omega / w;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

fn psi_at(z: f64, w: f64, nodes: usize) -> f64 {
    let d = 2.0 * w / (nodes - 1) as f64;
    (0..nodes)
        .map(|i| {
            let om = -w + i as f64 * d;
            hat(om, w) * (2.0 * PI * om * z).cos()
        })
        .sum::<f64>()
        * d
}

/// Default bump, supported on `[−1/(2τ), 1/(2τ)]`, sampled on the grid of `like`.
pub fn build_bump(frame: &RotatedFrame, like: &GridField) -> BumpProfile {
    bump_with_width(frame.tau, 0.5 / frame.tau, like)
}

/// Bump with a narrower support, used when the default one degenerates.
pub fn perturbed_bump(frame: &RotatedFrame, like: &GridField) -> BumpProfile {
    bump_with_width(frame.tau, 0.25 / frame.tau, like)
}

pub fn bump_with_width(tau: f64, half_width: f64, like: &GridField) -> BumpProfile {
    let psi_samples = like
        .coords()
        .iter()
        .map(|&z| psi_at(z, half_width, BUMP_QUADRATURE_NODES))
        .collect();
    BumpProfile {
        tau,
        half_width,
        psi_samples,
    }
}
