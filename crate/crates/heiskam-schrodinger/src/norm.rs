//! Sobolev norms of the harmonic oscillator `Box = I + Σ (z_i² − ∂²_{z_i})`.
//!
//! Products of Hermite functions diagonalize `Box` with eigenvalues
//! `1 + n + 2Σk_i`, so `‖f‖_s² = Σ_k (1 + n + 2|k|)^s |⟨f, h_k⟩|²`.

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;

use crate::grid::GridField;
use crate::{Result, SchrodingerError};

/// Cap on the Hermite degree per axis.
pub const MAX_HERMITE_DEGREE: usize = 96;
/// Largest unexpanded `L²` fraction accepted.
pub const REMAINDER_TOL: f64 = 1e-8;
/// Largest weighted fraction allowed in the top shell of degrees.
pub const TOP_SHELL_TOL: f64 = 1e-8;
/// Width of the top shell.
const TOP_SHELL: usize = 8;

/// Hermite degree the grid resolves: turning points `√(2K+1)` stay inside `0.75 L`.
pub fn resolvable_degree(f: &GridField) -> usize {
    let r = 0.75 * f.extent;
    let k = ((r * r - 1.0) / 2.0).floor().max(0.0) as usize;
    k.min(MAX_HERMITE_DEGREE)
}

/// `h_k(z_j)` for `k ≤ kmax`, row-major `[k][j]`.
pub fn hermite_table(coords: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; coords.len()]; kmax + 1];
    let c0 = std::f64::consts::PI.powf(-0.25);
    for (j, &z) in coords.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = c0 * (-0.5 * z * z).exp();
        t[0][j] = cur;
        for k in 0..kmax {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            t[k + 1][j] = cur;
        }
    }
    t
}

/// Hermite coefficients `⟨f, h_{k₁}⊗…⊗h_{k_n}⟩` for `k_i ≤ kmax`.
pub fn hermite_coefficients(f: &GridField, kmax: usize) -> ArrayD<Complex64> {
    let table = hermite_table(&f.coords(), kmax);
    let h = f.spacing();
    let mut arr = f.samples.clone();
    for axis in 0..f.n {
        let mut shape = arr.shape().to_vec();
        shape[axis] = kmax + 1;
        let mut out = ArrayD::<Complex64>::zeros(IxDyn(&shape));
        for (mut o, i) in out
            .lanes_mut(Axis(axis))
            .into_iter()
            .zip(arr.lanes(Axis(axis)))
        {
            for k in 0..=kmax {
                let row = &table[k];
                let mut acc = Complex64::default();
                for (v, w) in i.iter().zip(row) {
                    acc += v * *w;
                }
                o[k] = acc * h;
            }
        }
        arr = out;
    }
    arr
}

/// `⟨Box^s f, f⟩^{1/2}` through the truncated Hermite expansion.
pub fn box_norm(f: &GridField, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(SchrodingerError::InvalidGrid(format!(
            "s = {s} must be nonnegative"
        )));
    }
    let kmax = resolvable_degree(f);
    let coeffs = hermite_coefficients(f, kmax);
    let l2 = f.l2_norm().powi(2);
    if l2 == 0.0 {
        return Ok(0.0);
    }
    let mut captured = 0.0;
    let mut weighted = 0.0;
    let mut top = 0.0;
    for (idx, c) in coeffs.indexed_iter() {
        let e = c.norm_sqr();
        let ksum: usize = (0..f.n).map(|i| idx[i]).sum();
        let w = (1.0 + f.n as f64 + 2.0 * ksum as f64).powf(s) * e;
        captured += e;
        weighted += w;
        if (0..f.n).any(|i| idx[i] + TOP_SHELL > kmax) {
            top += w;
        }
    }
    let remainder = (l2 - captured).max(0.0) / l2;
    let top_frac = if weighted > 0.0 { top / weighted } else { 0.0 };
    if remainder > REMAINDER_TOL || top_frac > TOP_SHELL_TOL {
        return Err(SchrodingerError::ResolutionExceeded {
            remainder,
            top_shell: top_frac,
        });
    }
    Ok(weighted.sqrt())
}
