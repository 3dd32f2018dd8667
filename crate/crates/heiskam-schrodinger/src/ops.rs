//! Coboundary operators, invariant distributions and the bump projection.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::{ArrayD, Axis, Zip};
use num_complex::Complex64;

use crate::bump::{build_bump, perturbed_bump, BumpProfile};
use crate::frame::RotatedFrame;
use crate::grid::{translate_periodic, GridField};
use crate::{Result, SchrodingerError};

/// `R_ψ f` counts as vanishing below this fraction of `‖f‖`.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// Frequencies `m` checked by the annihilator tests.
pub const DEFAULT_M_CHECK: i64 = 8;

/// `L_τ f(z) = f(z − τe₁) − f(z)`.
pub fn l_tau_apply(f: &GridField, frame: &RotatedFrame) -> GridField {
    translate_periodic(f, 0, frame.tau)
        .sub(f)
        .expect("same grid")
}

/// `exp(iν₂z₂) − 1` along the z₂ axis.
pub fn eta_multiplier(f: &GridField, frame: &RotatedFrame) -> Vec<Complex64> {
    f.coords()
        .iter()
        .map(|&z| {
            // exp(iθ) − 1 = 2i sin(θ/2) exp(iθ/2), accurate near the zeros.
            let half = 0.5 * frame.nu2 * z;
            Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, half)
        })
        .collect()
}

/// `L_η f(z) = (exp(iν₂z₂) − 1) f(z)`.
pub fn l_eta_apply(f: &GridField, frame: &RotatedFrame) -> GridField {
    f.multiply_along(1, &eta_multiplier(f, frame))
}

/// Largest `m` whose frequency `m/τ` the grid resolves.
pub fn resolvable_m(f: &GridField, frame: &RotatedFrame) -> i64 {
    (frame.tau * f.points as f64 / (4.0 * f.extent)).floor() as i64
}

/// `π_{m,τ} f = 𝓕₁f(m/τ, z₂, …)` by the rectangle rule in `z₁`.
pub fn pi_m_tau(f: &GridField, m: i64, frame: &RotatedFrame) -> ArrayD<Complex64> {
    let omega = m as f64 / frame.tau;
    let h = f.spacing();
    let w: Vec<Complex64> = f
        .coords()
        .iter()
        .map(|&z| Complex64::from_polar(h, -2.0 * PI * omega * z))
        .collect();
    contract_axis0(&f.samples, &w)
}

fn contract_axis0(arr: &ArrayD<Complex64>, w: &[Complex64]) -> ArrayD<Complex64> {
    let mut out = arr.index_axis(Axis(0), 0).mapv(|_| Complex64::default());
    for (k, sub) in arr.axis_iter(Axis(0)).enumerate() {
        let wk = w[k];
        Zip::from(&mut out).and(&sub).for_each(|o, &v| *o += v * wk);
    }
    out
}

/// `L²` norm of a function on the remaining axes.
pub fn section_norm(q: &ArrayD<Complex64>, h: f64) -> f64 {
    (q.iter().map(|c| c.norm_sqr()).sum::<f64>() * h.powi(q.ndim() as i32)).sqrt()
}

/// `max_{|m| ≤ m_max} ‖π_{m,τ} f‖ / ‖f‖`.
pub fn annihilator_tau_defect(f: &GridField, frame: &RotatedFrame, m_max: i64) -> f64 {
    let nf = f.l2_norm();
    if nf == 0.0 {
        return 0.0;
    }
    let h = f.spacing();
    (-m_max..=m_max)
        .map(|m| section_norm(&pi_m_tau(f, m, frame), h))
        .fold(0.0, f64::max)
        / nf
}

/// `Π_{m,τ} q (z) = ψ(z₁) exp(2πi m z₁/τ) q(z₂, …)`.
pub fn big_pi_m(q: &ArrayD<Complex64>, m: i64, bump: &BumpProfile, like: &GridField) -> GridField {
    let coords = like.coords();
    let w: Vec<Complex64> = coords
        .iter()
        .zip(&bump.psi_samples)
        .map(|(&z, &p)| Complex64::from_polar(p, 2.0 * PI * m as f64 * z / bump.tau))
        .collect();
    let mut out = like.zeros_like();
    for (k, mut sub) in out.samples.axis_iter_mut(Axis(0)).enumerate() {
        let wk = w[k];
        Zip::from(&mut sub).and(q).for_each(|o, &v| *o = v * wk);
    }
    out
}

/// Obstruction part `Σ_m Π_m c_m` with `c = G⁻¹ π f`, where
/// `G_{m'm} = π_{m'}(Π_m 1)` is the discrete Gram matrix of the pairing.
pub fn obstruction_part(f: &GridField, bump: &BumpProfile, frame: &RotatedFrame) -> GridField {
    let big_m = resolvable_m(f, frame);
    let ms: Vec<i64> = (-big_m..=big_m).collect();
    let k = ms.len();
    let h = f.spacing();
    let coords = f.coords();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        let nu = (ms[j] - ms[i]) as f64 / frame.tau;
        coords
            .iter()
            .zip(&bump.psi_samples)
            .map(|(&z, &p)| Complex64::from_polar(p * h, 2.0 * PI * nu * z))
            .sum::<Complex64>()
    });
    let pis: Vec<ArrayD<Complex64>> = ms.iter().map(|&m| pi_m_tau(f, m, frame)).collect();
    let cols = pis[0].len();
    let rhs = DMatrix::from_fn(k, cols, |i, c| pis[i].as_slice_memory_order().unwrap()[c]);
    let lu = gram.lu();
    let sol = lu
        .solve(&rhs)
        .expect("Gram matrix of distinct bump modes is invertible");
    let mut out = f.zeros_like();
    for (i, &m) in ms.iter().enumerate() {
        let mut q = pis[i].clone();
        for (c, v) in q
            .as_slice_memory_order_mut()
            .unwrap()
            .iter_mut()
            .enumerate()
        {
            *v = sol[(i, c)];
        }
        let term = big_pi_m(&q, m, bump, f);
        out.samples += &term.samples;
    }
    out
}

/// `R_ψ f = f − Σ_m Π_m c_m`.
pub fn r_psi_apply(f: &GridField, bump: &BumpProfile, frame: &RotatedFrame) -> GridField {
    f.sub(&obstruction_part(f, bump, frame)).expect("same grid")
}

/// `R_ψ f` with the default bump, retried once with a narrower bump when the
/// projection kills a nonzero `f`. Returns the bump that was used.
pub fn r_psi_checked(f: &GridField, frame: &RotatedFrame) -> Result<(GridField, BumpProfile)> {
    let nf = f.l2_norm();
    let bump = build_bump(frame, f);
    let r = r_psi_apply(f, &bump, frame);
    if nf == 0.0 || r.l2_norm() > DEGENERATE_TOL * nf {
        return Ok((r, bump));
    }
    let bump = perturbed_bump(frame, f);
    let r = r_psi_apply(f, &bump, frame);
    if r.l2_norm() > DEGENERATE_TOL * nf {
        return Ok((r, bump));
    }
    Err(SchrodingerError::DegenerateProjection)
}
