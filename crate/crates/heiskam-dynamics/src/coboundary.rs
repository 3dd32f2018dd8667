//! The linearized operators `d₁`, `d₂` and the tame splitting of an almost-cocycle.

use heiskam_diophantine::{FrequencyPair, Kappa};
use heiskam_fourier::TorusField;
use heiskam_torus::{split_torus, HeisVector};

use crate::field::TorusClassVectorField;
use crate::maps::{compose_with_model, model_generator};
use crate::{DynamicsError, Result, AVERAGE_TOL};

/// `H∘y_i − H + ½[Y_i, H∘y_i + H]`.
fn d1_component(
    h: &TorusClassVectorField,
    i: usize,
    pair: &FrequencyPair,
) -> Result<TorusClassVectorField> {
    let y = model_generator(pair, i);
    let hy = compose_with_model(h, i, pair)?;
    let sum = hy.add(h)?;
    hy.sub(h)?.axpy(0.5, &sum.bracket_constant_left(&y)?)
}

/// `d₁H = (H∘y₁ − H + ½[Y₁, H∘y₁ + H], H∘y₂ − H + ½[Y₂, H∘y₂ + H])`,
/// the linearization of `H ↦ (h∘y₁∘h⁻¹, h∘y₂∘h⁻¹)`. Conjugating by `h⁻¹`
/// therefore removes a field equal to `d₁H` to first order.
pub fn d1(
    h: &TorusClassVectorField,
    pair: &FrequencyPair,
) -> Result<(TorusClassVectorField, TorusClassVectorField)> {
    Ok((d1_component(h, 1, pair)?, d1_component(h, 2, pair)?))
}

/// `d₂(F, G) = F∘y₂ − F + ½[Y₂, F∘y₂ + F] − (G∘y₁ − G + ½[Y₁, G∘y₁ + G])`,
/// the linearized commutator. `d₂∘d₁ = 0`.
pub fn d2(
    f: &TorusClassVectorField,
    g: &TorusClassVectorField,
    pair: &FrequencyPair,
) -> Result<TorusClassVectorField> {
    d1_component(f, 2, pair)?.sub(&d1_component(g, 1, pair)?)
}

/// `(F, G) = d₁H + (F̃, G̃)` with `Φ = d₂(F, G)`.
#[derive(Debug, Clone)]
pub struct VfSplit {
    pub h: TorusClassVectorField,
    pub f_res: TorusClassVectorField,
    pub g_res: TorusClassVectorField,
    pub phi: TorusClassVectorField,
    /// Off-center constants chosen to absorb the center averages.
    pub h_constant: HeisVector,
}

impl VfSplit {
    /// `[‖H‖_s / max(‖F‖, ‖G‖)_{s+σ}, ‖F̃‖_s / ‖Φ‖_{s+σ}, ‖G̃‖_s / ‖Φ‖_{s+σ}]`
    /// (a ratio with a vanishing denominator is reported as 0).
    pub fn estimate_ratios(
        &self,
        f: &TorusClassVectorField,
        g: &TorusClassVectorField,
        s: f64,
        sigma: f64,
    ) -> [f64; 3] {
        let r = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        let fg = f.sobolev_norm(s + sigma).max(g.sobolev_norm(s + sigma));
        let phi = self.phi.sobolev_norm(s + sigma);
        [
            r(self.h.sobolev_norm(s), fg),
            r(self.f_res.sobolev_norm(s), phi),
            r(self.g_res.sobolev_norm(s), phi),
        ]
    }
}

fn torus_split(f: &TorusField, g: &TorusField, pair: &FrequencyPair) -> Result<TorusField> {
    let phi = f
        .coboundary_unchecked(Kappa::Eta, pair)
        .sub(&g.coboundary_unchecked(Kappa::Tau, pair))?;
    Ok(split_torus(f, g, &phi, pair)?.p.into_real())
}

/// Split `(F, G)` whose off-center averages vanish.
///
/// Off-center coefficients are split one by one over the translation pair.
/// Constants `c_Λ = τ⃗ Ave F_c/|τ⃗|²`, `c_X = −η⃗ Ave G_c/|η⃗|²` are added so that
/// `[Y₁, c] = Ave F_c` and `[Y₂, c] = Ave G_c`. The center coefficient then
/// solves `L_τ H_c ≈ F_c − ½[Y₁, H_T∘y₁ + H_T]`, `L_η H_c ≈ G_c − ½[Y₂, H_T∘y₂ + H_T]`.
pub fn split_vf(
    f: &TorusClassVectorField,
    g: &TorusClassVectorField,
    pair: &FrequencyPair,
) -> Result<VfSplit> {
    let n = f.n();
    if g.n() != n || pair.n() != n {
        return Err(DynamicsError::InvalidInput("dimension mismatch".into()));
    }
    let defect = (0..2 * n)
        .map(|k| {
            f.component(k)
                .mean()
                .norm()
                .max(g.component(k).mean().norm())
        })
        .fold(0.0, f64::max);
    if defect > AVERAGE_TOL {
        return Err(DynamicsError::NontrivialClass { defect });
    }
    let cutoff = f.cutoff().max(g.cutoff());
    let mut h = TorusClassVectorField::zero(n, cutoff);
    for k in 0..2 * n {
        let p = torus_split(
            &f.component(k).without_mean(),
            &g.component(k).without_mean(),
            pair,
        )?;
        h.set_component(k, p)?;
    }
    let tau2: f64 = pair.tau_vec.iter().map(|t| t * t).sum();
    let eta2: f64 = pair.eta_vec.iter().map(|t| t * t).sum();
    let fc = f.center().mean().re;
    let gc = g.center().mean().re;
    let c = HeisVector::new(
        pair.eta_vec.iter().map(|e| -e * gc / eta2).collect(),
        pair.tau_vec.iter().map(|t| t * fc / tau2).collect(),
        0.0,
    );
    h = h.add_constant(&c);
    let center_rhs = |src: &TorusClassVectorField, i: usize| -> Result<TorusField> {
        let y = model_generator(pair, i);
        let hy = compose_with_model(&h, i, pair)?;
        let br = hy.add(&h)?.bracket_constant_left(&y)?;
        Ok(src
            .center()
            .add_scaled(num_complex::Complex64::new(-0.5, 0.0), br.center())?
            .without_mean())
    };
    let fp = center_rhs(f, 1)?;
    let gp = center_rhs(g, 2)?;
    let pc = torus_split(&fp, &gp, pair)?;
    h.set_component(2 * n, pc)?;
    let (d1f, d1g) = d1(&h, pair)?;
    Ok(VfSplit {
        f_res: f.sub(&d1f)?,
        g_res: g.sub(&d1g)?,
        phi: d2(f, g, pair)?,
        h,
        h_constant: c,
    })
}
