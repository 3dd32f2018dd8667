//! Vector fields `Σ a_j(u) X_j + Σ b_j(u) Λ_j + c(u) Z` with coefficients on 𝕋²ⁿ.

use heiskam_fourier::grid::{fit_real, sample_real};
use heiskam_fourier::json::field_from_value;
use heiskam_fourier::{SmoothingProfile, TorusField};
use heiskam_torus::HeisVector;
use num_complex::Complex64;
use serde_json::Value;

use crate::grid::SampleGrid;
use crate::{DynamicsError, Result};

/// Components ordered `X₁…X_n, Λ₁…Λ_n, Z`, all real, sharing `n` and the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusClassVectorField {
    n: usize,
    cutoff: usize,
    comps: Vec<TorusField>,
}

fn real(c: f64) -> Complex64 {
    Complex64::new(c, 0.0)
}

impl TorusClassVectorField {
    pub fn zero(n: usize, cutoff: usize) -> Self {
        Self {
            n,
            cutoff,
            comps: vec![TorusField::zero(n, cutoff, true); 2 * n + 1],
        }
    }

    /// The constant field `v`.
    pub fn constant(v: &HeisVector, cutoff: usize) -> Self {
        let n = v.n();
        let comps = v
            .to_vec()
            .into_iter()
            .map(|c| {
                if c == 0.0 {
                    TorusField::zero(n, cutoff, true)
                } else {
                    TorusField::constant(n, cutoff, real(c)).into_real()
                }
            })
            .collect();
        Self { n, cutoff, comps }
    }

    /// Assemble from `2n+1` real fields; the cutoff becomes the largest one.
    pub fn from_components(comps: Vec<TorusField>) -> Result<Self> {
        if comps.is_empty() || comps.len() % 2 == 0 {
            return Err(DynamicsError::InvalidInput(format!(
                "{} components; expected 2n+1",
                comps.len()
            )));
        }
        let n = comps.len() / 2;
        if let Some(c) = comps.iter().find(|c| c.n() != n) {
            return Err(DynamicsError::InvalidInput(format!(
                "component on 𝕋^{} in a field on 𝕋^{}",
                c.dim(),
                2 * n
            )));
        }
        if comps.iter().any(|c| !c.is_real_valued()) {
            return Err(DynamicsError::InvalidInput(
                "components must be real-valued".into(),
            ));
        }
        let cutoff = comps.iter().map(|c| c.cutoff()).max().unwrap_or(0);
        let comps = comps
            .into_iter()
            .map(|c| c.with_cutoff(cutoff))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { n, cutoff, comps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `2n + 1`.
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    pub fn component(&self, k: usize) -> &TorusField {
        &self.comps[k]
    }

    pub fn components(&self) -> &[TorusField] {
        &self.comps
    }

    pub fn set_component(&mut self, k: usize, f: TorusField) -> Result<()> {
        if f.n() != self.n || !f.is_real_valued() {
            return Err(DynamicsError::InvalidInput("incompatible component".into()));
        }
        self.cutoff = self.cutoff.max(f.cutoff());
        self.comps[k] = f;
        for c in &mut self.comps {
            *c = c.with_cutoff(self.cutoff)?;
        }
        Ok(())
    }

    /// The `Z` coefficient `F_c`.
    pub fn center(&self) -> &TorusField {
        &self.comps[2 * self.n]
    }

    /// `F_T`: the field with its center coefficient removed.
    pub fn off_center_part(&self) -> Self {
        let mut out = self.clone();
        out.comps[2 * self.n] = TorusField::zero(self.n, self.cutoff, true);
        out
    }

    /// `F_c Z`.
    pub fn center_part(&self) -> Self {
        let mut out = Self::zero(self.n, self.cutoff);
        out.comps[2 * self.n] = self.comps[2 * self.n].clone();
        out
    }

    /// Haar average of every coefficient.
    pub fn average(&self) -> HeisVector {
        let v: Vec<f64> = self.comps.iter().map(|c| c.mean().re).collect();
        HeisVector::from_slice(&v)
    }

    /// `F − Ave(F)_T`: off-center averages removed, center untouched.
    pub fn without_off_center_average(&self) -> Self {
        let mut out = self.clone();
        for k in 0..2 * self.n {
            out.comps[k] = out.comps[k].without_mean();
        }
        out
    }

    pub fn map_components<F>(&self, mut f: F) -> Self
    where
        F: FnMut(usize, &TorusField) -> TorusField,
    {
        let comps: Vec<TorusField> = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, c)| f(k, c))
            .collect();
        let cutoff = comps
            .iter()
            .map(|c| c.cutoff())
            .max()
            .unwrap_or(self.cutoff);
        let comps = comps
            .into_iter()
            .map(|c| {
                c.with_cutoff(cutoff)
                    .unwrap_or_else(|_| c.truncated(cutoff))
            })
            .collect();
        Self {
            n: self.n,
            cutoff,
            comps,
        }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(DynamicsError::InvalidInput(
                "fields on different tori".into(),
            ));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.add_scaled(real(a), y))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            n: self.n,
            cutoff: self.cutoff.max(other.cutoff),
            comps,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_components(|_, c| c.scale_real(a))
    }

    /// `F + v` for a constant `v`.
    pub fn add_constant(&self, v: &HeisVector) -> Self {
        let vals = v.to_vec();
        self.map_components(|k, c| {
            if vals[k] == 0.0 {
                c.clone()
            } else {
                let mut out = c.clone();
                out.add_at(&vec![0; 2 * self.n], real(vals[k]))
                    .expect("mean is inside every cutoff");
                out
            }
        })
    }

    /// `F(u + shift)`, exact by phase multiplication.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.apply_translation_multiplier(shift))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            n: self.n,
            cutoff: self.cutoff,
            comps,
        })
    }

    /// `[v, F]` for constant `v`: the Z-field `Σ v_{X,j} F_{Λ,j} − v_{Λ,j} F_{X,j}`.
    pub fn bracket_constant_left(&self, v: &HeisVector) -> Result<Self> {
        let n = self.n;
        let mut z = TorusField::zero(n, self.cutoff, true);
        for j in 0..n {
            if v.x_part[j] != 0.0 {
                z = z.add_scaled(real(v.x_part[j]), &self.comps[n + j])?;
            }
            if v.lam_part[j] != 0.0 {
                z = z.add_scaled(real(-v.lam_part[j]), &self.comps[j])?;
            }
        }
        let mut out = Self::zero(n, self.cutoff);
        out.comps[2 * n] = z;
        Ok(out)
    }

    /// `(Σ_k ‖F_k‖²_s)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.comps
            .iter()
            .map(|c| c.sobolev_norm(s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_k Σ_m |c_m|`, an upper bound for the sup norm of every component.
    pub fn l1_coeff_norm(&self) -> f64 {
        self.comps.iter().map(l1).sum()
    }

    /// `Σ_m |c_m|` of the off-center components, bounding the torus displacement.
    pub fn off_center_l1(&self) -> f64 {
        self.comps[..2 * self.n].iter().map(l1).fold(0.0, f64::max)
    }

    /// `max_k Σ_m 2π|m|₁ |c_m|` over off-center components, a Lipschitz bound of
    /// `u ↦ off(F(u))` in the sup norm.
    pub fn off_center_lipschitz(&self) -> f64 {
        let dim = 2 * self.n;
        let mut best = 0.0f64;
        for c in &self.comps[..dim] {
            let s: f64 = c
                .iter()
                .map(|(m, v)| {
                    let w: i64 = m[..dim].iter().map(|&x| (x as i64).abs()).sum();
                    2.0 * std::f64::consts::PI * w as f64 * v.norm()
                })
                .sum();
            best = best.max(s);
        }
        best
    }

    /// Largest absolute sample over a grid with `factor·(N+1)` points per active axis.
    pub fn sup_norm_sampled(&self, factor: usize) -> Result<f64> {
        let grid = SampleGrid::for_fields(&[self], self.cutoff, factor);
        let mut best = 0.0f64;
        for c in &self.comps {
            if c.is_empty() {
                continue;
            }
            for v in sample_real(c, grid.shape())? {
                best = best.max(v.abs());
            }
        }
        Ok(best)
    }

    pub fn smoothing_apply(&self, prof: &SmoothingProfile) -> Self {
        self.map_components(|_, c| c.smoothing_apply(prof))
    }

    pub fn truncated(&self, cutoff: usize) -> Self {
        Self {
            n: self.n,
            cutoff,
            comps: self.comps.iter().map(|c| c.truncated(cutoff)).collect(),
        }
    }

    /// Drop coefficients below `rel` times the largest coefficient of the field.
    pub fn pruned(&self, rel: f64) -> Self {
        let top = self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
        let mut out = self.clone();
        for c in &mut out.comps {
            c.prune(rel * top);
        }
        out
    }

    /// Axes of 𝕋²ⁿ on which some component depends.
    pub fn active_axes(&self) -> Vec<bool> {
        let mut act = vec![false; 2 * self.n];
        for c in &self.comps {
            for (a, b) in act.iter_mut().zip(c.active_axes()) {
                *a |= b;
            }
        }
        act
    }

    /// Number of components that are not identically zero.
    pub fn nonzero_components(&self) -> usize {
        self.comps
            .iter()
            .filter(|c| c.iter().any(|(_, v)| v.norm() > 0.0))
            .count()
    }

    /// Largest coefficient modulus over all components.
    pub fn max_coeff(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Sample every component on `grid`.
    pub fn sample(&self, grid: &SampleGrid) -> Result<Vec<Vec<f64>>> {
        self.comps
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(vec![0.0; grid.total()])
                } else {
                    Ok(sample_real(c, grid.shape())?)
                }
            })
            .collect()
    }

    /// Fit component samples on `grid` at the given cutoff. Returns the field and
    /// the relative energy left above `keep` (including bins outside the fit).
    pub fn fit(
        n: usize,
        grid: &SampleGrid,
        samples: &[Vec<f64>],
        fit_cutoff: usize,
        keep: usize,
    ) -> Result<(Self, f64)> {
        let mut comps = Vec::with_capacity(samples.len());
        let mut above = 0.0;
        let mut total = 0.0;
        for s in samples {
            let (f, rep) = fit_real(n, fit_cutoff, grid.shape(), s, 0.0)?;
            let dim = 2 * n;
            let e_high: f64 = f
                .iter()
                .filter(|(m, _)| heiskam_fourier::mode_sup(m, dim) > keep)
                .map(|(_, c)| c.norm_sqr())
                .sum();
            above += e_high + rep.discarded_energy;
            total += rep.total_energy;
            let kept = f.truncated(keep);
            let mut kept = kept;
            kept.prune(0.0);
            comps.push(kept.into_real());
        }
        let ratio = if total > 0.0 {
            (above / total).sqrt()
        } else {
            0.0
        };
        Ok((Self::from_components(comps)?.with_cutoff_exact(keep), ratio))
    }

    fn with_cutoff_exact(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        for c in &mut self.comps {
            *c = c.truncated(cutoff);
        }
        self
    }

    /// `{"basis_order": [...], "components": [TorusField…]}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        let names: Vec<String> = basis_names(self.n)
            .into_iter()
            .map(|s| format!("\"{s}\""))
            .collect();
        let comps: Vec<String> = self.comps.iter().map(|c| c.to_json()).collect();
        format!(
            "{{\"basis_order\":[{}],\"components\":[{}]}}",
            names.join(","),
            comps.join(",")
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)
            .map_err(|e| DynamicsError::InvalidInput(format!("vector field JSON: {e}")))?;
        let comps = v
            .get("components")
            .and_then(|c| c.as_array())
            .ok_or_else(|| DynamicsError::InvalidInput("missing components".into()))?;
        let fields = comps
            .iter()
            .map(field_from_value)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let out = Self::from_components(fields)?;
        if let Some(order) = v.get("basis_order").and_then(|b| b.as_array()) {
            let want = basis_names(out.n);
            let got: Vec<&str> = order.iter().filter_map(|x| x.as_str()).collect();
            if got != want {
                return Err(DynamicsError::InvalidInput(format!(
                    "basis order {got:?}, expected {want:?}"
                )));
            }
        }
        Ok(out)
    }
}

fn l1(c: &TorusField) -> f64 {
    c.iter().map(|(_, v)| v.norm()).sum()
}

/// `X1…Xn, L1…Ln, Z`.
pub fn basis_names(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=n).map(|j| format!("X{j}")).collect();
    v.extend((1..=n).map(|j| format!("L{j}")));
    v.push("Z".into());
    v
}

/// Pointwise bracket `[U, V] = (Σ U_{X,j}V_{Λ,j} − U_{Λ,j}V_{X,j}) Z`.
///
/// Products are formed exactly on a grid resolving the sum of the spectra and
/// the result is truncated to the larger input cutoff.
pub fn bracket(
    u: &TorusClassVectorField,
    v: &TorusClassVectorField,
) -> Result<TorusClassVectorField> {
    if u.n != v.n {
        return Err(DynamicsError::InvalidInput(
            "fields on different tori".into(),
        ));
    }
    let n = u.n;
    let dim = 2 * n;
    let cutoff = u.cutoff.max(v.cutoff);
    let mut out = TorusClassVectorField::zero(n, cutoff);
    let ext = |f: &TorusClassVectorField| {
        let mut e = vec![0usize; dim];
        for c in &f.comps[..dim] {
            for (a, b) in e.iter_mut().zip(c.axis_extent()) {
                *a = (*a).max(b);
            }
        }
        e
    };
    let (eu, ev) = (ext(u), ext(v));
    let sum_ext: Vec<usize> = eu.iter().zip(&ev).map(|(a, b)| a + b).collect();
    let fit_cut = sum_ext.iter().copied().max().unwrap_or(0);
    let shape: Vec<usize> = sum_ext
        .iter()
        .map(|&e| if e > 0 { 2 * fit_cut + 2 } else { 1 })
        .collect();
    let grid = SampleGrid::from_shape(n, shape);
    let total = grid.total();
    let su = u.sample(&grid)?;
    let sv = v.sample(&grid)?;
    let mut z = vec![0.0; total];
    for j in 0..n {
        for i in 0..total {
            z[i] += su[j][i] * sv[n + j][i] - su[n + j][i] * sv[j][i];
        }
    }
    if z.iter().any(|&x| x != 0.0) {
        let (f, _) = fit_real(n, fit_cut, grid.shape(), &z, 0.0)?;
        let mut f = f.truncated(cutoff);
        f.prune(0.0);
        out.comps[dim] = f.into_real();
    }
    Ok(out)
}
