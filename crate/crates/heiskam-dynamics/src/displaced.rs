//! Evaluation of fields at grid points plus a small displacement.
//!
//! `f(u + s + δ) = Σ_α ∂^α f_s(u) δ^α / α!` where `f_s = f(· + s)`. The
//! derivative fields are sampled once by FFT; each evaluation is then a short
//! dot product. The order is the smallest `K` for which the per-mode remainder
//! bound `Σ_m |c_m| x_m^{K+1}/(K+1)! e^{x_m}`, `x_m = 2π|m|₁δ_max`, is below
//! [`TAYLOR_TOL`] of `Σ|c_m|`. When that fails, or the derivative tables would
//! be too large, values come from the exact Fourier sum.

use std::f64::consts::PI;

use heiskam_fourier::grid::sample_real;
use heiskam_fourier::{Evaluator, TorusField};
use num_complex::Complex64;

use crate::grid::SampleGrid;
use crate::Result;

/// Relative remainder bound of the expansion.
pub const TAYLOR_TOL: f64 = 1e-17;
/// Orders above this use the exact sum instead.
pub const MAX_TAYLOR_ORDER: usize = 24;
/// Cap on stored derivative samples.
pub const MAX_TAYLOR_VALUES: usize = 24_000_000;

#[derive(Debug, Clone)]
enum Kind {
    Taylor {
        axes: Vec<usize>,
        alphas: Vec<Vec<usize>>,
        order: usize,
        values: Vec<f64>,
    },
    Direct,
}

/// Values of a bundle of real fields at `grid point + shift + δ`. The expansion
/// is used for `|δ|_∞ ≤ δ_max`, the exact sum beyond.
#[derive(Debug, Clone)]
pub struct DisplacedEvaluator {
    dim: usize,
    comps: usize,
    grid: SampleGrid,
    delta_max: f64,
    exact: Evaluator,
    kind: Kind,
}

fn multi_indices(k: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0usize; k]];
    if k == 0 {
        return out;
    }
    for total in 1..=order {
        let mut cur = vec![0usize; k];
        fill(&mut cur, 0, total, &mut out);
    }
    out
}

fn fill(cur: &mut Vec<usize>, pos: usize, rest: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(cur.clone());
        return;
    }
    for a in (0..=rest).rev() {
        cur[pos] = a;
        fill(cur, pos + 1, rest - a, out);
    }
}

fn choose_order(fields: &[&TorusField], axes: &[usize], delta_max: f64) -> Option<usize> {
    let dim = fields[0].dim();
    let mut terms: Vec<(f64, f64)> = Vec::new();
    let mut scale = 0.0;
    for f in fields {
        for (m, c) in f.iter() {
            let w: i64 = m[..dim].iter().map(|&x| (x as i64).abs()).sum();
            terms.push((c.norm(), 2.0 * PI * w as f64 * delta_max));
            scale += c.norm();
        }
    }
    if scale == 0.0 || axes.is_empty() {
        return Some(0);
    }
    for k in 0..=MAX_TAYLOR_ORDER {
        let mut fact = 1.0;
        for j in 1..=k + 1 {
            fact *= j as f64;
        }
        let rem: f64 = terms
            .iter()
            .map(|&(a, x)| a * x.powi(k as i32 + 1) / fact * x.exp())
            .sum();
        if rem <= TAYLOR_TOL * scale {
            return Some(k);
        }
    }
    None
}

impl DisplacedEvaluator {
    /// Fields must only depend on axes that are active on `grid`.
    pub fn new(
        fields: &[&TorusField],
        grid: &SampleGrid,
        shift: &[f64],
        delta_max: f64,
    ) -> Result<Self> {
        assert!(!fields.is_empty());
        let dim = fields[0].dim();
        assert_eq!(shift.len(), dim);
        let shifted: Vec<TorusField> = fields
            .iter()
            .map(|f| f.apply_translation_multiplier(shift))
            .collect::<std::result::Result<_, _>>()?;
        let mut active = vec![false; dim];
        for f in &shifted {
            for (a, b) in active.iter_mut().zip(f.active_axes()) {
                *a |= b;
            }
        }
        for (j, &a) in active.iter().enumerate() {
            assert!(
                !a || grid.shape()[j] > 1,
                "field depends on axis {j}, which the grid does not sample"
            );
        }
        let axes: Vec<usize> = (0..dim).filter(|&j| active[j]).collect();
        let refs: Vec<&TorusField> = shifted.iter().collect();
        let exact = Evaluator::new(&refs);
        let comps = fields.len();
        let total = grid.total();
        let kind = match choose_order(&refs, &axes, delta_max) {
            Some(order) => {
                let alphas = multi_indices(axes.len(), order);
                if alphas.len() * comps * total > MAX_TAYLOR_VALUES {
                    Kind::Direct
                } else {
                    let na = alphas.len();
                    let mut values = vec![0.0; total * na * comps];
                    for (a, alpha) in alphas.iter().enumerate() {
                        for (c, f) in shifted.iter().enumerate() {
                            if f.is_empty() {
                                continue;
                            }
                            let d = f.map_multiplier(|m| {
                                let mut w = Complex64::new(1.0, 0.0);
                                for (t, &j) in axes.iter().enumerate() {
                                    let k = Complex64::new(0.0, 2.0 * PI * m[j] as f64);
                                    w *= k.powu(alpha[t] as u32);
                                }
                                w
                            });
                            let s = sample_real(&d, grid.shape())?;
                            for (i, v) in s.into_iter().enumerate() {
                                values[(i * na + a) * comps + c] = v;
                            }
                        }
                    }
                    Kind::Taylor {
                        axes,
                        alphas,
                        order,
                        values,
                    }
                }
            }
            None => Kind::Direct,
        };
        Ok(Self {
            dim,
            comps,
            grid: grid.clone(),
            delta_max,
            exact,
            kind,
        })
    }

    pub fn components(&self) -> usize {
        self.comps
    }

    /// Expansion order, `None` when values come from the exact sum.
    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            Kind::Taylor { order, .. } => Some(*order),
            Kind::Direct => None,
        }
    }

    /// Values at `grid point idx + shift + delta`.
    pub fn eval(&self, idx: usize, delta: &[f64], out: &mut [f64]) {
        let dmax = delta.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        match &self.kind {
            Kind::Taylor {
                axes,
                alphas,
                order,
                values,
            } if dmax <= self.delta_max => {
                let na = alphas.len();
                let mut pw: Vec<Vec<f64>> = Vec::with_capacity(axes.len());
                for &j in axes {
                    let mut row = Vec::with_capacity(order + 1);
                    let mut v = 1.0;
                    row.push(v);
                    for e in 1..=*order {
                        v *= delta[j] / e as f64;
                        row.push(v);
                    }
                    pw.push(row);
                }
                for o in out.iter_mut().take(self.comps) {
                    *o = 0.0;
                }
                let base = idx * na * self.comps;
                for (a, alpha) in alphas.iter().enumerate() {
                    let mut w = 1.0;
                    for (t, &e) in alpha.iter().enumerate() {
                        w *= pw[t][e];
                    }
                    let row = &values[base + a * self.comps..base + (a + 1) * self.comps];
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += w * v;
                    }
                }
            }
            _ => {
                let mut p = vec![0.0; self.dim];
                self.grid.point(idx, &mut p);
                for j in 0..self.dim {
                    p[j] += delta[j];
                }
                self.exact.eval_real(&p, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(1, 5).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(0, 4).len(), 1);
    }
}
