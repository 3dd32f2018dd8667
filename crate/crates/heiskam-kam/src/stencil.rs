//! Central-difference stencils in λ, derivative norms, and the parameter solve.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::family::{FamilyFields, KamState, PerturbationFamily};
use crate::{KamConfig, KamError, Result};

/// Fields at `λ_c` and `λ_c ± h e_j`, `j < d`: `2d + 1` nodes.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub center: Vec<f64>,
    pub h: f64,
    pub at_center: FamilyFields,
    pub plus: Vec<FamilyFields>,
    pub minus: Vec<FamilyFields>,
}

impl Stencil {
    /// Evaluate all nodes; the ones off the center in parallel.
    pub fn build<E>(center: &[f64], h: f64, eval: E) -> Result<Self>
    where
        E: Fn(&[f64]) -> Result<FamilyFields> + Sync,
    {
        let d = center.len();
        let nodes: Vec<Vec<f64>> = (0..2 * d)
            .map(|k| {
                let mut p = center.to_vec();
                p[k / 2] += if k % 2 == 0 { h } else { -h };
                p
            })
            .collect();
        let mut vals: Vec<FamilyFields> =
            nodes.par_iter().map(|p| eval(p)).collect::<Result<_>>()?;
        let at_center = eval(center)?;
        let mut plus = Vec::with_capacity(d);
        let mut minus = Vec::with_capacity(d);
        for (k, v) in vals.drain(..).enumerate() {
            if k % 2 == 0 {
                plus.push(v);
            } else {
                minus.push(v);
            }
        }
        Ok(Self {
            center: center.to_vec(),
            h,
            at_center,
            plus,
            minus,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Central-difference Jacobian of `Φ`.
    pub fn jacobian(&self) -> DMatrix<f64> {
        let d = self.dim();
        let m = self.at_center.phi().len();
        let mut j = DMatrix::zeros(m, d);
        for c in 0..d {
            let a = self.plus[c].phi();
            let b = self.minus[c].phi();
            for r in 0..m {
                j[(r, c)] = (a[r] - b[r]) / (2.0 * self.h);
            }
        }
        j
    }
}

/// `‖·‖_{s,k}` over the stencil: the largest field norm at any node (`k = 0`),
/// the largest central first difference (`k = 1`), or the largest diagonal
/// second difference (`k = 2`), each measured in `H^s`.
pub fn family_norms(st: &Stencil, s: f64, k: usize) -> Result<f64> {
    let d = st.dim();
    if k > 2 || (k > 0 && (st.plus.len() != d || st.minus.len() != d || d == 0)) {
        return Err(KamError::StencilTooCoarse { order: k });
    }
    let h = st.h;
    let mut best = 0.0f64;
    match k {
        0 => {
            for f in std::iter::once(&st.at_center)
                .chain(&st.plus)
                .chain(&st.minus)
            {
                best = best.max(f.norm(s));
            }
        }
        _ => {
            for j in 0..d {
                for i in 0..2 {
                    let p = &st.plus[j].f[i];
                    let m = &st.minus[j].f[i];
                    let v = if k == 1 {
                        p.sub(m)?.scale(0.5 / h)
                    } else {
                        p.add(m)?
                            .axpy(-2.0, &st.at_center.f[i])?
                            .scale(1.0 / (h * h))
                    };
                    best = best.max(v.sobolev_norm(s));
                }
            }
        }
    }
    Ok(best)
}

/// Damped chord Newton for `Φ(λ) = 0` with a frozen Jacobian. `phi` returns
/// `Φ` plus a payload kept for the accepted iterate.
///
/// Returns the zero, its payload, and the number of Newton steps.
pub fn solve_parameter_with<T, P>(
    mut phi: P,
    start: &[f64],
    jac: &DMatrix<f64>,
    tol: f64,
    radius: f64,
) -> Result<(Vec<f64>, T, usize)>
where
    P: FnMut(&[f64]) -> Result<(Vec<f64>, T)>,
{
    const MAX_STEPS: usize = 40;
    const MAX_HALVINGS: usize = 10;
    let lu = jac.clone().lu();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut lam = start.to_vec();
    let (mut val, mut payload) = phi(&lam)?;
    let mut res = sup(&val);
    for it in 0..=MAX_STEPS {
        if res <= tol {
            return Ok((lam, payload, it));
        }
        if it == MAX_STEPS {
            break;
        }
        let dir = lu
            .solve(&DVector::from_column_slice(&val))
            .ok_or(KamError::NewtonDiverged {
                iterations: it,
                residual: res,
            })?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = lam
                .iter()
                .zip(dir.iter())
                .map(|(l, d)| l - alpha * d)
                .collect();
            let norm = sup(&trial);
            if norm > radius {
                return Err(KamError::OutOfBall { norm, radius });
            }
            let (v, p) = phi(&trial)?;
            let r = sup(&v);
            if r < res {
                lam = trial;
                val = v;
                payload = p;
                res = r;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(KamError::NewtonDiverged {
                iterations: it,
                residual: res,
            });
        }
    }
    Err(KamError::NewtonDiverged {
        iterations: MAX_STEPS,
        residual: res,
    })
}

/// Zero of `Φ: λ ↦ Ave F̃^λ` near `state.lambda`, with the stencil used for the
/// Jacobian. Returns the zero, the fields there, the stencil, and the Newton
/// step count.
pub fn solve_parameter(
    fam: &PerturbationFamily,
    state: &KamState,
    cfg: &KamConfig,
) -> Result<(Vec<f64>, FamilyFields, Stencil, usize)> {
    let st = Stencil::build(&state.lambda, cfg.stencil_spacing(), |l| {
        fam.fields_at(state, l, cfg)
    })?;
    let jac = st.jacobian();
    let (lam, fields, it) = solve_parameter_with(
        |l| {
            let f = fam.fields_at(state, l, cfg)?;
            Ok((f.phi(), f))
        },
        &state.lambda,
        &jac,
        cfg.newton_tol,
        cfg.lambda_ball_radius,
    )?;
    let norm = lam.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if norm > cfg.lambda_ball_radius {
        return Err(KamError::OutOfBall {
            norm,
            radius: cfg.lambda_ball_radius,
        });
    }
    Ok((lam, fields, st, it))
}
