//! The iterative step, the convergence loop, and the conjugacy check.

use heiskam_dynamics::{
    model_generator, split_vf, DisplacedEvaluator, SampleGrid, TorusClassVectorField as Field,
};
use heiskam_fourier::SmoothingProfile;
use heiskam_torus::HeisVector;
use rayon::prelude::*;

use crate::family::{
    compose_conjugacies, FamilyBase, FamilyFields, KamState, PerturbationFamily, NOISE_FLOOR,
};
use crate::stencil::{family_norms, solve_parameter};
use crate::trace::{KamTrace, StepRecord};
use crate::{KamConfig, KamError, Result};

/// Average defects below this are rounding noise and never trip the gate.
pub const AVERAGE_FLOOR: f64 = 1e-12;
/// Fixed-point iterations allowed when inverting `h*` in the conjugacy check.
const CHECK_INVERSION_ITERS: usize = 60;

/// Everything [`iterative_step`] produces besides the new state.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// Conjugated family data, with `lambda = λ_{n+1}`.
    pub state: KamState,
    /// `F̃_{n+1}^{λ_{n+1}}`.
    pub fields: FamilyFields,
    pub h: Field,
    pub admissibility: f64,
    pub avg_defect: f64,
    pub err_pred: f64,
    pub err_obs: f64,
    pub k_next: f64,
    pub k_pred: f64,
    pub dlambda: f64,
    pub dlambda_bound: f64,
    pub h_ratio: f64,
    pub aliasing: f64,
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Error when the central average is larger than a commuting pair allows.
fn average_gate(fields: &FamilyFields, fam: &PerturbationFamily, cfg: &KamConfig) -> Result<f64> {
    let s = cfg.base_regularity;
    let defect = fields.average_defect(&fam.pair);
    let bound =
        (cfg.c_avg * fields.f[0].sobolev_norm(s) * fields.f[1].sobolev_norm(s)).max(AVERAGE_FLOOR);
    if defect > bound {
        return Err(KamError::NontrivialClass { defect, bound });
    }
    Ok(defect)
}

/// One conjugation step from `λ_n = state.lambda`, where `fields = F̃_n^{λ_n}`
/// and `k_n` bounds their second λ-derivatives.
///
/// Smooths with `S_{t_n}`, drops the off-center averages, splits off `d₁H_n`,
/// conjugates the family by `h_n`, and re-solves for `λ_{n+1}`.
pub fn iterative_step(
    fam: &PerturbationFamily,
    state: &KamState,
    fields: &FamilyFields,
    k_n: f64,
    n: usize,
    cfg: &KamConfig,
) -> Result<StepOutput> {
    let t = cfg.t(n);
    let s0 = cfg.base_regularity;
    let eps = fields.norm(s0);
    let delta = fields.norm(cfg.delta_regularity());
    let avg_defect = average_gate(fields, fam, cfg)?;
    let admissibility = cfg.admissibility(t, eps, delta);
    if !(admissibility < cfg.c_bar) {
        return Err(KamError::StepInadmissible {
            step: n,
            value: admissibility,
            bound: cfg.c_bar,
        });
    }
    let prof = SmoothingProfile::raised_cosine(t);
    let f1 = fields.f[0]
        .smoothing_apply(&prof)
        .without_off_center_average();
    let f2 = fields.f[1]
        .smoothing_apply(&prof)
        .without_off_center_average();
    let split = split_vf(&f1, &f2, &fam.pair)?;
    let h = split.h.truncated(cfg.cutoff).map_components(|_, c| {
        let mut c = c.clone();
        c.prune(NOISE_FLOOR);
        c
    });
    let sr = s0 + cfg.r as f64;
    let t2 = t.powi(2 * cfg.r0 as i32);
    let h_ratio = h.sobolev_norm(sr) / (t2 * fields.norm(sr));
    let (k, a1) = compose_conjugacies(&state.k, &h, cfg.cutoff, cfg.grid_factor)?;
    let (h_total, a2) = compose_conjugacies(&state.h_total, &h, cfg.cutoff, cfg.grid_factor)?;
    let next = KamState {
        k,
        h_total,
        lambda: state.lambda.clone(),
    };
    let (lambda, new_fields, st, _) = solve_parameter(fam, &next, cfg)?;
    let err_obs = st.at_center.norm(s0);
    let k_next = family_norms(&st, s0, 2)?;
    let err_pred = cfg.err_predicted(t, eps, delta);
    let dlambda = sup_dist(&lambda, &state.lambda);
    Ok(StepOutput {
        state: KamState { lambda, ..next },
        aliasing: a1.max(a2).max(new_fields.aliasing),
        fields: new_fields,
        h,
        admissibility,
        avg_defect,
        err_pred,
        err_obs,
        k_next,
        k_pred: cfg.k_predicted(t, eps, delta, k_n),
        dlambda,
        dlambda_bound: cfg.dlambda_bound(t, eps, k_n, err_pred),
        h_ratio,
    })
}

/// Result of a converged [`run`].
#[derive(Debug, Clone)]
pub struct KamOutcome {
    /// `H` of the accumulated conjugacy `h = h₀∘h₁∘…`.
    pub h_total: Field,
    /// Field of `k = h*∘h` for conjugated bases (equal to `h_total` otherwise).
    pub composite: Field,
    pub lambda_bar: Vec<f64>,
    pub trace: KamTrace,
    pub residual: f64,
    pub iterations: usize,
}

/// A failed [`run`], with the trace up to the failure.
#[derive(Debug, Clone)]
pub struct KamFailure {
    pub error: KamError,
    pub trace: KamTrace,
}

impl std::fmt::Display for KamFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} recorded steps",
            self.error,
            self.trace.len()
        )
    }
}

impl std::error::Error for KamFailure {}

/// Iterate until `ε_n ≤ eps_target` or `max_iters` steps have been taken.
pub fn run(
    fam: &PerturbationFamily,
    cfg: &KamConfig,
) -> std::result::Result<KamOutcome, KamFailure> {
    let mut trace = KamTrace::default();
    match run_inner(fam, cfg, &mut trace) {
        Ok(mut out) => {
            out.trace = trace;
            Ok(out)
        }
        Err(error) => Err(KamFailure { error, trace }),
    }
}

fn run_inner(
    fam: &PerturbationFamily,
    cfg: &KamConfig,
    trace: &mut KamTrace,
) -> Result<KamOutcome> {
    cfg.validate()?;
    let s0 = cfg.base_regularity;
    let sd = cfg.delta_regularity();
    let start = fam.initial_state();
    let (lambda, mut fields, st, _) = solve_parameter(fam, &start, cfg)?;
    let mut k_n = family_norms(&st, s0, 2)?;
    let mut state = KamState { lambda, ..start };
    let mut prev: Option<(StepOutput, f64)> = None;
    let nan = f64::NAN;
    for n in 0..=cfg.max_iters {
        let eps = fields.norm(s0);
        let delta = fields.norm(sd);
        let t = cfg.t(n);
        let residual = verify_conjugacy(&state.h_total, fam, &state.lambda, cfg.check_points)?;
        let (err_pred, err_obs, h_ratio, delta_ratio, dlambda, dlambda_bound, k_pred, aliasing) =
            match &prev {
                Some((p, d_prev)) => (
                    p.err_pred,
                    p.err_obs,
                    p.h_ratio,
                    delta / (cfg.t(n - 1).powi(2 * cfg.r0 as i32) * d_prev),
                    p.dlambda,
                    p.dlambda_bound,
                    p.k_pred,
                    p.aliasing,
                ),
                None => (nan, nan, nan, nan, nan, nan, nan, fields.aliasing),
            };
        trace.push(StepRecord {
            n,
            eps,
            delta_r: delta,
            k_bound: k_n,
            lambda: state.lambda.clone(),
            err_pred,
            err_obs,
            residual,
            t,
            admissibility: cfg.admissibility(t, eps, delta),
            avg_defect: fields.average_defect(&fam.pair),
            h_ratio,
            delta_ratio,
            dlambda,
            dlambda_bound,
            k_pred,
            aliasing,
        });
        if eps <= cfg.eps_target {
            return Ok(KamOutcome {
                h_total: state.h_total.clone(),
                composite: state.k.clone(),
                lambda_bar: state.lambda.clone(),
                trace: KamTrace::default(),
                residual,
                iterations: n,
            });
        }
        if n == cfg.max_iters {
            break;
        }
        let out = iterative_step(fam, &state, &fields, k_n, n, cfg)?;
        state = out.state.clone();
        fields = out.fields.clone();
        k_n = out.k_next;
        prev = Some((out, delta));
    }
    let eps = trace.records.last().map_or(nan, |r| r.eps);
    Err(KamError::NoConvergence {
        iterations: cfg.max_iters,
        eps,
    })
}

fn bch(a: &HeisVector, b: &HeisVector) -> HeisVector {
    a.add(b).add(&a.bracket(b).scale(0.5))
}

fn values(samples: &[Vec<f64>], idx: usize) -> HeisVector {
    HeisVector::from_slice(&samples.iter().map(|s| s[idx]).collect::<Vec<_>>())
}

/// `max_i sup_x |log((h∘y_i)(x)⁻¹ · (ỹ_i^λ∘h)(x))|` over a grid with `points`
/// nodes per active axis, evaluated pointwise from the Fourier data.
pub fn verify_conjugacy(
    h: &Field,
    fam: &PerturbationFamily,
    lambda: &[f64],
    points: usize,
) -> Result<f64> {
    let n = fam.n();
    let (c1, c2) = fam.constants(lambda)?;
    let mut act = h.active_axes();
    let base: Vec<&Field> = match &fam.base {
        FamilyBase::Conjugated { h_star } => vec![h_star],
        FamilyBase::Additive { p } => p.iter().collect(),
    };
    for f in &base {
        for (a, b) in act.iter_mut().zip(f.active_axes()) {
            *a |= b;
        }
    }
    let grid = SampleGrid::dense(n, &act, points);
    let comps = 2 * n + 1;
    let refs = |f: &Field| -> Vec<heiskam_fourier::TorusField> { f.components().to_vec() };
    let hs = h.sample(&grid)?;
    let hl1 = h.off_center_l1();
    let zero = vec![0.0; 2 * n];
    let mut worst = 0.0f64;
    for (i, c) in [(1usize, c1), (2, c2)] {
        let y = model_generator(&fam.pair, i);
        let yl = y.add(&c);
        let hc = refs(h);
        let hr: Vec<_> = hc.iter().collect();
        let h_after = DisplacedEvaluator::new(&hr, &grid, &y.off_center(), 0.0)?;
        enum Base {
            Conj {
                fwd: DisplacedEvaluator,
                inv: DisplacedEvaluator,
                l1: f64,
            },
            Add {
                p: DisplacedEvaluator,
            },
        }
        let b = match &fam.base {
            FamilyBase::Conjugated { h_star } => {
                if h_star.off_center_lipschitz() >= 1.0 {
                    return Err(KamError::InvalidConfig(
                        "h* is not invertible by fixed point".into(),
                    ));
                }
                let sc = refs(h_star);
                let sr: Vec<_> = sc.iter().collect();
                let l1 = h_star.off_center_l1();
                Base::Conj {
                    fwd: DisplacedEvaluator::new(&sr, &grid, &zero, hl1)?,
                    inv: DisplacedEvaluator::new(&sr, &grid, &yl.off_center(), hl1 + 2.0 * l1)?,
                    l1,
                }
            }
            FamilyBase::Additive { p } => {
                let pc = refs(&p[i - 1]);
                let pr: Vec<_> = pc.iter().collect();
                Base::Add {
                    p: DisplacedEvaluator::new(&pr, &grid, &zero, hl1)?,
                }
            }
        };
        let dist: Vec<f64> = (0..grid.total())
            .into_par_iter()
            .map(|idx| {
                let mut buf = vec![0.0; comps];
                h_after.eval(idx, &zero, &mut buf);
                let ha = HeisVector::from_slice(&buf);
                let w1 = bch(&y, &ha);
                let hu = values(&hs, idx);
                let d0 = hu.off_center();
                let w2 = match &b {
                    Base::Conj { fwd, inv, l1 } => {
                        fwd.eval(idx, &d0, &mut buf);
                        let hs1 = HeisVector::from_slice(&buf);
                        let mut w = bch(&hu, &hs1);
                        w = bch(&w, &yl);
                        let pre: Vec<f64> = d0
                            .iter()
                            .zip(hs1.off_center())
                            .map(|(a, b)| a + b)
                            .collect();
                        let mut hv = HeisVector::zero(n);
                        let tol = 1e-17 * l1.max(f64::MIN_POSITIVE);
                        for _ in 0..CHECK_INVERSION_ITERS {
                            let dv: Vec<f64> = pre
                                .iter()
                                .zip(hv.off_center())
                                .map(|(a, b)| a - b)
                                .collect();
                            inv.eval(idx, &dv, &mut buf);
                            let next = HeisVector::from_slice(&buf);
                            let step = next.sub(&hv).max_abs();
                            hv = next;
                            if step <= tol {
                                break;
                            }
                        }
                        bch(&w, &hv.scale(-1.0))
                    }
                    Base::Add { p } => {
                        p.eval(idx, &d0, &mut buf);
                        bch(&hu, &yl.add(&HeisVector::from_slice(&buf)))
                    }
                };
                w2.sub(&w1).sub(&w1.bracket(&w2).scale(0.5)).max_abs()
            })
            .collect();
        worst = dist.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}
