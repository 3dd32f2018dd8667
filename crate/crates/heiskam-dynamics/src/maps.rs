//! Maps `p ↦ p·exp(Y + F(u))`: composition, conjugation, commutator defect.

use heiskam_diophantine::{FrequencyPair, Kappa};
use heiskam_torus::HeisVector;
use rayon::prelude::*;

use crate::coboundary::d2;
use crate::displaced::DisplacedEvaluator;
use crate::field::{bracket, TorusClassVectorField};
use crate::grid::SampleGrid;
use crate::{DynamicsError, Result, ALIASING_TOL, MAX_INVERSION_ITERS, SMALLNESS_BOUND};

/// Oversampling factor of refits after displaced evaluation.
pub const OVERSAMPLE: usize = 4;
/// Agreement required between pointwise conjugation and the closed formula.
pub const FORMULA_TOL: f64 = 1e-9;

/// `p ↦ p·exp(Y + F(u))`; `generator_index` is 1 or 2 for perturbations of
/// `y₁ = exp Y_τ`, `y₂ = exp Y_η`, and `None` for composites.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedMap {
    pub generator_index: Option<usize>,
    pub y: HeisVector,
    pub field: TorusClassVectorField,
}

/// `Y₁ = Y_τ` or `Y₂ = Y_η`.
pub fn model_generator(pair: &FrequencyPair, i: usize) -> HeisVector {
    match i {
        1 => HeisVector::y_tau(&pair.tau_vec),
        2 => HeisVector::y_eta(&pair.eta_vec),
        _ => panic!("generator index must be 1 or 2"),
    }
}

fn kappa(i: usize) -> Kappa {
    if i == 1 {
        Kappa::Tau
    } else {
        Kappa::Eta
    }
}

impl PerturbedMap {
    /// The perturbation `exp(Y_i + F)` of the i-th generator.
    pub fn perturbed(pair: &FrequencyPair, i: usize, field: TorusClassVectorField) -> Self {
        Self {
            generator_index: Some(i),
            y: model_generator(pair, i),
            field,
        }
    }

    /// The unperturbed generator `y_i`.
    pub fn model(pair: &FrequencyPair, i: usize, cutoff: usize) -> Self {
        Self::perturbed(pair, i, TorusClassVectorField::zero(pair.n(), cutoff))
    }
}

/// `F∘y_i`: translation of the torus variables by `(τ⃗, 0)` or `(0, η⃗)`.
pub fn compose_with_model(
    f: &TorusClassVectorField,
    i: usize,
    pair: &FrequencyPair,
) -> Result<TorusClassVectorField> {
    f.translate(&pair.embedded(kappa(i)))
}

fn heis(v: &[f64]) -> HeisVector {
    HeisVector::from_slice(v)
}

/// Transpose point-major rows into component-major columns.
fn columns(rows: Vec<Vec<f64>>, comps: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(rows.len()); comps];
    for r in rows {
        for (c, v) in r.into_iter().enumerate() {
            out[c].push(v);
        }
    }
    out
}

fn point_values(samples: &[Vec<f64>], idx: usize) -> Vec<f64> {
    samples.iter().map(|s| s[idx]).collect()
}

fn fit_checked(
    n: usize,
    grid: &SampleGrid,
    cols: &[Vec<f64>],
    keep: usize,
) -> Result<(TorusClassVectorField, f64)> {
    let fit_cut = (2 * keep + 1).min(grid.max_cutoff());
    TorusClassVectorField::fit(n, grid, cols, fit_cut, keep)
}

/// `F∘g` for `g = exp(Y + G)`: `F` at `u + off(Y + G(u))`, sampled on a grid
/// oversampled by [`OVERSAMPLE`], refitted at twice the cutoff, and truncated.
/// Fails with `AliasingExceeded` when more than [`ALIASING_TOL`] of the norm
/// sits above the cutoff.
pub fn compose_with_perturbed(
    f: &TorusClassVectorField,
    map: &PerturbedMap,
) -> Result<TorusClassVectorField> {
    let shift = map.y.off_center();
    if map.field.off_center_part().is_empty() {
        return f.translate(&shift);
    }
    let n = f.n();
    let keep = f.cutoff().max(map.field.cutoff());
    let grid = SampleGrid::for_fields(&[f, &map.field], keep, OVERSAMPLE);
    let gs = map.field.sample(&grid)?;
    let refs: Vec<_> = f.components().iter().collect();
    let ev = DisplacedEvaluator::new(&refs, &grid, &shift, map.field.off_center_l1())?;
    let comps = f.len();
    let rows: Vec<Vec<f64>> = (0..grid.total())
        .into_par_iter()
        .map(|idx| {
            let delta: Vec<f64> = (0..2 * n).map(|k| gs[k][idx]).collect();
            let mut out = vec![0.0; comps];
            ev.eval(idx, &delta, &mut out);
            out
        })
        .collect();
    let (out, ratio) = fit_checked(n, &grid, &columns(rows, comps), keep)?;
    if ratio > ALIASING_TOL {
        return Err(DynamicsError::AliasingExceeded { ratio });
    }
    Ok(out)
}

/// `a∘b` (b applied first): `exp(Y_b + B)·exp(Y_a + A∘b)` collected by BCH.
pub fn compose_maps(a: &PerturbedMap, b: &PerturbedMap) -> Result<PerturbedMap> {
    let ab = compose_with_perturbed(&a.field, b)?;
    let y = b.y.add(&a.y).add(&b.y.bracket(&a.y).scale(0.5));
    let mut field = b.field.add(&ab)?;
    let cross = ab
        .bracket_constant_left(&b.y)?
        .sub(&b.field.bracket_constant_left(&a.y)?)?
        .add(&bracket(&b.field, &ab)?)?;
    field = field.axpy(0.5, &cross)?;
    Ok(PerturbedMap {
        generator_index: None,
        y,
        field,
    })
}

/// Samples on `grid` of the field of `a∘b` (b applied first), relative to
/// `Y_b + Y_a + ½[Y_b, Y_a]`. No refit, so no aliasing check.
pub fn compose_on_grid(
    a: &PerturbedMap,
    b: &PerturbedMap,
    grid: &SampleGrid,
) -> Result<Vec<Vec<f64>>> {
    let n = a.field.n();
    let bs = b.field.sample(grid)?;
    let refs: Vec<_> = a.field.components().iter().collect();
    let ev = DisplacedEvaluator::new(&refs, grid, &b.y.off_center(), b.field.off_center_l1())?;
    let comps = 2 * n + 1;
    let y = b.y.add(&a.y).add(&b.y.bracket(&a.y).scale(0.5));
    let rows: Vec<Vec<f64>> = (0..grid.total())
        .into_par_iter()
        .map(|idx| {
            let bp = heis(&point_values(&bs, idx));
            let mut buf = vec![0.0; comps];
            ev.eval(idx, &bp.off_center(), &mut buf);
            let vb = b.y.add(&bp);
            let va = a.y.add(&heis(&buf));
            vb.add(&va)
                .add(&vb.bracket(&va).scale(0.5))
                .sub(&y)
                .to_vec()
        })
        .collect();
    Ok(columns(rows, comps))
}

/// Samples of the field of `h⁻¹∘f∘h` on a grid, with diagnostics.
#[derive(Debug, Clone)]
pub struct ConjugationSamples {
    /// Component-major samples of `G`.
    pub g: Vec<Vec<f64>>,
    /// Largest disagreement with the closed conjugation formula.
    pub formula_defect: f64,
    /// Largest number of fixed-point iterations used at a point.
    pub iterations: usize,
}

fn conj_point(
    y: &HeisVector,
    hp: &HeisVector,
    fq: &HeisVector,
    hr: &HeisVector,
) -> (HeisVector, HeisVector) {
    let yf = y.add(fq);
    let a = hp.add(fq).add(&hp.bracket(&yf).scale(0.5));
    let g = a.sub(hr).sub(&y.add(&a).bracket(hr).scale(0.5));
    (a, g)
}

/// The closed formula `G = H − H∘g + ½[H + H∘g, Y] + F∘h + ½[H, F∘h] − ½[H, H∘g] − ½[F∘h, H∘g]`
/// at one point.
pub fn conjugation_formula(
    y: &HeisVector,
    h: &HeisVector,
    fh: &HeisVector,
    hg: &HeisVector,
) -> HeisVector {
    h.sub(hg)
        .add(&h.add(hg).bracket(y).scale(0.5))
        .add(fh)
        .add(&h.bracket(fh).scale(0.5))
        .sub(&h.bracket(hg).scale(0.5))
        .sub(&fh.bracket(hg).scale(0.5))
}

/// Pointwise `h⁻¹∘f∘h` for `f = exp(Y + F)`, `h = exp(H)` on `grid`.
///
/// At each grid point `u`: `A = H(u) + F(q) + ½[H(u), Y + F(q)]` with
/// `q = u + off H(u)`, then `H_r = H(u + off(Y + A − H_r))` by fixed-point
/// iteration (the inverse of `h` at `f∘h(u)`), and
/// `G = A − H_r − ½[Y + A, H_r]`. `F = None` stands for the zero field.
pub fn conjugate_on_grid(
    y: &HeisVector,
    f: Option<&TorusClassVectorField>,
    h: &TorusClassVectorField,
    grid: &SampleGrid,
) -> Result<ConjugationSamples> {
    let n = h.n();
    let lip = h.off_center_lipschitz();
    if lip >= 1.0 {
        return Err(DynamicsError::InversionDiverged {
            iterations: 0,
            step: lip,
        });
    }
    let hs = h.sample(grid)?;
    let hl1 = h.off_center_l1();
    let fl1 = f.map_or(0.0, |f| f.off_center_l1());
    let zero_shift = vec![0.0; 2 * n];
    let f_ev = match f {
        Some(f) => {
            let refs: Vec<_> = f.components().iter().collect();
            Some(DisplacedEvaluator::new(&refs, grid, &zero_shift, hl1)?)
        }
        None => None,
    };
    let href: Vec<_> = h.components().iter().collect();
    let h_ev = DisplacedEvaluator::new(&href, grid, &y.off_center(), 2.0 * hl1 + fl1)?;
    let comps = 2 * n + 1;
    let tol = 1e-16 * hl1.max(f64::MIN_POSITIVE);
    let rows: Vec<Result<(Vec<f64>, f64, usize)>> = (0..grid.total())
        .into_par_iter()
        .map(|idx| {
            let hp = heis(&point_values(&hs, idx));
            let mut buf = vec![0.0; comps];
            let fq = match &f_ev {
                Some(ev) => {
                    ev.eval(idx, &hp.off_center(), &mut buf);
                    heis(&buf)
                }
                None => HeisVector::zero(n),
            };
            let (a, _) = conj_point(y, &hp, &fq, &HeisVector::zero(n));
            let a_off = a.off_center();
            let mut hr = HeisVector::zero(n);
            let mut iters = 0;
            let mut last = f64::INFINITY;
            loop {
                let hro = hr.off_center();
                let delta: Vec<f64> = a_off.iter().zip(&hro).map(|(x, z)| x - z).collect();
                h_ev.eval(idx, &delta, &mut buf);
                let next = heis(&buf);
                let step = next.sub(&hr).max_abs();
                hr = next;
                iters += 1;
                if step <= tol || (step >= last && step <= 1e4 * tol) {
                    break;
                }
                if iters >= MAX_INVERSION_ITERS {
                    return Err(DynamicsError::InversionDiverged {
                        iterations: iters,
                        step,
                    });
                }
                last = step;
            }
            let (_, g) = conj_point(y, &hp, &fq, &hr);
            let closed = conjugation_formula(y, &hp, &fq, &hr);
            Ok((g.to_vec(), closed.sub(&g).max_abs(), iters))
        })
        .collect();
    let mut g_rows = Vec::with_capacity(rows.len());
    let mut defect = 0.0f64;
    let mut iterations = 0;
    for r in rows {
        let (g, d, it) = r?;
        g_rows.push(g);
        defect = defect.max(d);
        iterations = iterations.max(it);
    }
    Ok(ConjugationSamples {
        g: columns(g_rows, comps),
        formula_defect: defect,
        iterations,
    })
}

/// Result of [`conjugate_map_report`].
#[derive(Debug, Clone)]
pub struct ConjugateReport {
    pub map: PerturbedMap,
    pub formula_defect: f64,
    /// Relative norm above the cutoff in the refit.
    pub aliasing: f64,
    pub iterations: usize,
}

/// `g = h⁻¹∘f∘h` with `h(p) = p·exp H(u)`, by pointwise composition on an
/// oversampled grid, plus the closed-formula agreement and refit diagnostics.
pub fn conjugate_map_report(
    map: &PerturbedMap,
    h: &TorusClassVectorField,
) -> Result<ConjugateReport> {
    let n = h.n();
    let keep = map.field.cutoff().max(h.cutoff());
    let grid = SampleGrid::for_fields(&[&map.field, h], keep, OVERSAMPLE);
    let f = if map.field.is_empty() {
        None
    } else {
        Some(&map.field)
    };
    let s = conjugate_on_grid(&map.y, f, h, &grid)?;
    let (field, ratio) = fit_checked(n, &grid, &s.g, keep)?;
    if ratio > ALIASING_TOL {
        return Err(DynamicsError::AliasingExceeded { ratio });
    }
    let scale = map.field.l1_coeff_norm() + h.l1_coeff_norm();
    if s.formula_defect > FORMULA_TOL * scale.max(1.0) {
        return Err(DynamicsError::InvalidInput(format!(
            "conjugation formula disagrees by {:e}",
            s.formula_defect
        )));
    }
    Ok(ConjugateReport {
        map: PerturbedMap {
            generator_index: map.generator_index,
            y: map.y.clone(),
            field,
        },
        formula_defect: s.formula_defect,
        aliasing: ratio,
        iterations: s.iterations,
    })
}

/// `h⁻¹∘f∘h` as a perturbation of the same generator.
pub fn conjugate_map(map: &PerturbedMap, h: &TorusClassVectorField) -> Result<PerturbedMap> {
    Ok(conjugate_map_report(map, h)?.map)
}

fn check_small(f: &TorusClassVectorField, what: &str) -> Result<()> {
    let s = f.sup_norm_sampled(2)?;
    if s > SMALLNESS_BOUND {
        return Err(DynamicsError::InvalidInput(format!(
            "{what} has sup norm {s:e} > {SMALLNESS_BOUND}"
        )));
    }
    Ok(())
}

/// `E(F, G)` for `f = exp(Y₁ + F)`, `g = exp(Y₂ + G)`:
/// `(F∘g − F∘y₂) − (G∘f − G∘y₁) + ½[Y₂, F∘g − F∘y₂] − ½[Y₁, G∘f − G∘y₁] + ½[G, F∘g] − ½[F, G∘f]`.
/// The maps commute exactly when `d₂(F, G) + E(F, G) = 0`.
pub fn commutator_defect(
    f: &TorusClassVectorField,
    g: &TorusClassVectorField,
    pair: &FrequencyPair,
) -> Result<TorusClassVectorField> {
    check_small(f, "F")?;
    check_small(g, "G")?;
    let fmap = PerturbedMap::perturbed(pair, 1, f.clone());
    let gmap = PerturbedMap::perturbed(pair, 2, g.clone());
    let y1 = &fmap.y;
    let y2 = &gmap.y;
    let f_g = compose_with_perturbed(f, &gmap)?;
    let g_f = compose_with_perturbed(g, &fmap)?;
    let a = f_g.sub(&compose_with_model(f, 2, pair)?)?;
    let b = g_f.sub(&compose_with_model(g, 1, pair)?)?;
    a.sub(&b)?
        .axpy(0.5, &a.bracket_constant_left(y2)?)?
        .axpy(-0.5, &b.bracket_constant_left(y1)?)?
        .axpy(0.5, &bracket(g, &f_g)?)?
        .axpy(-0.5, &bracket(f, &g_f)?)
}

/// `d₂(F, G) + E(F, G)`, which vanishes for commuting maps.
pub fn commutation_identity_defect(
    f: &TorusClassVectorField,
    g: &TorusClassVectorField,
    pair: &FrequencyPair,
) -> Result<TorusClassVectorField> {
    d2(f, g, pair)?.add(&commutator_defect(f, g, pair)?)
}
