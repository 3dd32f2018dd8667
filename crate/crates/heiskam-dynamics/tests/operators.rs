mod common;

use common::*;
use heiskam_diophantine::{default_pair, FrequencyPair, Kappa};
use heiskam_dynamics::displaced::DisplacedEvaluator;
use heiskam_dynamics::{
    bracket, commutation_identity_defect, commutator_defect, compose_maps, compose_with_model,
    compose_with_perturbed, conjugate_map, conjugate_map_report, d1, d2, model_generator, split_vf,
    DynamicsError, PerturbedMap, SampleGrid, TorusClassVectorField,
};
use heiskam_fourier::TorusField;
use heiskam_torus::{constant_cocycle_space, HeisVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair() -> FrequencyPair {
    default_pair(50)
}

fn rand_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..4).map(|_| rng.gen::<f64>()).collect()
}

fn add_off(u: &[f64], v: &HeisVector) -> Vec<f64> {
    u.iter().zip(v.off_center()).map(|(a, b)| a + b).collect()
}

#[test]
fn compose_with_model_is_a_phase_shift() {
    let p = pair();
    let c =
        TorusClassVectorField::constant(&HeisVector::new(vec![0.3, -1.0], vec![0.0, 2.0], 0.5), 6);
    for i in [1, 2] {
        assert_eq!(compose_with_model(&c, i, &p).unwrap(), c);
    }
    let m = [1, -2, 3, 1];
    let mut comps = vec![TorusField::zero(2, 6, true); 5];
    comps[0] = TorusField::single_mode(2, 6, &m, Complex64::new(0.5, 0.25))
        .unwrap()
        .into_real();
    let v = TorusClassVectorField::from_components(comps).unwrap();
    let moved = compose_with_model(&v, 1, &p).unwrap();
    let th = 2.0 * std::f64::consts::PI * (m[0] as f64 * p.tau_vec[0] + m[1] as f64 * p.tau_vec[1]);
    let want = v.component(0).get(&m) * Complex64::new(th.cos(), th.sin());
    assert!((moved.component(0).get(&m) - want).norm() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = rand_vf(&mut rng, 5, 5, &ALL, 1.0, 0.3, true);
    for (i, k) in [(1usize, Kappa::Tau), (2, Kappa::Eta)] {
        let back: Vec<f64> = p.embedded(k).iter().map(|x| -x).collect();
        let rt = compose_with_model(&r, i, &p)
            .unwrap()
            .translate(&back)
            .unwrap();
        assert!(max_coeff_diff(&rt, &r) < 1e-15);
    }
}

#[test]
fn bracket_table_and_pointwise_oracle() {
    let x1 =
        TorusClassVectorField::constant(&HeisVector::new(vec![1.0, 0.0], vec![0.0, 0.0], 0.0), 4);
    let l1 =
        TorusClassVectorField::constant(&HeisVector::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.0), 4);
    let z = TorusClassVectorField::constant(&HeisVector::central(2, 1.0), 4);
    let b = bracket(&x1, &l1).unwrap();
    assert_eq!(b.nonzero_components(), 1);
    assert!((b.center().mean().re - 1.0).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = rand_vf(&mut rng, 3, 3, &ALL, 1.0, 0.2, true);
    assert_eq!(bracket(&z, &r).unwrap().nonzero_components(), 0);
    // Spectra small enough that the product fits under the cutoff.
    let u = rand_vf(&mut rng, 8, 3, &PLANE, 1.0, 0.2, true);
    let v = rand_vf(&mut rng, 8, 4, &[1, 2], 1.0, 0.2, true);
    let w = rand_vf(&mut rng, 8, 2, &PLANE, 1.0, 0.2, true);
    let uv = bracket(&u, &v).unwrap();
    assert_eq!(uv.nonzero_components(), 1);
    let lhs = bracket(&u.axpy(2.5, &w).unwrap(), &v).unwrap();
    let rhs = uv.axpy(2.5, &bracket(&w, &v).unwrap()).unwrap();
    assert!(max_coeff_diff(&lhs, &rhs) < 1e-12);
    for _ in 0..50 {
        let pt = rand_point(&mut rng);
        let want = eval_vf(&u, &pt).omega(&eval_vf(&v, &pt));
        let got = uv.center().evaluate(&pt).re;
        assert!(
            (got - want).abs() < 1e-12 * (1.0 + want.abs()),
            "{got} vs {want}"
        );
    }
}

#[test]
fn d1_examples_and_oracle() {
    let p = pair();
    let zc = TorusClassVectorField::constant(&HeisVector::central(2, 3.0), 4);
    let (a, b) = d1(&zc, &p).unwrap();
    assert!(a.is_empty() || a.max_coeff() == 0.0);
    assert!(b.max_coeff() == 0.0);
    // Constant Λ₁: the centers are (τ₁, 0).
    let l1 =
        TorusClassVectorField::constant(&HeisVector::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.0), 4);
    let (a, b) = d1(&l1, &p).unwrap();
    assert_eq!(a.nonzero_components(), 1);
    assert!((a.center().mean().re - p.tau_vec[0]).abs() < 1e-15);
    assert_eq!(b.max_coeff(), 0.0);
    // Random H against direct evaluation.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = rand_vf(&mut rng, 4, 4, &ALL, 1.0, 0.3, true);
    let (d1a, d1b) = d1(&h, &p).unwrap();
    for _ in 0..30 {
        let u = rand_point(&mut rng);
        for (i, out) in [(1usize, &d1a), (2, &d1b)] {
            let y = model_generator(&p, i);
            let hy = eval_vf(&h, &add_off(&u, &y));
            let hu = eval_vf(&h, &u);
            let want = hy.sub(&hu).add(&y.bracket(&hy.add(&hu)).scale(0.5));
            let got = eval_vf(out, &u);
            assert!(got.sub(&want).max_abs() < 1e-12, "{i}");
        }
    }
}

#[test]
fn d2_kills_d1_and_constant_cocycles() {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..50 {
        let band = 1 + k % 4;
        let h = rand_vf(&mut rng, band, band, &ALL, 1.0, 0.1, true);
        let (f, g) = d1(&h, &p).unwrap();
        let z = d2(&f, &g, &p).unwrap();
        assert!(z.max_coeff() < 1e-12, "{:e}", z.max_coeff());
    }
    let zero = TorusClassVectorField::zero(2, 3);
    assert_eq!(d2(&zero, &zero, &p).unwrap().max_coeff(), 0.0);
    for (a, b) in constant_cocycle_space(&p) {
        let f = TorusClassVectorField::constant(&a, 3);
        let g = TorusClassVectorField::constant(&b, 3);
        assert!(d2(&f, &g, &p).unwrap().max_coeff() < 1e-14);
    }
}

#[test]
fn compose_with_perturbed_matches_direct_evaluation() {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = rand_vf(&mut rng, 12, 5, &PLANE, 1.0, 0.8, true);
    // Zero map field reduces to the model.
    let m0 = PerturbedMap::model(&p, 2, 12);
    let a = compose_with_perturbed(&f, &m0).unwrap();
    assert!(max_coeff_diff(&a, &compose_with_model(&f, 2, &p).unwrap()) < 1e-15);
    // Constant F stays constant.
    let g = rand_vf(&mut rng, 12, 3, &PLANE, 1e-4, 0.5, false);
    let gm = PerturbedMap::perturbed(&p, 2, g.clone());
    let c =
        TorusClassVectorField::constant(&HeisVector::new(vec![1.0, 2.0], vec![3.0, 4.0], 5.0), 12);
    let cc = compose_with_perturbed(&c, &gm).unwrap();
    assert!(max_coeff_diff(&cc, &c) < 1e-14);
    let fg = compose_with_perturbed(&f, &gm).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let u = rand_point(&mut rng);
        let q = add_off(&u, &gm.y.add(&eval_vf(&g, &u)));
        worst = worst.max(eval_vf(&fg, &u).sub(&eval_vf(&f, &q)).max_abs());
    }
    assert!(worst < 1e-9, "{worst:e}");
    // A large displacement of a rough field is refused.
    let rough = rand_vf(&mut rng, 6, 6, &PLANE, 1.0, 0.0, true);
    let big = PerturbedMap::perturbed(&p, 1, rand_vf(&mut rng, 6, 2, &PLANE, 0.05, 0.0, false));
    assert!(matches!(
        compose_with_perturbed(&rough, &big),
        Err(DynamicsError::AliasingExceeded { .. })
    ));
}

#[test]
fn displaced_evaluator_matches_exact_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = rand_scalar(&mut rng, 12, 12, &PLANE, 1.0, 0.4, true);
    let grid = SampleGrid::for_axes(2, &[true, false, true, false], 12, 2);
    let shift = [0.3, 0.1, -0.7, 0.2];
    let ev = DisplacedEvaluator::new(&[&f], &grid, &shift, 1e-3).unwrap();
    assert!(ev.order().is_some());
    let mut out = [0.0];
    let mut pt = vec![0.0; 4];
    for _ in 0..500 {
        let idx = rng.gen_range(0..grid.total());
        let d: Vec<f64> = (0..4).map(|_| rng.gen_range(-1e-3..1e-3)).collect();
        ev.eval(idx, &d, &mut out);
        grid.point(idx, &mut pt);
        let q: Vec<f64> = (0..4).map(|j| pt[j] + shift[j] + d[j]).collect();
        assert!((out[0] - f.evaluate(&q).re).abs() < 1e-13);
        // Beyond δ_max the exact sum takes over.
        let far: Vec<f64> = d.iter().map(|x| x * 100.0).collect();
        ev.eval(idx, &far, &mut out);
        let q: Vec<f64> = (0..4).map(|j| pt[j] + shift[j] + far[j]).collect();
        assert!((out[0] - f.evaluate(&q).re).abs() < 1e-13);
    }
}

/// `h⁻¹∘f∘h` at one point by direct evaluation and plain fixed-point inversion.
fn conj_oracle(
    y: &HeisVector,
    f: &TorusClassVectorField,
    h: &TorusClassVectorField,
    u: &[f64],
) -> HeisVector {
    let hp = eval_vf(h, u);
    let u1 = add_off(u, &hp);
    let w1 = hp.clone();
    let step = y.add(&eval_vf(f, &u1));
    let u2 = add_off(&u1, &step);
    let w2 = w1.add(&step).add(&w1.bracket(&step).scale(0.5));
    let mut v = u2.clone();
    for _ in 0..200 {
        let hv = eval_vf(h, &v);
        v = u2.iter().zip(hv.off_center()).map(|(a, b)| a - b).collect();
    }
    let back = eval_vf(h, &v).scale(-1.0);
    let w3 = w2.add(&back).add(&w2.bracket(&back).scale(0.5));
    w3.sub(y)
}

#[test]
fn conjugation_examples() {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = rand_vf(&mut rng, 16, 3, &PLANE, 1e-4, 0.5, true);
    let map = PerturbedMap::perturbed(&p, 1, f.clone());
    // H = 0.
    let g = conjugate_map(&map, &TorusClassVectorField::zero(2, 16)).unwrap();
    assert!(max_coeff_diff(&g.field, &f) < 1e-15);
    // F = 0, H constant: G = [H, Y] = −[Y, H].
    let hc = HeisVector::new(vec![0.01, -0.02], vec![0.03, 0.005], 0.7);
    let model = PerturbedMap::model(&p, 2, 4);
    let g = conjugate_map(&model, &TorusClassVectorField::constant(&hc, 4)).unwrap();
    let want = hc.bracket(&model.y);
    assert!(g.field.average().sub(&want).max_abs() < 1e-15);
    assert_eq!(g.field.nonzero_components(), 1);
    // Against the direct oracle.
    let h = rand_vf(&mut rng, 16, 2, &PLANE, 2e-4, 0.5, true);
    let rep = conjugate_map_report(&map, &h).unwrap();
    assert!(rep.formula_defect < 1e-15, "{:e}", rep.formula_defect);
    assert!(rep.iterations <= 30);
    for _ in 0..200 {
        let u = rand_point(&mut rng);
        let want = conj_oracle(&map.y, &f, &h, &u);
        assert!(eval_vf(&rep.map.field, &u).sub(&want).max_abs() < 1e-13);
    }
    // Round trip with tiny H.
    let small = h.scale(5e-3);
    let there = conjugate_map(&map, &small).unwrap();
    let back = conjugate_map(&there, &small.scale(-1.0)).unwrap();
    assert!(max_coeff_diff(&back.field, &f) < 1e-8);
    // A non-invertible h is refused.
    let wild = rand_vf(&mut rng, 16, 3, &PLANE, 0.5, 0.0, true);
    assert!(matches!(
        conjugate_map(&map, &wild),
        Err(DynamicsError::InversionDiverged { .. })
    ));
}

fn commuting_pair(
    p: &FrequencyPair,
    h: &TorusClassVectorField,
) -> (TorusClassVectorField, TorusClassVectorField) {
    let f = conjugate_map(&PerturbedMap::model(p, 1, h.cutoff()), h)
        .unwrap()
        .field;
    let g = conjugate_map(&PerturbedMap::model(p, 2, h.cutoff()), h)
        .unwrap()
        .field;
    (f, g)
}

#[test]
fn commutator_defect_vanishes_to_second_order() {
    let p = pair();
    let zero = TorusClassVectorField::zero(2, 6);
    assert_eq!(
        commutator_defect(&zero, &zero, &p).unwrap().max_coeff(),
        0.0
    );
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h0 = rand_vf(&mut rng, 16, 2, &PLANE, 1.0, 0.5, true);
    let mut norms = Vec::new();
    let mut consts = Vec::new();
    let mut amp = 4e-4;
    for _ in 0..4 {
        let h = h0.scale(amp);
        let (f, g) = commuting_pair(&p, &h);
        let e = commutator_defect(&f, &g, &p).unwrap();
        norms.push(e.sup_norm_sampled(4).unwrap());
        // The identity d₂ + E = 0 for commuting maps.
        let id = commutation_identity_defect(&f, &g, &p).unwrap();
        assert!(
            id.max_coeff() < 1e-12 * (1.0 + f.max_coeff()),
            "{:e}",
            id.max_coeff()
        );
        // Averages: |Ave[Y₂,F] − Ave[Y₁,G]| ≤ C‖F‖₁‖G‖₁.
        let y1 = model_generator(&p, 1);
        let y2 = model_generator(&p, 2);
        let lhs = (y2.omega(&f.average()) - y1.omega(&g.average())).abs();
        consts.push(lhs / (f.sobolev_norm(1.0) * g.sobolev_norm(1.0)));
        amp *= 0.5;
    }
    for w in norms.windows(2) {
        let r = w[0] / w[1];
        assert!(r > 4.0 / 1.2 && r < 4.0 * 1.2, "ratio {r}");
    }
    let (lo, hi) = consts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi < 1.5 * lo && hi < 10.0, "{consts:?}");
}

#[test]
fn split_vf_examples() {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Manufactured coboundary.
    let h0 = rand_vf(&mut rng, 6, 6, &ALL, 1.0, 0.5, false);
    let (f, g) = d1(&h0, &p).unwrap();
    let s = split_vf(&f, &g, &p).unwrap();
    assert!(s.f_res.max_coeff() < 1e-12 && s.g_res.max_coeff() < 1e-12);
    let diff = s.h.sub(&h0).unwrap();
    for k in 0..5 {
        assert!(
            diff.component(k).without_mean().max_abs() < 1e-10,
            "component {k}"
        );
    }
    // Constant cohomology representative: nothing beyond constants is removed.
    for (a, b) in heiskam_torus::cohomology_basis(&p) {
        let (fa, gb) = (
            TorusClassVectorField::constant(&a, 4),
            TorusClassVectorField::constant(&b, 4),
        );
        let fa = fa.without_off_center_average();
        let gb = gb.without_off_center_average();
        let s = split_vf(&fa, &gb, &p).unwrap();
        assert!(s.h.active_axes().iter().all(|x| !x));
        let rec = s.f_res.add(&d1(&s.h, &p).unwrap().0).unwrap();
        assert!(max_coeff_diff(&rec, &fa) < 1e-14);
    }
    // Commuting perturbation: reconstruction identity.
    let h = rand_vf(&mut rng, 16, 2, &PLANE, 2e-4, 0.5, true);
    let (f, g) = commuting_pair(&p, &h);
    let f = f.without_off_center_average();
    let g = g.without_off_center_average();
    let s = split_vf(&f, &g, &p).unwrap();
    let (a, b) = d1(&s.h, &p).unwrap();
    assert!(max_coeff_diff(&a.add(&s.f_res).unwrap(), &f) < 1e-9);
    assert!(max_coeff_diff(&b.add(&s.g_res).unwrap(), &g) < 1e-9);
    let ratios = s.estimate_ratios(&f, &g, 1.0, 2.0 * p.gamma);
    assert!(ratios.iter().all(|r| r.is_finite()));
    // Residual is second order.
    assert!(
        s.f_res.max_coeff() < 50.0 * f.max_coeff().powi(2),
        "{:e}",
        s.f_res.max_coeff()
    );
    // Off-center averages are an obstruction.
    let bad = f.add_constant(&HeisVector::new(vec![1e-6, 0.0], vec![0.0, 0.0], 0.0));
    assert!(matches!(
        split_vf(&bad, &g, &p),
        Err(DynamicsError::NontrivialClass { .. })
    ));
}

#[test]
fn compose_maps_agrees_with_pointwise_composition() {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = PerturbedMap::perturbed(&p, 1, rand_vf(&mut rng, 16, 3, &PLANE, 1e-4, 0.5, true));
    let b = PerturbedMap::perturbed(&p, 2, rand_vf(&mut rng, 16, 3, &PLANE, 1e-4, 0.5, true));
    let ab = compose_maps(&a, &b).unwrap();
    for _ in 0..100 {
        let u = rand_point(&mut rng);
        let vb = b.y.add(&eval_vf(&b.field, &u));
        let va = a.y.add(&eval_vf(&a.field, &add_off(&u, &vb)));
        let want = vb.add(&va).add(&vb.bracket(&va).scale(0.5));
        let got = ab.y.add(&eval_vf(&ab.field, &u));
        assert!(got.sub(&want).max_abs() < 1e-12);
    }
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = rand_vf(&mut rng, 3, 3, &ALL, 1.0, 0.2, true);
    let s = f.to_json();
    assert!(s.starts_with("{\"basis_order\":[\"X1\",\"X2\",\"L1\",\"L2\",\"Z\"]"));
    let back = TorusClassVectorField::from_json(&s).unwrap();
    assert_eq!(back, f);
    assert!(TorusClassVectorField::from_json("{\"components\":[]}").is_err());
}
