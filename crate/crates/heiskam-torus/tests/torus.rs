use heiskam_diophantine::{default_pair, FrequencyPair, Kappa};
use heiskam_fourier::TorusField;
use heiskam_torus::constant::{cocycle_defect, pair_to_vec};
use heiskam_torus::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair() -> FrequencyPair {
    default_pair(50)
}

fn random_field(rng: &mut ChaCha8Rng, cutoff: i32, modes: usize) -> TorusField {
    let mut f = TorusField::zero(2, cutoff as usize, false);
    for _ in 0..modes {
        let m: Vec<i32> = (0..4).map(|_| rng.gen_range(-cutoff..=cutoff)).collect();
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        f.add_at(&m, c).unwrap();
    }
    f.without_mean().into_real()
}

fn inner(a: &TorusField, b: &TorusField) -> Complex64 {
    a.iter().map(|(m, c)| c.conj() * b.get(m)).sum()
}

#[test]
fn manufactured_coboundary_is_recovered() {
    let pair = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let h = random_field(&mut rng, 12, 30);
        let f = coboundary(&h, Kappa::Tau, &pair);
        let g = coboundary(&h, Kappa::Eta, &pair);
        let sol = solve_common_coboundary(&f, &g, &pair).unwrap();
        assert!(sol.residual_tau <= 1e-11 && sol.residual_eta <= 1e-11);
        // P − H is constant; both are zero mean here.
        assert!(sol.p.l2_distance(&h) <= 1e-11 * h.sobolev_norm(0.0));
        assert!(tame_ratio(&sol.p, &f, &g, 1.0, pair.gamma) > 0.0);
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let z = TorusField::zero(2, 4, true);
    let sol = solve_common_coboundary(&z, &z, &pair()).unwrap();
    assert_eq!(sol.p.max_abs(), 0.0);
    assert_eq!((sol.residual_tau, sol.residual_eta), (0.0, 0.0));
}

#[test]
fn obstruction_and_cocycle_violations_are_reported() {
    let pair = pair();
    let z = TorusField::zero(2, 4, true);
    let f = TorusField::single_mode(2, 4, &[0, 0, 1, 0], Complex64::new(1.0, 0.0)).unwrap();
    match solve_common_coboundary(&f, &z, &pair) {
        Err(TorusError::ObstructionNonzero { m, .. }) => assert_eq!(m, vec![0, 0, 1, 0]),
        other => panic!("{other:?}"),
    }
    let f = TorusField::single_mode(2, 4, &[1, 0, 1, 0], Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(
        solve_common_coboundary(&f, &z, &pair),
        Err(TorusError::CocycleViolation { .. })
    ));
    let c = TorusField::single_mode(2, 4, &[0, 0, 0, 0], Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(
        solve_common_coboundary(&c, &z, &pair),
        Err(TorusError::NonZeroMean { .. })
    ));
    let wrong = TorusField::zero(3, 4, true);
    assert!(matches!(
        solve_common_coboundary(&wrong, &wrong, &pair),
        Err(TorusError::InvalidInput(_))
    ));
}

#[test]
fn projection_r_properties() {
    let pair = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_field(&mut rng, 8, 40);
    let k = random_field(&mut rng, 8, 40);
    let rh = project_r(&h);
    assert!(project_r(&rh).l2_distance(&rh) == 0.0);
    let c = TorusField::single_mode(2, 4, &[0, 0, 0, 0], Complex64::new(3.0, 0.0)).unwrap();
    assert_eq!(project_r(&c).max_abs(), 0.0);
    let lt = coboundary(&h, Kappa::Tau, &pair);
    assert!(project_r(&lt).l2_distance(&lt) <= 1e-15 * lt.sobolev_norm(0.0));
    let a = project_r(&coboundary(&h, Kappa::Eta, &pair));
    let b = coboundary(&rh, Kappa::Eta, &pair);
    assert!(a.l2_distance(&b) <= 1e-15 * (1.0 + a.sobolev_norm(0.0)));
    let lhs = inner(&project_r(&h), &k);
    let rhs = inner(&h, &project_r(&k));
    assert!((lhs - rhs).norm() <= 1e-13);
}

#[test]
fn split_of_exact_cocycle_matches_solve() {
    let pair = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_field(&mut rng, 10, 30);
    let f = coboundary(&h, Kappa::Tau, &pair);
    let g = coboundary(&h, Kappa::Eta, &pair);
    let phi = TorusField::zero(2, 10, true);
    let sp = split_torus(&f, &g, &phi, &pair).unwrap();
    let sol = solve_common_coboundary(&f, &g, &pair).unwrap();
    assert_eq!(sp.p, sol.p);
    assert!(!sp.fallback);
    assert_eq!(sp.measured_constant(&phi, 0.0, pair.gamma), 0.0);
    assert!(sp.f_res.sobolev_norm(0.0) <= 1e-12 * f.sobolev_norm(0.0));
}

#[test]
fn split_places_obstruction_in_residual() {
    let pair = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = random_field(&mut rng, 10, 30);
    let e = TorusField::single_mode(2, 10, &[0, 0, 2, -1], Complex64::new(0.01, 0.0))
        .unwrap()
        .into_real();
    let f = coboundary(&h, Kappa::Tau, &pair).add(&e).unwrap();
    let g = coboundary(&h, Kappa::Eta, &pair);
    let phi = coboundary(&f, Kappa::Eta, &pair)
        .sub(&coboundary(&g, Kappa::Tau, &pair))
        .unwrap();
    let sp = split_torus(&f, &g, &phi, &pair).unwrap();
    assert!(sp.f_res.l2_distance(&e) <= 1e-12);
    assert!(sp.g_res.sobolev_norm(0.0) <= 1e-12);
    assert!(sp.measured_constant(&phi, 0.0, pair.gamma).is_finite());

    let bad = phi.scale(Complex64::new(2.0, 0.0));
    assert!(matches!(
        split_torus(&f, &g, &bad, &pair),
        Err(TorusError::NotACochain { .. })
    ));
}

#[test]
fn split_with_vanishing_primary_uses_fallback() {
    let pair = pair();
    // f = 0 with g on a τ-block-nonzero mode: the primary solution reads only f there.
    let f = TorusField::zero(2, 6, false);
    let g = TorusField::single_mode(2, 6, &[1, 2, 0, 0], Complex64::new(1.0, 0.0)).unwrap();
    let phi = f.sub(&coboundary(&g, Kappa::Tau, &pair)).unwrap();
    let sp = split_torus(&f, &g, &phi, &pair).unwrap();
    assert!(sp.fallback);
    assert!(sp.p.max_abs() > 0.0);
}

#[test]
fn constant_cocycles_and_coboundaries() {
    let pair = pair();
    let space = constant_cocycle_space(&pair);
    assert_eq!(space.len(), 9);
    assert_eq!(rank_of_pairs(&space, 1e-10), 9);
    for p in &space {
        assert!(is_constant_cocycle(p, &pair, 1e-12));
        assert!((pair_to_vec(p).iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let tau = &pair.tau_vec;
    let eta = &pair.eta_vec;
    let off = (
        HeisVector::new(vec![0.0; 2], vec![0.0; 2], 0.0),
        HeisVector::new(vec![0.0; 2], vec![1.0, 0.0], 0.0),
    );
    assert!(!is_constant_cocycle(&off, &pair, 1e-12));
    assert!(cocycle_defect(&off, &pair).abs() > 0.1);

    let (f, g) = constant_coboundary(&HeisVector::central(2, 1.0), &pair);
    assert_eq!(f.max_abs(), 0.0);
    assert_eq!(g.max_abs(), 0.0);
    let (f, g) = constant_coboundary(&HeisVector::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.0), &pair);
    assert!((f.z_part - tau[0]).abs() < 1e-15 && f.off_center().iter().all(|&x| x == 0.0));
    assert_eq!(g.max_abs(), 0.0);
    let h = HeisVector::new(vec![0.3, -0.2], vec![0.7, 0.1], 5.0);
    let cb = constant_coboundary(&h, &pair);
    assert!(is_constant_cocycle(&cb, &pair, 1e-12));
    assert!((cb.1.z_part + eta[0] * 0.3 + eta[1] * -0.2).abs() < 1e-15);
}

#[test]
fn cohomology_basis_has_no_coboundary_combination() {
    let pair = pair();
    let basis = cohomology_basis(&pair);
    assert_eq!(basis.len(), 7);
    let mut all = basis.clone();
    for k in 0..5 {
        let mut v = vec![0.0; 5];
        v[k] = 1.0;
        all.push(constant_coboundary(&HeisVector::from_slice(&v), &pair));
    }
    // Coboundaries span 2 dimensions; together with the basis they span all 9 cocycles.
    assert_eq!(rank_of_pairs(&all[7..], 1e-10), 2);
    assert_eq!(rank_of_pairs(&all, 1e-10), 9);
}

#[test]
fn family_parameters() {
    let pair = pair();
    let zero = FamilyParameter::zero(2);
    let (f1, f2) = family_generators(&zero, &pair).unwrap();
    assert_eq!((f1.max_abs(), f2.max_abs()), (0.0, 0.0));
    assert_eq!(FamilyParameter::chart_dim(2), 9);

    let coords: Vec<f64> = (0..9).map(|i| 1e-3 * (i as f64 - 4.0)).collect();
    let lam = FamilyParameter::from_chart(&coords, &pair).unwrap();
    assert!(lam.relation_defect(&pair).abs() < 1e-15);
    assert_eq!(lam.chart_coords(), coords);
    assert!(family_generators(&lam, &pair).is_ok());
    assert!(FamilyParameter::from_chart(&coords[..8], &pair).is_err());

    let mut broken = lam.clone();
    broken.f2.lam_part[0] += 1e-6;
    assert!(matches!(
        family_generators(&broken, &pair),
        Err(TorusError::ConstraintViolated { .. })
    ));

    let mut c = vec![0.0; 9];
    c[0] = -pair.tau_vec[0];
    assert!(matches!(
        FamilyParameter::from_chart(&c, &pair),
        Err(TorusError::ChartSingular { .. })
    ));
}

#[test]
fn conjugacy_reduction() {
    let pair = pair();
    let mut lam = FamilyParameter::zero(2);
    lam.f1.z_part = 0.4;
    lam.f2.z_part = -0.3;
    let r = reduce_conjugacy(&lam, &pair);
    assert!(r.exact);
    assert_eq!(r.lam, FamilyParameter::zero(2));
    // The conjugacy H accounts for the removed centers.
    let (f, g) = constant_coboundary(&r.h, &pair);
    assert!((f.z_part + 0.4).abs() < 1e-14 && (g.z_part - 0.3).abs() < 1e-14);

    let coords: Vec<f64> = (0..9).map(|i| 1e-3 * (i as f64 + 1.0)).collect();
    let lam = FamilyParameter::from_chart(&coords, &pair).unwrap();
    let r = reduce_conjugacy(&lam, &pair);
    assert!(!r.exact);
    let again = reduce_conjugacy(&r.lam, &pair);
    assert_eq!(again.lam, r.lam);
    assert_eq!(again.h.max_abs(), 0.0);
    assert_eq!(
        reduce_conjugacy(&FamilyParameter::zero(2), &pair).lam,
        FamilyParameter::zero(2)
    );
}
