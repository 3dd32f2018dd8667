use heiskam_diophantine::default_pair;
use heiskam_schrodinger::build_frame;
use heiskam_schrodinger::frame::build_frame_from;
use heiskam_schrodinger::grid::{translate_periodic, GaussianPacket, GridField};
use heiskam_schrodinger::ops::{l_eta_apply, l_tau_apply};
use heiskam_schrodinger::solve::annihilator_eta_defect;
use num_complex::Complex64;
use proptest::prelude::*;

fn packet() -> impl Strategy<Value = GaussianPacket> {
    (
        -1.0f64..1.0,
        -1.0f64..1.0,
        prop::collection::vec(-4.0f64..4.0, 2),
        prop::collection::vec(0.8f64..1.5, 2),
        prop::collection::vec(-2.0f64..2.0, 2),
    )
        .prop_map(|(a, b, center, width, modulation)| GaussianPacket {
            amplitude: Complex64::new(a, b),
            center,
            width,
            modulation,
        })
}

fn field() -> impl Strategy<Value = GridField> {
    prop::collection::vec(packet(), 1..4).prop_map(|p| GridField::from_packets(2, 20.0, 256, &p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn frame_is_a_rotation(n in 2usize..5, tau in prop::collection::vec(0.5f64..2.0, 4), eta in prop::collection::vec(-2.0f64..2.0, 4)) {
        let tau = &tau[..n];
        let mut eta = eta[..n].to_vec();
        eta[0] -= 3.0;
        let fr = build_frame_from(tau, &eta).unwrap();
        prop_assert!(fr.orthogonality_defect() < 1e-12);
        prop_assert!((fr.determinant() - 1.0).abs() < 1e-12);
        let t = fr.apply(tau);
        let e = fr.apply(&eta);
        prop_assert!((t[0] - fr.tau).abs() < 1e-12);
        prop_assert!(t[1..].iter().all(|x| x.abs() < 1e-12));
        prop_assert!(e[2..].iter().all(|x| x.abs() < 1e-12));
        prop_assert!((e[0] - fr.nu1).abs() < 1e-12 && (e[1] - fr.nu2).abs() < 1e-12);
    }

    #[test]
    fn translation_round_trip(f in field(), d in -3.0f64..3.0, axis in 0usize..2) {
        let g = translate_periodic(&translate_periodic(&f, axis, d), axis, -d);
        prop_assert!(g.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());
        let h = translate_periodic(&f, axis, d);
        prop_assert!((h.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn coboundary_operators_commute(f in field()) {
        let fr = build_frame(&default_pair(50)).unwrap();
        let a = l_tau_apply(&l_eta_apply(&f, &fr), &fr);
        let b = l_eta_apply(&l_tau_apply(&f, &fr), &fr);
        prop_assert!(a.sub(&b).unwrap().max_abs() <= 1e-12 * f.max_abs());
        prop_assert!(annihilator_eta_defect(&l_eta_apply(&f, &fr), &fr) < 1e-12);
    }
}
