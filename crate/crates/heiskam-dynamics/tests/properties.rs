mod common;

use common::*;
use heiskam_diophantine::default_pair;
use heiskam_dynamics::{bracket, d1, d2, split_vf};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d2_after_d1_vanishes(seed in any::<u64>(), band in 1usize..4) {
        let p = default_pair(30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rand_vf(&mut rng, band, band, &ALL, 1.0, 0.2, true);
        let (f, g) = d1(&h, &p).unwrap();
        prop_assert!(d2(&f, &g, &p).unwrap().max_coeff() < 1e-12);
    }

    #[test]
    fn brackets_are_central(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = rand_vf(&mut rng, 4, 2, &ALL, 1.0, 0.2, true);
        let v = rand_vf(&mut rng, 4, 2, &PLANE, 1.0, 0.2, true);
        let b = bracket(&u, &v).unwrap();
        for k in 0..4 {
            prop_assert!(b.component(k).is_empty());
        }
        // Antisymmetry.
        let c = bracket(&v, &u).unwrap();
        prop_assert!(b.add(&c).unwrap().max_coeff() < 1e-13);
    }

    #[test]
    fn split_reconstructs_exactly(seed in any::<u64>()) {
        let p = default_pair(30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = rand_vf(&mut rng, 3, 3, &PLANE, 1.0, 0.3, false);
        let g = rand_vf(&mut rng, 3, 3, &PLANE, 1.0, 0.3, false);
        let s = split_vf(&f, &g, &p).unwrap();
        let (a, b) = d1(&s.h, &p).unwrap();
        prop_assert!(max_coeff_diff(&a.add(&s.f_res).unwrap(), &f) < 1e-12);
        prop_assert!(max_coeff_diff(&b.add(&s.g_res).unwrap(), &g) < 1e-12);
        // Torus-class closure: the output depends on the same variables only.
        let act = s.h.active_axes();
        prop_assert!(!act[1] && !act[3]);
    }
}
