use std::sync::Arc;

use crjet::linalg::{eval_matrix, generic_rank, jacobian, Sampler};
use crjet::series::Series;
use crjet::{GaussianRational, Monomial, Poly, Qi, Registry};
use proptest::prelude::*;

fn registry() -> Arc<Registry> {
    Registry::base(2, 1)
}

fn scalar() -> impl Strategy<Value = Qi> {
    (-9i64..=9, 1i64..=4, -9i64..=9, 1i64..=4).prop_map(|(a, b, c, d)| GaussianRational::complex(a, b, c, d))
}

fn poly() -> impl Strategy<Value = Poly> {
    let r = registry();
    let len = r.len();
    prop::collection::vec((prop::collection::vec(0u32..=2, len), scalar()), 0..6)
        .prop_map(move |terms| Poly::from_terms(&r, terms.into_iter().map(|(e, c)| (Monomial::from_exps(e), c))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Poly::one(a.registry()), a.clone());
    }

    #[test]
    fn bar_is_an_involutive_ring_homomorphism(a in poly(), b in poly()) {
        prop_assert_eq!(a.bar().unwrap().bar().unwrap(), a.clone());
        prop_assert_eq!((&a * &b).bar().unwrap(), &a.bar().unwrap() * &b.bar().unwrap());
        prop_assert_eq!((&a + &b).bar().unwrap(), &a.bar().unwrap() + &b.bar().unwrap());
    }

    #[test]
    fn truncated_product_matches_product(a in poly(), b in poly(), d in 0u32..8) {
        prop_assert_eq!(a.mul_trunc(&b, d), (&a * &b).truncate(d));
        let sa = Series::new(a.clone(), d);
        let prod = sa.mul(&Series::new(b.clone(), d));
        prop_assert_eq!(prod.poly(), &(&a * &b).truncate(d));
    }

    #[test]
    fn generic_rank_bounds_pointwise_rank(fs in prop::collection::vec(poly(), 1..4), seed in 0u64..1000) {
        let r = registry();
        let vars: Vec<usize> = (0..r.len()).collect();
        let jac = jacobian(&fs, &vars);
        let g = generic_rank(&jac, &vars, &mut Sampler::new(seed, 8), 3);
        let mut s = Sampler::new(seed ^ 0x5eed, 4);
        let point: Vec<Qi> = (0..r.len()).map(|_| s.rational()).collect();
        prop_assert!(g >= eval_matrix(&jac, &point).rank());
    }
}
