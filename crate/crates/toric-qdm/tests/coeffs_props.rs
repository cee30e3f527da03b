//! Property tests for the exact scalar layer: field axioms of the rational
//! function field, canonical-form idempotence, and GCD contracts.

use proptest::prelude::*;
use std::sync::Arc;
use toric_qdm::coeffs::{poly_gcd, rat_int, Mono, Poly, RatFun, VarTable};

fn table() -> Arc<VarTable> {
    VarTable::new(&[("l1", 1), ("l2", 1)])
}

/// Small random polynomial in two generators: up to 4 terms, exponents ≤ 2,
/// integer coefficients in [-5, 5].
fn poly_strategy() -> impl Strategy<Value = Poly> {
    proptest::collection::vec(((0u16..3, 0u16..3), -5i64..=5), 0..4).prop_map(|terms| {
        let t = table();
        Poly::from_terms(
            &t,
            terms
                .into_iter()
                .map(|((e1, e2), c)| (Mono(vec![e1, e2]), rat_int(c))),
        )
    })
}

fn nonzero_poly_strategy() -> impl Strategy<Value = Poly> {
    poly_strategy().prop_filter("nonzero", |p| !p.is_zero())
}

fn ratfun_strategy() -> impl Strategy<Value = RatFun> {
    (poly_strategy(), nonzero_poly_strategy())
        .prop_map(|(n, d)| RatFun::new(n, d).expect("nonzero denominator"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn add_commutes(a in ratfun_strategy(), b in ratfun_strategy()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
    }

    #[test]
    fn mul_commutes(a in ratfun_strategy(), b in ratfun_strategy()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn add_associates(a in ratfun_strategy(), b in ratfun_strategy(), c in ratfun_strategy()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn mul_associates(a in ratfun_strategy(), b in ratfun_strategy(), c in ratfun_strategy()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn distributivity(a in ratfun_strategy(), b in ratfun_strategy(), c in ratfun_strategy()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn additive_inverse(a in ratfun_strategy()) {
        prop_assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn multiplicative_inverse(a in ratfun_strategy()) {
        if !a.is_zero() {
            let inv = a.inverse().unwrap();
            prop_assert!(a.mul(&inv).is_one());
        }
    }

    #[test]
    fn sub_then_add_roundtrip(a in ratfun_strategy(), b in ratfun_strategy()) {
        prop_assert_eq!(a.sub(&b).add(&b), a.clone());
    }

    #[test]
    fn canonical_form_is_stable(a in ratfun_strategy(), m in nonzero_poly_strategy()) {
        // Building num*m / den*m must normalize back to the same canonical
        // representative.
        let blown = RatFun::new(a.num().mul(&m), a.den().mul(&m)).unwrap();
        prop_assert_eq!(blown, a.clone());
    }

    #[test]
    fn gcd_divides_both(a in nonzero_poly_strategy(), b in nonzero_poly_strategy()) {
        let g = poly_gcd(&a, &b);
        prop_assert!(a.exact_div(&g).is_some());
        prop_assert!(b.exact_div(&g).is_some());
    }

    #[test]
    fn gcd_absorbs_common_factor(a in nonzero_poly_strategy(), b in nonzero_poly_strategy(), m in nonzero_poly_strategy()) {
        // gcd(a·m, b·m) = gcd(a,b)·m up to canonical normalization.
        let g1 = poly_gcd(&a.mul(&m), &b.mul(&m));
        let g2 = poly_gcd(&a, &b).mul(&m).primitive_part();
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn derivative_is_leibniz(a in ratfun_strategy(), b in ratfun_strategy()) {
        let lhs = a.mul(&b).derivative(0);
        let rhs = a.derivative(0).mul(&b).add(&a.mul(&b.derivative(0)));
        prop_assert_eq!(lhs, rhs);
    }
}
