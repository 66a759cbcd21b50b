use proptest::prelude::*;
use sardkit_core::field::lie_bracket;
use sardkit_core::poly::rat;
use sardkit_core::{Point4, PolyVectorField, SparsePoly, Var};

fn poly(max_deg: u32) -> impl Strategy<Value = SparsePoly> {
    prop::collection::vec((-6i64..=6, 1i64..=4, prop::array::uniform4(0..=max_deg)), 0..6)
        .prop_map(|terms| SparsePoly::from_terms(terms.into_iter().map(|(n, d, e)| (rat(n, d), e))))
}

fn field(max_deg: u32) -> impl Strategy<Value = PolyVectorField> {
    (poly(max_deg), poly(max_deg), poly(max_deg), poly(max_deg)).prop_map(|(a, b, c, d)| PolyVectorField::new(a, b, c, d))
}

fn var() -> impl Strategy<Value = Var> {
    (0usize..4).prop_map(Var::from_index)
}

fn point() -> impl Strategy<Value = Point4> {
    prop::array::uniform4(-1.5f64..1.5).prop_map(Point4::from_array)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_commute(p in poly(3), a in var(), b in var()) {
        prop_assert_eq!(p.diff(a).diff(b), p.diff(b).diff(a));
    }

    #[test]
    fn leibniz(p in poly(3), q in poly(3), v in var()) {
        let lhs = (&p * &q).diff(v);
        let rhs = &p.diff(v) * &q + &p * &q.diff(v);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_is_a_ring_map(p in poly(3), q in poly(3), x in point()) {
        let (pv, qv) = (p.eval(&x), q.eval(&x));
        let scale = 1.0 + pv.abs() * qv.abs() + pv.abs() + qv.abs();
        prop_assert!(((&p + &q).eval(&x) - (pv + qv)).abs() <= 1e-12 * scale);
        prop_assert!(((&p * &q).eval(&x) - pv * qv).abs() <= 1e-12 * scale);
    }

    #[test]
    fn bracket_is_antisymmetric(a in field(3), b in field(3)) {
        prop_assert_eq!(lie_bracket(&a, &b), lie_bracket(&b, &a).neg());
    }

    #[test]
    fn jacobi_identity(a in field(2), b in field(2), c in field(2)) {
        let s = lie_bracket(&a, &lie_bracket(&b, &c))
            .add(&lie_bracket(&b, &lie_bracket(&c, &a)))
            .add(&lie_bracket(&c, &lie_bracket(&a, &b)));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn bracket_is_a_derivation(a in field(2), b in field(2), p in poly(2)) {
        // [A,B] p = A(B p) − B(A p)
        let lhs = lie_bracket(&a, &b).lie_derivative(&p);
        let rhs = a.lie_derivative(&b.lie_derivative(&p)) - b.lie_derivative(&a.lie_derivative(&p));
        prop_assert_eq!(lhs, rhs);
    }
}
