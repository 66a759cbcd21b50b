use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sardkit_core::flow::{flow_to, integrate, Monitor};
use sardkit_core::ode::SolverOptions;
use sardkit_core::{char_field, CatalogModel, Point4, Variant};

fn oracle(m: CatalogModel) -> sardkit_core::PolyVectorField {
    char_field(&m.pair(), Variant::Oracle).unwrap()
}

#[test]
fn monitors_are_symbolically_sound() {
    // numerical conservation is only claimed where the exact derivative vanishes
    assert!(oracle(CatalogModel::D2334B).lie_derivative(&Monitor::rho().quantity).is_zero());
    assert!(oracle(CatalogModel::D2334A).lie_derivative(&Monitor::zw().quantity).is_zero());
    let d = oracle(CatalogModel::D224).lie_derivative(&Monitor::rho().quantity);
    assert_eq!(d, Monitor::rho().quantity.scale(&sardkit_core::poly::rat(-4, 1)));
    assert!(!oracle(CatalogModel::D2334A).lie_derivative(&Monitor::rho().quantity).is_zero());
}

#[test]
fn case3_order_check() {
    // ż = −2w, ẇ = 2z: exact rotation at angular speed 2
    let field = oracle(CatalogModel::D2334B);
    let q0 = Point4::new(0.0, 0.0, 1.0, 0.0);
    let t: f64 = 10.0;
    let exact = ((2.0 * t).cos(), (2.0 * t).sin());
    let mut errs = Vec::new();
    for k in 4..=9 {
        let rtol = 10f64.powi(-k);
        let opts = SolverOptions::with_tolerances(rtol, rtol * 1e-3);
        let q = flow_to(&field.compile(), q0, t, &opts).unwrap();
        errs.push(((q.z - exact.0).powi(2) + (q.w - exact.1).powi(2)).sqrt());
    }
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 8.0, "error ratio per decade below 8: {:?}", errs);
    }
}

#[test]
fn flows_are_reversible() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let opts = SolverOptions::default();
    for m in CatalogModel::ALL {
        let f = oracle(m).compile();
        for _ in 0..5 {
            let q0 = Point4::from_array(std::array::from_fn(|_| rng.gen_range(-0.3..0.3)));
            let q1 = flow_to(&f, q0, 1.0, &opts).unwrap();
            let back = flow_to(&f, q1, -1.0, &opts).unwrap();
            assert!(back.dist(&q0) < 1e-8, "{m}: {}", back.dist(&q0));
        }
    }
}

#[test]
fn monitor_channels_match_direct_evaluation() {
    let opts = SolverOptions::default();
    let tr = integrate(&oracle(CatalogModel::D224), Point4::new(0.1, 0.0, 0.3, -0.2), 2.0, &opts, &[Monitor::rho()]).unwrap();
    let ch = tr.channel("rho").unwrap();
    for (q, r) in tr.states.iter().zip(ch) {
        assert!((q.rho() - r).abs() <= 1e-15 * r.max(1e-300));
    }
    // ρ(t) = ρ(0) e^{−4t} exactly
    let last = *ch.last().unwrap();
    assert!((last - 0.13 * (-8.0f64).exp()).abs() < 1e-12);
}
