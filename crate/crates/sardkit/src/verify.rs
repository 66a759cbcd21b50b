//! The acceptance suite. Each criterion runs its checks with fixed seeds
//! and reports one line; `sardkit verify` and the `acceptance` test target
//! both call into here.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sardkit_core::charfield::{assemble, coeffs, displayed_field};
use sardkit_core::distribution::{random_pair, DEFAULT_RANK_TOL};
use sardkit_core::endpoint::{
    bryant_hsu_test, char_control, endpoint_jacobian_checked, random_control, random_trials, Classification, ControlPath,
};
use sardkit_core::field::field_difference;
use sardkit_core::flow::{
    closed_form, conserved_drift, integrate, lyapunov_report, printed_case_field, printed_surface, quadrant_grid,
    singular_surface, surface_membership, Monitor, SurfaceParams,
};
use sardkit_core::ode::SolverOptions;
use sardkit_core::poly::rat;
use sardkit_core::sard::{sard_sample, SardConfig};
use sardkit_core::{
    char_field, coeffs_corrected, coeffs_oracle, growth_vector, CatalogModel, Point4, PolyVectorField, QueryPoint,
    RationalPoint, SparsePoly, Var, Variant,
};

/// Seed shared by every criterion unless overridden.
pub const DEFAULT_SEED: u64 = 20240229;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    fn new(id: u8, title: &'static str) -> Self {
        CriterionResult { id, title, checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn error(&mut self, name: &str, e: impl fmt::Display) {
        self.check(name, false, format!("error: {e}"));
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let n_ok = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "criterion {:>2} {verdict}: {} ({}/{} checks)", self.id, self.title, n_ok, self.checks.len())?;
        for c in self.failures() {
            write!(f, "\n    failed {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "growth vectors"),
    (2, "characteristic-field identities"),
    (3, "horizontality identity"),
    (4, "conservation and Lyapunov decay"),
    (5, "closed-form regression"),
    (6, "singular surface"),
    (7, "case 3 single point"),
    (8, "singular-curve detectors"),
    (9, "Jacobian correctness"),
    (10, "Sard sampling"),
];

pub fn run(id: u8, seed: u64) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(seed),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        _ => return None,
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|&(id, _)| run(id, seed)).collect()
}

fn solver() -> SolverOptions {
    SolverOptions::with_tolerances(1e-10, 1e-12)
}

fn random_rational_point(rng: &mut ChaCha8Rng) -> RationalPoint {
    RationalPoint(std::array::from_fn(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=7))))
}

/// Exact growth vectors at the origin and at random rational points.
pub fn criterion_1(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(1, CRITERIA[0].1);
    let origin = QueryPoint::Exact(RationalPoint::origin());
    for (m, want) in [
        (CatalogModel::D224, &[2usize, 2, 4][..]),
        (CatalogModel::D2334A, &[2, 3, 3, 4][..]),
        (CatalogModel::D2334B, &[2, 3, 3, 4][..]),
        (CatalogModel::EngelStd, &[2, 3, 4][..]),
    ] {
        match growth_vector(&m.pair(), &origin, 5, DEFAULT_RANK_TOL) {
            Ok(g) => r.check(format!("{m} at origin"), g.is(want), format!("got {g}")),
            Err(e) => r.error(m.name(), e),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let engel = CatalogModel::EngelStd.pair();
    let mut bad = Vec::new();
    for _ in 0..50 {
        let q = random_rational_point(&mut rng);
        match growth_vector(&engel, &QueryPoint::Exact(q.clone()), 5, DEFAULT_RANK_TOL) {
            Ok(g) if g.is(&[2, 3, 4]) => {}
            Ok(g) => bad.push(format!("{:?} -> {g}", q.to_point())),
            Err(e) => bad.push(e.to_string()),
        }
    }
    r.check("engel_std at 50 random rational points", bad.is_empty(), format!("{} off (2,3,4): {:?}", bad.len(), bad));
    r
}

/// The Case 1 field as stated in the acceptance criterion.
fn stated_case1_field() -> PolyVectorField {
    let z = SparsePoly::var(Var::Z);
    let w = SparsePoly::var(Var::W);
    let k = SparsePoly::from_int;
    PolyVectorField::new(
        k(2) * &z * &z * &w,
        k(2) * &z * &w * &w,
        k(-2) * &z * (k(1) + &z * &w),
        k(-2) * &w,
    )
}

fn describe_diff(a: &PolyVectorField, b: &PolyVectorField) -> String {
    let d = field_difference(a, b);
    if d.is_empty() {
        return "identical".into();
    }
    d.iter().map(|(v, p)| format!("d/d{}: {}", v.name(), p)).collect::<Vec<_>>().join("; ")
}

/// Exact identities between the oracle, the displayed fields and the
/// corrected formula.
pub fn criterion_2(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(2, CRITERIA[1].1);
    for (m, label) in [(CatalogModel::D2334A, "case 2"), (CatalogModel::D2334B, "case 3")] {
        match char_field(&m.pair(), Variant::Oracle) {
            Ok(c) => {
                let disp = displayed_field(m).expect("displayed field");
                r.check(format!("{label} oracle equals display"), c == disp, describe_diff(&c, &disp));
            }
            Err(e) => r.error(label, e),
        }
    }
    match char_field(&CatalogModel::D224.pair(), Variant::Oracle) {
        Ok(c) => {
            let stated = stated_case1_field();
            r.check(
                "case 1 oracle equals (2z²w, 2zw², −2z(1+zw), −2w)",
                c == stated,
                format!("oracle = ({}, {}, {}, {}); oracle − stated: {}", c.comp(Var::X), c.comp(Var::Y), c.comp(Var::Z), c.comp(Var::W), describe_diff(&c, &stated)),
            );
            let disp = displayed_field(CatalogModel::D224).expect("displayed field");
            let diff = field_difference(&c, &disp);
            let want = SparsePoly::from_int(-2) * SparsePoly::var(Var::Z) * SparsePoly::var(Var::Z) * SparsePoly::var(Var::W);
            let ok = diff.len() == 1 && diff[0].0 == Var::Z && diff[0].1 == want;
            r.check("case 1 oracle − display is exactly −2z²w ∂z", ok, format!("oracle − display: {}", describe_diff(&c, &disp)));
        }
        Err(e) => r.error("case 1", e),
    }
    let mut pairs: Vec<(String, sardkit_core::PfaffianPair)> =
        CatalogModel::ALL.iter().map(|m| (m.name().to_string(), m.pair())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..20 {
        pairs.push((format!("random #{i}"), random_pair(&mut rng, 3)));
    }
    let mut bad = Vec::new();
    for (name, p) in &pairs {
        match coeffs_oracle(p) {
            Ok(o) => {
                let c = coeffs_corrected(p);
                if c.c != o.c || c.e != o.e {
                    bad.push(name.clone());
                }
            }
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    r.check("corrected ≡ oracle on catalog and 20 random pairs", bad.is_empty(), format!("mismatches: {bad:?}"));
    r
}

/// `θ1(C) ≡ θ2(C) ≡ 0` for every variant.
pub fn criterion_3(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(3, CRITERIA[2].1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(String, sardkit_core::PfaffianPair)> =
        CatalogModel::ALL.iter().map(|m| (m.name().to_string(), m.pair())).collect();
    for i in 0..20 {
        pairs.push((format!("random #{i}"), random_pair(&mut rng, 3)));
    }
    let mut random_bad = Vec::new();
    for (name, p) in &pairs {
        let mut bad = Vec::new();
        for v in Variant::ALL {
            match coeffs(p, v) {
                Ok(k) => {
                    let c = assemble(p, &k);
                    let (a, b) = p.pair_with(&c);
                    if !(a.is_zero() && b.is_zero()) {
                        bad.push(format!("{v}: θ1(C) = {a}, θ2(C) = {b}"));
                    }
                }
                Err(e) => bad.push(format!("{v}: {e}")),
            }
        }
        if name.starts_with("random") {
            random_bad.extend(bad.into_iter().map(|b| format!("{name} {b}")));
        } else {
            r.check(format!("{name} all variants horizontal"), bad.is_empty(), bad.join("; "));
        }
    }
    r.check("20 random pairs all variants horizontal", random_bad.is_empty(), random_bad.join("; "));
    r
}

fn on_circle(rng: &mut ChaCha8Rng, rho: f64) -> Point4 {
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = rho.sqrt();
    Point4::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), r * th.cos(), r * th.sin())
}

/// Conserved quantities of the two `(2,3,3,4)` models and the Lyapunov
/// function of `d224`.
pub fn criterion_4(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(4, CRITERIA[3].1);
    let opts = solver();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = Monitor::rho().quantity;
    let zw = Monitor::zw().quantity;
    let case3 = match char_field(&CatalogModel::D2334B.pair(), Variant::Oracle) {
        Ok(f) => f,
        Err(e) => {
            r.error("d2334b field", e);
            return r;
        }
    };
    for rho0 in [1.0, 0.01] {
        let mut worst: f64 = 0.0;
        let mut err = None;
        for _ in 0..20 {
            let q0 = on_circle(&mut rng, rho0);
            match integrate(&case3, q0, 10.0, &opts, &[]).and_then(|t| conserved_drift(&t, &rho)) {
                Ok(d) => worst = worst.max(d),
                Err(e) => err = Some(e.to_string()),
            }
        }
        r.check(
            format!("d2334b rho drift from rho(0)={rho0}"),
            err.is_none() && worst <= 1e-8,
            format!("max drift {worst:.3e}{}", err.map(|e| format!(", {e}")).unwrap_or_default()),
        );
    }
    match char_field(&CatalogModel::D2334A.pair(), Variant::Oracle) {
        Ok(case2) => {
            let mut worst: f64 = 0.0;
            let mut err = None;
            for _ in 0..20 {
                let q0 = Point4::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                );
                match integrate(&case2, q0, 10.0, &opts, &[]).and_then(|t| conserved_drift(&t, &zw)) {
                    Ok(d) => worst = worst.max(d),
                    Err(e) => err = Some(e.to_string()),
                }
            }
            r.check(
                "d2334a zw drift",
                err.is_none() && worst <= 1e-8,
                format!("max drift {worst:.3e}{}", err.map(|e| format!(", {e}")).unwrap_or_default()),
            );
        }
        Err(e) => r.error("d2334a field", e),
    }
    let mut ok = 0;
    let mut notes = Vec::new();
    for _ in 0..20 {
        let q0 = Point4::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..=0.5), rng.gen_range(-0.5..=0.5));
        match lyapunov_report(q0, 10.0, &opts) {
            Ok(rep) if rep.strictly_decreasing && rep.final_rho < 1e-6 => ok += 1,
            Ok(rep) => notes.push(format!("start {q0:?}: strict={} final={:.3e}", rep.strictly_decreasing, rep.final_rho)),
            Err(e) => notes.push(e.to_string()),
        }
    }
    r.check("d224 rho strictly decreasing, final rho < 1e-6", ok == 20, format!("{ok}/20 {notes:?}"));
    r
}

/// The displayed Case 1 and Case 2 fields reproduce their closed-form
/// solutions.
pub fn criterion_5(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(5, CRITERIA[4].1);
    let opts = solver();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in [CatalogModel::D224, CatalogModel::D2334A] {
        let field = printed_case_field(m).expect("displayed field").compile();
        let mut worst: f64 = 0.0;
        let mut err = None;
        for _ in 0..10 {
            let q0 = Point4::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            for t in [0.5, 1.0, 2.0] {
                let num = sardkit_core::flow::flow_to(&field, q0, t, &opts);
                let exact = closed_form(m, q0, t);
                match (num, exact) {
                    (Ok(a), Ok(b)) => {
                        let d = a.to_array().iter().zip(b.to_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                        worst = worst.max(d);
                    }
                    (Err(e), _) | (_, Err(e)) => err = Some(e.to_string()),
                }
            }
        }
        r.check(
            format!("{m} closed form at t in {{0.5, 1, 2}}"),
            err.is_none() && worst <= 1e-8,
            format!("max abs error {worst:.3e}{}", err.map(|e| format!(", {e}")).unwrap_or_default()),
        );
    }
    r
}

fn surface_rel_error(lo: f64, hi: f64, n: usize, p: &SurfaceParams) -> Result<(f64, usize, usize, f64), String> {
    let pair = CatalogModel::D224.pair();
    let grid = quadrant_grid(lo, hi, n);
    let s = singular_surface(&pair, &grid, p).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        if !s.converged[i] {
            continue;
        }
        let (z, w) = s.grid[i];
        let q = s.point(i);
        let (px, py) = printed_surface(CatalogModel::D224, z, w).expect("d224 formula");
        worst = worst.max((q.x - px).abs() / px.abs()).max((q.y - py).abs() / py.abs());
    }
    let members = surface_membership(&pair, &s, p).map_err(|e| e.to_string())?;
    let dist = members.iter().map(|(rho, xy)| (rho + xy * xy).sqrt()).fold(0.0, f64::max);
    Ok((worst, s.converged_count(), s.len(), dist))
}

/// Reconstructed `d224` surface against `−(1/3)(wz², zw²)`.
pub fn criterion_6() -> CriterionResult {
    let mut r = CriterionResult::new(6, CRITERIA[5].1);
    let p = SurfaceParams::default();
    for (lo, hi, tol) in [(0.01, 0.1, 0.05), (0.001, 0.01, 0.005)] {
        match surface_rel_error(lo, hi, 8, &p) {
            Ok((rel, conv, total, dist)) => {
                r.check(
                    format!("relative error on {lo} <= |z|,|w| <= {hi}"),
                    conv == total && rel <= tol,
                    format!("{conv}/{total} converged, max relative error {rel:.3e} (tolerance {tol})"),
                );
                r.check(
                    format!("membership on {lo} <= |z|,|w| <= {hi}"),
                    dist <= 1e-6,
                    format!("max distance to origin after re-integration {dist:.3e}"),
                );
            }
            Err(e) => r.error("surface", e),
        }
    }
    r
}

/// Case 3 trajectories from `ρ = 0.01` never approach the origin.
pub fn criterion_7(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(7, CRITERIA[6].1);
    let cfg = SardConfig { n_curves: 50, seed, detectors: false, ..Default::default() };
    match sard_sample(CatalogModel::D2334B, &cfg) {
        Ok(rep) => {
            let min_rho = rep.min_rho.unwrap_or(f64::NAN);
            r.check("50 trajectories", rep.n_curves == 50, format!("{} trajectories", rep.n_curves));
            r.check("min rho >= 0.01 - 1e-8", min_rho >= 0.01 - 1e-8, format!("min rho {min_rho:.17e}"));
        }
        Err(e) => r.error("sample", e),
    }
    r
}

/// Characteristic controls checked by both detectors: `(model, p0, duration)`.
pub const CHAR_CONTROL_CASES: [(CatalogModel, [f64; 4], f64); 3] = [
    (CatalogModel::D224, [-0.001 / 3.0, -0.001 / 3.0, 0.1, 0.1], 1.0),
    (CatalogModel::D2334A, [0.0, 0.0, 0.1, 0.1], 0.5),
    (CatalogModel::D2334B, [0.0, 0.0, 0.1, 0.0], 0.5),
];

/// Both singular-curve detectors on known singular and random curves.
pub fn criterion_8(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(8, CRITERIA[7].1);
    let opts = solver();
    let engel = CatalogModel::EngelStd.pair();
    let line = ControlPath::constant(0.0, 1.0, 32).expect("control");
    match bryant_hsu_test(&engel, Point4::ORIGIN, &line, &opts) {
        Ok(v) => {
            r.check(
                "engel_std (0,1): score < 1e-7 and bh < 1e-7",
                v.sigma_ratio < 1e-7 && v.bh_smallest < 1e-7,
                format!("score {:.3e}, bh {:.3e}", v.sigma_ratio, v.bh_smallest),
            );
            let res = v.witness_residual.unwrap_or(f64::INFINITY);
            r.check("engel_std (0,1): witness h1 = h2 = 0", res <= 1e-6, format!("witness {:?}, residual {res:.3e}", v.witness));
        }
        Err(e) => r.error("engel_std (0,1)", e),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in CatalogModel::ALL {
        match random_trials(&m.pair(), &mut rng, 100, 32, &opts) {
            Ok(s) => r.check(
                format!("{m}: 100 random controls"),
                s.regular >= 95 && s.disagreements == 0,
                format!("{} regular, {} ambiguous, {} singular, {} disagreements", s.regular, s.ambiguous, s.singular, s.disagreements),
            ),
            Err(e) => r.error(m.name(), e),
        }
    }
    for (m, p0, duration) in CHAR_CONTROL_CASES {
        let p = m.pair();
        let q0 = Point4::from_array(p0);
        let out = char_control(&p, q0, duration, 64, &opts).and_then(|c| bryant_hsu_test(&p, q0, &c, &opts));
        match out {
            Ok(v) => r.check(
                format!("{m}: char_control curve (64 segments) singular"),
                v.classification == Classification::Singular && v.jacobian_classification == Classification::Singular,
                format!("bh {:.3e}, score {:.3e}", v.bh_smallest, v.sigma_ratio),
            ),
            Err(e) => r.error(m.name(), e),
        }
    }
    r
}

/// Variational Jacobian against central differences.
pub fn criterion_9(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(9, CRITERIA[8].1);
    let opts = solver();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in CatalogModel::ALL {
        for n in [4, 16, 32] {
            let out = random_control(&mut rng, n).and_then(|c| endpoint_jacobian_checked(&m.pair(), Point4::ORIGIN, &c, &opts));
            match out {
                Ok(chk) => r.check(
                    format!("{m} n={n}"),
                    chk.max_discrepancy <= 1e-5,
                    format!("max discrepancy {:.3e}", chk.max_discrepancy),
                ),
                Err(e) => r.error(&format!("{m} n={n}"), e),
            }
        }
    }
    r
}

/// Endpoint clouds: a 2-parameter graph for `d224`, nothing but the origin
/// for `d2334b`.
pub fn criterion_10(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(10, CRITERIA[9].1);
    let cfg = SardConfig { n_curves: 200, seed, ..Default::default() };
    match sard_sample(CatalogModel::D224, &cfg) {
        Ok(rep) => {
            let d = rep.max_surface_distance.unwrap_or(f64::INFINITY);
            r.check(
                "d224: 200 endpoints within 1e-6 of the surface graph",
                rep.n_curves == 200 && d <= 1e-6,
                format!("{} endpoints, max distance {d:.3e}", rep.n_curves),
            );
        }
        Err(e) => r.error("d224", e),
    }
    let cfg = SardConfig { n_curves: 50, seed, ..Default::default() };
    match sard_sample(CatalogModel::D2334B, &cfg) {
        Ok(rep) => r.check(
            "d2334b: empty origin-reaching set",
            rep.origin_reaching == 0 && rep.surface_converged == 0,
            format!("{} reaching, {} surface samples converged", rep.origin_reaching, rep.surface_converged),
        ),
        Err(e) => r.error("d2334b", e),
    }
    r
}
