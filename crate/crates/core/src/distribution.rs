//! Rank-2 distributions given as Pfaffian pairs, their bracket flag, growth
//! vectors, the polynomial Engel certificate and the model catalog.
//!
//! A pair `(f, g)` defines the distribution as the common kernel of
//! `θ1 = dx + f dw` and `θ2 = dy + g dw`; it is spanned by `Z = ∂z` and
//! `W = ∂w − f∂x − g∂y`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::field::{lie_bracket, PolyVectorField};
use crate::linalg::{rank_exact, rank_relative, Matrix};
use crate::poly::{rat, Point4, RationalPoint, Rational, SparsePoly, Var};

/// Default relative threshold for floating rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Default number of flag steps explored by [`growth_vector`].
pub const DEFAULT_MAX_STEP: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PfaffianPair {
    pub f: SparsePoly,
    pub g: SparsePoly,
}

impl PfaffianPair {
    pub fn new(f: SparsePoly, g: SparsePoly) -> Self {
        PfaffianPair { f, g }
    }

    /// `(θ1(V), θ2(V)) = (V^x + f V^w, V^y + g V^w)`.
    pub fn pair_with(&self, v: &PolyVectorField) -> (SparsePoly, SparsePoly) {
        let t1 = v.comp(Var::X) + &(&self.f * v.comp(Var::W));
        let t2 = v.comp(Var::Y) + &(&self.g * v.comp(Var::W));
        (t1, t2)
    }

    pub fn is_horizontal(&self, v: &PolyVectorField) -> bool {
        let (a, b) = self.pair_with(v);
        a.is_zero() && b.is_zero()
    }
}

/// The built-in normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogModel {
    /// Standard Engel: `f = z`, `g = z²/2`.
    EngelStd,
    /// Growth `(2,2,4)` on `z = w = 0`: `f = z²`, `g = zw`.
    D224,
    /// Growth `(2,3,3,4)`, case A: `f = z`, `g = z²w`.
    D2334A,
    /// Growth `(2,3,3,4)`, case B: `f = z`, `g = z³/3 + zw²`.
    D2334B,
}

impl CatalogModel {
    pub const ALL: [CatalogModel; 4] =
        [CatalogModel::EngelStd, CatalogModel::D224, CatalogModel::D2334A, CatalogModel::D2334B];
    pub const DEGENERATE: [CatalogModel; 3] =
        [CatalogModel::D224, CatalogModel::D2334A, CatalogModel::D2334B];

    pub fn name(self) -> &'static str {
        match self {
            CatalogModel::EngelStd => "engel_std",
            CatalogModel::D224 => "d224",
            CatalogModel::D2334A => "d2334a",
            CatalogModel::D2334B => "d2334b",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        CatalogModel::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn pair(self) -> PfaffianPair {
        let z = SparsePoly::var(Var::Z);
        let w = SparsePoly::var(Var::W);
        match self {
            CatalogModel::EngelStd => PfaffianPair::new(z.clone(), (&z * &z).scale(&rat(1, 2))),
            CatalogModel::D224 => PfaffianPair::new(&z * &z, &z * &w),
            CatalogModel::D2334A => PfaffianPair::new(z.clone(), &(&z * &z) * &w),
            CatalogModel::D2334B => {
                let g = z.pow(3).scale(&rat(1, 3)) + &(&z * &w) * &w;
                PfaffianPair::new(z, g)
            }
        }
    }

    /// Growth vector at the origin of the normal form.
    pub fn growth_at_origin(self) -> &'static [usize] {
        match self {
            CatalogModel::EngelStd => &[2, 3, 4],
            CatalogModel::D224 => &[2, 2, 4],
            CatalogModel::D2334A | CatalogModel::D2334B => &[2, 3, 3, 4],
        }
    }
}

impl fmt::Display for CatalogModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `Z = ∂z`, `W = ∂w − f∂x − g∂y`.
pub fn frame(pair: &PfaffianPair) -> (PolyVectorField, PolyVectorField) {
    let z = PolyVectorField::coordinate(Var::Z);
    let w = PolyVectorField::new(-&pair.f, -&pair.g, SparsePoly::zero(), SparsePoly::one());
    (z, w)
}

/// `g_z f_zz − f_z g_zz`; the distribution is Engel wherever it is nonzero.
pub fn engel_certificate(pair: &PfaffianPair) -> SparsePoly {
    let fz = pair.f.diff(Var::Z);
    let gz = pair.g.diff(Var::Z);
    &(&gz * &fz.diff(Var::Z)) - &(&fz * &gz.diff(Var::Z))
}

/// Point at which a growth vector is requested. Exact points get exact
/// rational ranks; float points use singular values with a relative threshold.
#[derive(Clone, Debug, PartialEq)]
pub enum QueryPoint {
    Exact(RationalPoint),
    Float(Point4),
}

impl QueryPoint {
    pub fn to_point(&self) -> Point4 {
        match self {
            QueryPoint::Exact(r) => r.to_point(),
            QueryPoint::Float(p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthVector {
    pub dims: Vec<usize>,
    /// False when the flag did not reach dimension 4 within the step budget.
    pub bracket_generating: bool,
}

impl GrowthVector {
    pub fn is(&self, expected: &[usize]) -> bool {
        self.dims == expected
    }

    pub fn is_engel(&self) -> bool {
        self.is(&[2, 3, 4])
    }
}

impl fmt::Display for GrowthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", d)?;
        }
        f.write_str(")")?;
        if !self.bracket_generating {
            f.write_str(" not bracket generating")?;
        }
        Ok(())
    }
}

/// Bracket words of each length, computed once per pair so that point
/// sweeps only pay for evaluation.
///
/// Level `k` holds the right-normed words `[X1,[X2,…,[X_{k−1},X_k]…]]`
/// with `X_i ∈ {Z, W}`; by the Jacobi identity these span every bracket
/// of length `k`.
#[derive(Clone, Debug)]
pub struct BracketFlag {
    levels: Vec<Vec<PolyVectorField>>,
}

impl BracketFlag {
    pub fn new(pair: &PfaffianPair, max_step: usize) -> Result<Self> {
        if max_step < 2 {
            return Err(invalid("max_step must be at least 2"));
        }
        let (z, w) = frame(pair);
        let mut levels: Vec<Vec<PolyVectorField>> = Vec::with_capacity(max_step);
        levels.push(alloc::vec![z.clone(), w.clone()]);
        for k in 1..max_step {
            let mut next: Vec<PolyVectorField> = Vec::new();
            for v in &levels[k - 1] {
                for x in [&z, &w] {
                    let b = lie_bracket(x, v);
                    if b.is_zero() || next.contains(&b) || next.contains(&b.neg()) {
                        continue;
                    }
                    next.push(b);
                }
            }
            levels.push(next);
        }
        Ok(BracketFlag { levels })
    }

    pub fn max_step(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> &[PolyVectorField] {
        &self.levels[k - 1]
    }

    pub fn growth_at(&self, q: &QueryPoint, rank_tol: f64) -> GrowthVector {
        let mut dims = Vec::new();
        match q {
            QueryPoint::Exact(rq) => {
                let mut rows: Vec<[Rational; 4]> = Vec::new();
                for level in &self.levels {
                    rows.extend(level.iter().map(|v| v.eval_exact(rq)));
                    let r = rank_exact(&rows);
                    dims.push(r);
                    if r == 4 {
                        break;
                    }
                }
            }
            QueryPoint::Float(p) => {
                let mut rows: Vec<Vec<f64>> = Vec::new();
                for level in &self.levels {
                    rows.extend(level.iter().map(|v| v.eval(p).to_vec()));
                    let r = rank_relative(&Matrix::from_rows(&rows), rank_tol);
                    dims.push(r);
                    if r == 4 {
                        break;
                    }
                }
            }
        }
        let bracket_generating = dims.last() == Some(&4);
        GrowthVector { dims, bracket_generating }
    }
}

pub fn growth_vector(
    pair: &PfaffianPair,
    q: &QueryPoint,
    max_step: usize,
    rank_tol: f64,
) -> Result<GrowthVector> {
    Ok(BracketFlag::new(pair, max_step)?.growth_at(q, rank_tol))
}

/// Outcome of comparing the polynomial Engel certificate with the bracket
/// computation at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaReport {
    pub certificate_value: f64,
    pub certificate_nonzero: bool,
    pub growth: GrowthVector,
    pub is_engel_by_growth: bool,
}

impl SigmaReport {
    /// The certificate and the growth vector give different Engel verdicts.
    pub fn disagreement(&self) -> bool {
        self.certificate_nonzero != self.is_engel_by_growth
    }
}

pub fn sigma_check(pair: &PfaffianPair, q: &QueryPoint) -> Result<SigmaReport> {
    let flag = BracketFlag::new(pair, DEFAULT_MAX_STEP)?;
    Ok(sigma_check_with(&flag, &engel_certificate(pair), q, DEFAULT_RANK_TOL))
}

/// [`sigma_check`] with a precomputed flag and certificate, for sweeps.
pub fn sigma_check_with(
    flag: &BracketFlag,
    certificate: &SparsePoly,
    q: &QueryPoint,
    rank_tol: f64,
) -> SigmaReport {
    let (certificate_value, certificate_nonzero) = match q {
        QueryPoint::Exact(rq) => {
            let v = certificate.eval_exact(rq);
            (crate::poly::rational_to_f64(&v), !num_traits::Zero::is_zero(&v))
        }
        QueryPoint::Float(p) => {
            let v = certificate.eval(p);
            (v, v != 0.0)
        }
    };
    let growth = flag.growth_at(q, rank_tol);
    let is_engel_by_growth = growth.is_engel();
    SigmaReport { certificate_value, certificate_nonzero, growth, is_engel_by_growth }
}

/// Random polynomial with total degree at most `max_degree` and small
/// integer-over-small-integer coefficients. Roughly half the monomials are
/// present.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, max_degree: u32) -> SparsePoly {
    let mut terms = Vec::new();
    for ex in 0..=max_degree {
        for ey in 0..=(max_degree - ex) {
            for ez in 0..=(max_degree - ex - ey) {
                for ew in 0..=(max_degree - ex - ey - ez) {
                    if rng.gen_bool(0.5) {
                        continue;
                    }
                    let num: i64 = rng.gen_range(-3..=3);
                    let den: i64 = rng.gen_range(1..=3);
                    terms.push((rat(num, den), [ex, ey, ez, ew]));
                }
            }
        }
    }
    SparsePoly::from_terms(terms)
}

pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, max_degree: u32) -> PfaffianPair {
    PfaffianPair::new(random_poly(rng, max_degree), random_poly(rng, max_degree))
}

/// Human-readable `(f, g)`.
pub fn describe_pair(pair: &PfaffianPair) -> String {
    alloc::format!("f = {}, g = {}", pair.f, pair.g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn exact(c: [i64; 4]) -> QueryPoint {
        QueryPoint::Exact(RationalPoint::from_ints(c))
    }

    fn z() -> SparsePoly {
        SparsePoly::var(Var::Z)
    }
    fn w() -> SparsePoly {
        SparsePoly::var(Var::W)
    }

    #[test]
    fn frame_of_d224() {
        let (zf, wf) = frame(&CatalogModel::D224.pair());
        assert_eq!(zf, PolyVectorField::coordinate(Var::Z));
        assert_eq!(wf, PolyVectorField::new(-(&z() * &z()), -(&z() * &w()), SparsePoly::zero(), SparsePoly::one()));
    }

    #[test]
    fn frame_of_integrable_pair() {
        let (_, wf) = frame(&PfaffianPair::new(SparsePoly::zero(), SparsePoly::zero()));
        assert_eq!(wf, PolyVectorField::coordinate(Var::W));
    }

    #[test]
    fn frame_of_d2334b() {
        let (_, wf) = frame(&CatalogModel::D2334B.pair());
        let g = z().pow(3).scale(&rat(1, 3)) + &z() * &w() * w();
        assert_eq!(wf, PolyVectorField::new(-z(), -g, SparsePoly::zero(), SparsePoly::one()));
    }

    #[test]
    fn first_brackets() {
        let (zf, wf) = frame(&CatalogModel::D224.pair());
        let b = lie_bracket(&zf, &wf);
        let expected = PolyVectorField::new(z().scale(&rat(-2, 1)), -w(), SparsePoly::zero(), SparsePoly::zero());
        assert_eq!(b, expected);

        let (zf, wf) = frame(&CatalogModel::D2334A.pair());
        let b = lie_bracket(&zf, &wf);
        let expected = PolyVectorField::new(
            SparsePoly::from_int(-1),
            (&z() * &w()).scale(&rat(-2, 1)),
            SparsePoly::zero(),
            SparsePoly::zero(),
        );
        assert_eq!(b, expected);
    }

    #[test]
    fn growth_examples() {
        let d224 = CatalogModel::D224.pair();
        let g = |p: &PfaffianPair, q| growth_vector(p, &q, 5, DEFAULT_RANK_TOL).unwrap().dims;
        assert_eq!(g(&d224, exact([0, 0, 0, 0])), [2, 2, 4]);
        assert_eq!(g(&CatalogModel::D2334A.pair(), exact([0, 0, 0, 0])), [2, 3, 3, 4]);
        assert_eq!(g(&d224, exact([0, 0, 1, 0])), [2, 3, 4]);
        // float route agrees away from the rank boundary
        let q = QueryPoint::Float(Point4::new(0.0, 0.0, 0.5, 0.0));
        assert_eq!(g(&d224, q), [2, 3, 4]);
    }

    #[test]
    fn integrable_pair_is_not_bracket_generating() {
        let pair = PfaffianPair::new(SparsePoly::zero(), SparsePoly::zero());
        let gv = growth_vector(&pair, &exact([1, 2, 3, 4]), 4, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(gv.dims, [2, 2, 2, 2]);
        assert!(!gv.bracket_generating);
        assert!(growth_vector(&pair, &exact([0, 0, 0, 0]), 1, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn certificate_examples() {
        assert_eq!(engel_certificate(&CatalogModel::D224.pair()), w().scale(&rat(2, 1)));
        assert_eq!(engel_certificate(&CatalogModel::EngelStd.pair()), SparsePoly::from_int(-1));
        assert!(engel_certificate(&PfaffianPair::new(SparsePoly::zero(), SparsePoly::zero())).is_zero());
    }

    #[test]
    fn sigma_check_examples() {
        let d224 = CatalogModel::D224.pair();
        let r = sigma_check(&d224, &exact([0, 0, 0, 0])).unwrap();
        assert_eq!(r.certificate_value, 0.0);
        assert_eq!(r.growth.dims, [2, 2, 4]);
        assert!(!r.is_engel_by_growth && !r.disagreement());

        let r = sigma_check(&d224, &exact([0, 0, 0, 1])).unwrap();
        assert_eq!(r.certificate_value, 2.0);
        assert!(r.is_engel_by_growth && !r.disagreement());

        let r = sigma_check(&d224, &exact([0, 0, 1, 0])).unwrap();
        assert_eq!(r.certificate_value, 0.0);
        assert!(r.is_engel_by_growth);
        assert!(r.disagreement());
    }

    #[test]
    fn catalog_names_round_trip() {
        for m in CatalogModel::ALL {
            assert_eq!(CatalogModel::from_name(m.name()), Some(m));
        }
        assert_eq!(CatalogModel::from_name("D224"), Some(CatalogModel::D224));
        assert_eq!(CatalogModel::from_name("nope"), None);
    }
}
