//! The characteristic line field `C = cZ + eW` of a Pfaffian pair, built by
//! three independent routes:
//!
//! * `Printed`: the coefficient formula in its originally published form,
//!   whose `k` and `h` terms carry bare `f_zx, f_zy, g_zx, g_zy`.
//! * `Corrected`: the same formula with the `f`, `g` multipliers that the
//!   exterior-derivative expansion actually produces on those terms.
//! * `Oracle`: brackets. With `λ = g_z θ1 − f_z θ2` (which annihilates
//!   `D² = span{Z, W, [Z,W]}`), `c = −⟨λ, [W,[Z,W]]⟩` and
//!   `e = ⟨λ, [Z,[Z,W]]⟩`, so that `⟨λ, [C, [Z,W]]⟩ ≡ 0`.
//!
//! The oracle is authoritative downstream; the other two are kept so that
//! their agreement (or not) is observable.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::distribution::{frame, CatalogModel, PfaffianPair};
use crate::error::{Error, Result};
use crate::field::{lie_bracket, PolyVectorField};
use crate::poly::{rat, SparsePoly, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Printed,
    Corrected,
    Oracle,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Printed, Variant::Corrected, Variant::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Printed => "printed",
            Variant::Corrected => "corrected",
            Variant::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharCoefficients {
    pub c: SparsePoly,
    pub e: SparsePoly,
    pub variant: Variant,
}

/// `λ = λ1 θ1 + λ2 θ2` with `(λ1, λ2) = (g_z, −f_z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharCovector {
    pub lambda1: SparsePoly,
    pub lambda2: SparsePoly,
}

impl CharCovector {
    pub fn of(pair: &PfaffianPair) -> Self {
        CharCovector { lambda1: pair.g.diff(Var::Z), lambda2: -pair.f.diff(Var::Z) }
    }

    /// `λ1 V^x + λ2 V^y`. Only meaningful for fields without `∂z`, `∂w`
    /// components, which is what every bracket of the frame is.
    pub fn pair_xy(&self, v: &PolyVectorField) -> SparsePoly {
        &(&self.lambda1 * v.comp(Var::X)) + &(&self.lambda2 * v.comp(Var::Y))
    }
}

struct Partials {
    f: SparsePoly,
    g: SparsePoly,
    fx: SparsePoly,
    fy: SparsePoly,
    fz: SparsePoly,
    gx: SparsePoly,
    gy: SparsePoly,
    gz: SparsePoly,
    fzx: SparsePoly,
    fzy: SparsePoly,
    fzz: SparsePoly,
    fzw: SparsePoly,
    gzx: SparsePoly,
    gzy: SparsePoly,
    gzz: SparsePoly,
    gzw: SparsePoly,
}

impl Partials {
    fn of(pair: &PfaffianPair) -> Self {
        let fz = pair.f.diff(Var::Z);
        let gz = pair.g.diff(Var::Z);
        Partials {
            f: pair.f.clone(),
            g: pair.g.clone(),
            fx: pair.f.diff(Var::X),
            fy: pair.f.diff(Var::Y),
            gx: pair.g.diff(Var::X),
            gy: pair.g.diff(Var::Y),
            fzx: fz.diff(Var::X),
            fzy: fz.diff(Var::Y),
            fzz: fz.diff(Var::Z),
            fzw: fz.diff(Var::W),
            gzx: gz.diff(Var::X),
            gzy: gz.diff(Var::Y),
            gzz: gz.diff(Var::Z),
            gzw: gz.diff(Var::W),
            fz,
            gz,
        }
    }

    /// `e = f_z g_zz − g_z f_zz`, shared by the two formula variants.
    fn e(&self) -> SparsePoly {
        &self.fz * &self.gzz - &self.gz * &self.fzz
    }
}

/// Coefficients exactly as in the published statement:
/// `c = g_z·k + f_z·h` with
/// `k = f_zw − f_zy − f_zx + g_z f_y − f_z g_y + f_z f_x`,
/// `h = g_zy − g_zw + g_zx − f_z g_x`, and `e = f_z g_zz − g_z f_zz`.
pub fn coeffs_printed(pair: &PfaffianPair) -> CharCoefficients {
    let p = Partials::of(pair);
    let k = &p.fzw - &p.fzy - &p.fzx + &p.gz * &p.fy - &p.fz * &p.gy + &p.fz * &p.fx;
    let h = &p.gzy - &p.gzw + &p.gzx - &p.fz * &p.gx;
    let c = &p.gz * &k + &p.fz * &h;
    CharCoefficients { c, e: p.e(), variant: Variant::Printed }
}

/// `c = g_z·(f_zw − f f_zx − g f_zy + g_z f_y − f_z g_y + f_z f_x)
///    + f_z·(g g_zy − g_zw + f g_zx − f_z g_x)`, `e = f_z g_zz − g_z f_zz`.
pub fn coeffs_corrected(pair: &PfaffianPair) -> CharCoefficients {
    let p = Partials::of(pair);
    let k = &p.fzw - &p.f * &p.fzx - &p.g * &p.fzy + &p.gz * &p.fy - &p.fz * &p.gy + &p.fz * &p.fx;
    let h = &p.g * &p.gzy - &p.gzw + &p.f * &p.gzx - &p.fz * &p.gx;
    let c = &p.gz * &k + &p.fz * &h;
    CharCoefficients { c, e: p.e(), variant: Variant::Corrected }
}

/// Bracket route; fails if a second bracket of the frame picks up a `∂z`
/// or `∂w` component.
pub fn coeffs_oracle(pair: &PfaffianPair) -> Result<CharCoefficients> {
    let (z, w) = frame(pair);
    let zw = lie_bracket(&z, &w);
    let z_zw = lie_bracket(&z, &zw);
    let w_zw = lie_bracket(&w, &zw);
    for (name, b) in [("[Z,W]", &zw), ("[Z,[Z,W]]", &z_zw), ("[W,[Z,W]]", &w_zw)] {
        if !b.comp(Var::Z).is_zero() || !b.comp(Var::W).is_zero() {
            return Err(Error::Structural(format!("{} has a ∂z or ∂w component", name)));
        }
    }
    let lam = CharCovector::of(pair);
    let c = -lam.pair_xy(&w_zw);
    let e = lam.pair_xy(&z_zw);
    Ok(CharCoefficients { c, e, variant: Variant::Oracle })
}

pub fn coeffs(pair: &PfaffianPair, variant: Variant) -> Result<CharCoefficients> {
    match variant {
        Variant::Printed => Ok(coeffs_printed(pair)),
        Variant::Corrected => Ok(coeffs_corrected(pair)),
        Variant::Oracle => coeffs_oracle(pair),
    }
}

/// `cZ + eW` in coordinates: `(−e f, −e g, c, e)`.
pub fn assemble(pair: &PfaffianPair, k: &CharCoefficients) -> PolyVectorField {
    PolyVectorField::new(-(&k.e * &pair.f), -(&k.e * &pair.g), k.c.clone(), k.e.clone())
}

pub fn char_field(pair: &PfaffianPair, variant: Variant) -> Result<PolyVectorField> {
    Ok(assemble(pair, &coeffs(pair, variant)?))
}

/// The characteristic fields as displayed for the three degenerate normal
/// forms, transcribed term by term:
///
/// * `d224`:   `2z²w∂x + 2zw²∂y − 2z∂z − 2w∂w`
/// * `d2334a`: `−2zw∂x − 2z²w²∂y − 2z∂z + 2w∂w`
/// * `d2334b`: `−2z²∂x − 2(z⁴/3 + z²w²)∂y − 2w∂z + 2z∂w`
pub fn displayed_field(model: CatalogModel) -> Option<PolyVectorField> {
    let z = SparsePoly::var(Var::Z);
    let w = SparsePoly::var(Var::W);
    let k = |n: i64| SparsePoly::from_int(n);
    match model {
        CatalogModel::EngelStd => None,
        CatalogModel::D224 => Some(PolyVectorField::new(
            k(2) * &z * &z * &w,
            k(2) * &z * &w * &w,
            k(-2) * &z,
            k(-2) * &w,
        )),
        CatalogModel::D2334A => Some(PolyVectorField::new(
            k(-2) * &z * &w,
            k(-2) * &z * &z * &w * &w,
            k(-2) * &z,
            k(2) * &w,
        )),
        CatalogModel::D2334B => Some(PolyVectorField::new(
            k(-2) * &z * &z,
            k(-2) * (z.pow(4).scale(&rat(1, 3)) + &z * &z * &w * &w),
            k(-2) * &w,
            k(2) * &z,
        )),
    }
}

/// Exact comparison of two coefficient variants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantComparison {
    pub a: Variant,
    pub b: Variant,
    pub identical: bool,
    /// `c_a − c_b`
    pub discrepancy_c: SparsePoly,
    /// `e_a − e_b`
    pub discrepancy_e: SparsePoly,
    /// `c_a e_b − e_a c_b ≡ 0`: the two variants span the same line field.
    pub same_line: bool,
}

impl VariantComparison {
    pub fn between(a: &CharCoefficients, b: &CharCoefficients) -> Self {
        let discrepancy_c = &a.c - &b.c;
        let discrepancy_e = &a.e - &b.e;
        let same_line = (&a.c * &b.e - &a.e * &b.c).is_zero();
        VariantComparison {
            a: a.variant,
            b: b.variant,
            identical: discrepancy_c.is_zero() && discrepancy_e.is_zero(),
            discrepancy_c,
            discrepancy_e,
            same_line,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub printed: CharCoefficients,
    pub corrected: CharCoefficients,
    pub oracle: CharCoefficients,
    pub comparisons: Vec<VariantComparison>,
}

impl CrossCheck {
    fn find(&self, a: Variant, b: Variant) -> &VariantComparison {
        self.comparisons
            .iter()
            .find(|c| c.a == a && c.b == b)
            .expect("all variant pairs are compared")
    }

    pub fn corrected_matches_oracle(&self) -> bool {
        self.find(Variant::Corrected, Variant::Oracle).identical
    }

    pub fn printed_matches_oracle(&self) -> bool {
        self.find(Variant::Printed, Variant::Oracle).identical
    }

    pub fn printed_vs_oracle(&self) -> &VariantComparison {
        self.find(Variant::Printed, Variant::Oracle)
    }
}

pub fn cross_check(pair: &PfaffianPair) -> Result<CrossCheck> {
    let printed = coeffs_printed(pair);
    let corrected = coeffs_corrected(pair);
    let oracle = coeffs_oracle(pair)?;
    let comparisons = alloc::vec![
        VariantComparison::between(&corrected, &oracle),
        VariantComparison::between(&printed, &oracle),
        VariantComparison::between(&printed, &corrected),
    ];
    Ok(CrossCheck { printed, corrected, oracle, comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::random_pair;
    use crate::field::field_difference;
    use crate::poly::Point4;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z() -> SparsePoly {
        SparsePoly::var(Var::Z)
    }
    fn w() -> SparsePoly {
        SparsePoly::var(Var::W)
    }
    fn k(n: i64) -> SparsePoly {
        SparsePoly::from_int(n)
    }

    #[test]
    fn printed_coefficients_on_catalog() {
        let a = coeffs_printed(&CatalogModel::D2334A.pair());
        assert_eq!((a.c, a.e), (k(-2) * z(), k(2) * w()));
        let b = coeffs_printed(&CatalogModel::D2334B.pair());
        assert_eq!((b.c, b.e), (k(-2) * w(), k(2) * z()));
        let d = coeffs_printed(&CatalogModel::D224.pair());
        assert_eq!((d.c, d.e), (k(-2) * z(), k(-2) * w()));
    }

    #[test]
    fn oracle_coefficients_on_catalog() {
        // [Z,[Z,W]] = −2∂x and [W,[Z,W]] = −∂y for d224
        let pair = CatalogModel::D224.pair();
        let (zf, wf) = frame(&pair);
        let zw = lie_bracket(&zf, &wf);
        assert_eq!(lie_bracket(&zf, &zw), PolyVectorField::coordinate(Var::X).scale(&k(-2)));
        assert_eq!(lie_bracket(&wf, &zw), PolyVectorField::coordinate(Var::Y).neg());
        let o = coeffs_oracle(&pair).unwrap();
        assert_eq!((o.c, o.e), (k(-2) * z(), k(-2) * w()));

        let o = coeffs_oracle(&CatalogModel::D2334B.pair()).unwrap();
        assert_eq!((o.c, o.e), (k(-2) * w(), k(2) * z()));

        let o = coeffs_oracle(&CatalogModel::EngelStd.pair()).unwrap();
        assert_eq!((o.c, o.e), (k(0), k(1)));
    }

    #[test]
    fn corrected_coefficients_examples() {
        let d = coeffs_corrected(&CatalogModel::D224.pair());
        assert_eq!((d.c, d.e), (k(-2) * z(), k(-2) * w()));
        let a = coeffs_corrected(&CatalogModel::D2334A.pair());
        assert_eq!((a.c, a.e), (k(-2) * z(), k(2) * w()));
        let zero = coeffs_corrected(&PfaffianPair::new(SparsePoly::zero(), SparsePoly::zero()));
        assert!(zero.c.is_zero() && zero.e.is_zero());
    }

    #[test]
    fn oracle_fields_match_displays() {
        for m in CatalogModel::DEGENERATE {
            let c = char_field(&m.pair(), Variant::Oracle).unwrap();
            assert_eq!(Some(c), displayed_field(m), "{}", m);
        }
    }

    #[test]
    fn d224_field_value() {
        let c = char_field(&CatalogModel::D224.pair(), Variant::Oracle).unwrap();
        assert_eq!(c.eval(&Point4::new(0.0, 0.0, 1.0, 1.0)), [2.0, 2.0, -2.0, -2.0]);
        let shown = displayed_field(CatalogModel::D224).unwrap();
        assert_eq!(shown.eval(&Point4::new(0.0, 0.0, 1.0, 1.0)), [2.0, 2.0, -2.0, -2.0]);
    }

    #[test]
    fn engel_std_field_is_w() {
        let pair = CatalogModel::EngelStd.pair();
        let c = char_field(&pair, Variant::Oracle).unwrap();
        assert_eq!(c, frame(&pair).1);
    }

    #[test]
    fn cross_check_catalog() {
        for m in CatalogModel::ALL {
            let r = cross_check(&m.pair()).unwrap();
            assert!(r.corrected_matches_oracle(), "{}", m);
            // catalog pairs do not depend on x, y so the bare terms vanish
            assert!(r.printed_matches_oracle(), "{}", m);
        }
    }

    #[test]
    fn printed_differs_when_f_depends_on_x() {
        // f = xz: the printed k drops the f multiplier on f_zx
        let x = SparsePoly::var(Var::X);
        let pair = PfaffianPair::new(&x * &z(), &z() * &z());
        let r = cross_check(&pair).unwrap();
        assert!(r.corrected_matches_oracle());
        assert!(!r.printed_matches_oracle());
        let d = r.printed_vs_oracle();
        assert!(d.discrepancy_e.is_zero());
        assert!(!d.discrepancy_c.is_zero());
    }

    #[test]
    fn corrected_equals_oracle_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let pair = random_pair(&mut rng, 3);
            let r = cross_check(&pair).unwrap();
            assert!(r.corrected_matches_oracle(), "{:?}", pair);
        }
    }

    #[test]
    fn covector_annihilates_first_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let pair = random_pair(&mut rng, 3);
            let (zf, wf) = frame(&pair);
            let zw = lie_bracket(&zf, &wf);
            assert!(CharCovector::of(&pair).pair_xy(&zw).is_zero());
        }
    }

    #[test]
    fn fields_are_horizontal_and_vanish_on_sigma() {
        for m in CatalogModel::ALL {
            let pair = m.pair();
            for v in Variant::ALL {
                let c = char_field(&pair, v).unwrap();
                assert!(pair.is_horizontal(&c));
                if m != CatalogModel::EngelStd {
                    for comp in &c.comps {
                        assert!(comp.restrict_zero(&[Var::Z, Var::W]).is_zero());
                    }
                }
            }
        }
        assert!(field_difference(&PolyVectorField::zero(), &PolyVectorField::zero()).is_empty());
    }
}
