//! Polynomial vector fields on the chart and their Lie brackets.

use alloc::vec::Vec;

use crate::poly::{CompiledPoly, Point4, RationalPoint, Rational, SparsePoly, Var};

/// Vector field with polynomial components in the coordinate frame
/// `(∂x, ∂y, ∂z, ∂w)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    pub comps: [SparsePoly; 4],
}

impl PolyVectorField {
    pub fn new(cx: SparsePoly, cy: SparsePoly, cz: SparsePoly, cw: SparsePoly) -> Self {
        PolyVectorField { comps: [cx, cy, cz, cw] }
    }

    pub fn zero() -> Self {
        PolyVectorField::default()
    }

    /// The coordinate field `∂v`.
    pub fn coordinate(v: Var) -> Self {
        let mut f = PolyVectorField::zero();
        f.comps[v.index()] = SparsePoly::one();
        f
    }

    pub fn comp(&self, v: Var) -> &SparsePoly {
        &self.comps[v.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(SparsePoly::is_zero)
    }

    pub fn add(&self, other: &PolyVectorField) -> PolyVectorField {
        PolyVectorField { comps: core::array::from_fn(|i| &self.comps[i] + &other.comps[i]) }
    }

    pub fn sub(&self, other: &PolyVectorField) -> PolyVectorField {
        PolyVectorField { comps: core::array::from_fn(|i| &self.comps[i] - &other.comps[i]) }
    }

    pub fn neg(&self) -> PolyVectorField {
        PolyVectorField { comps: core::array::from_fn(|i| -&self.comps[i]) }
    }

    /// Multiplication by a polynomial function.
    pub fn scale(&self, p: &SparsePoly) -> PolyVectorField {
        PolyVectorField { comps: core::array::from_fn(|i| &self.comps[i] * p) }
    }

    /// Derivative of `p` along the field, `Σ V^i ∂_i p`.
    pub fn lie_derivative(&self, p: &SparsePoly) -> SparsePoly {
        let mut acc = SparsePoly::zero();
        for v in Var::ALL {
            let c = &self.comps[v.index()];
            if c.is_zero() {
                continue;
            }
            acc = &acc + &(c * &p.diff(v));
        }
        acc
    }

    pub fn eval(&self, q: &Point4) -> [f64; 4] {
        core::array::from_fn(|i| self.comps[i].eval(q))
    }

    pub fn eval_exact(&self, q: &RationalPoint) -> [Rational; 4] {
        core::array::from_fn(|i| self.comps[i].eval_exact(q))
    }

    pub fn compile(&self) -> CompiledField {
        CompiledField::new(self)
    }
}

/// Coordinate Lie bracket `[a, b]^i = Σ_j (a^j ∂_j b^i − b^j ∂_j a^i)`.
pub fn lie_bracket(a: &PolyVectorField, b: &PolyVectorField) -> PolyVectorField {
    let comps = core::array::from_fn(|i| {
        let lhs = a.lie_derivative(&b.comps[i]);
        let rhs = b.lie_derivative(&a.comps[i]);
        &lhs - &rhs
    });
    PolyVectorField { comps }
}

/// Float evaluation of a field together with its Jacobian `∂V^i/∂q^j`.
#[derive(Clone, Debug)]
pub struct CompiledField {
    comps: [CompiledPoly; 4],
    jac: [[CompiledPoly; 4]; 4],
}

impl CompiledField {
    pub fn new(f: &PolyVectorField) -> Self {
        CompiledField {
            comps: core::array::from_fn(|i| f.comps[i].compile()),
            jac: core::array::from_fn(|i| {
                core::array::from_fn(|j| f.comps[i].diff(Var::from_index(j)).compile())
            }),
        }
    }

    #[inline]
    pub fn eval(&self, q: &[f64; 4]) -> [f64; 4] {
        core::array::from_fn(|i| self.comps[i].eval(q))
    }

    #[inline]
    pub fn jacobian(&self, q: &[f64; 4]) -> [[f64; 4]; 4] {
        core::array::from_fn(|i| core::array::from_fn(|j| self.jac[i][j].eval(q)))
    }
}

/// Components on which `a` and `b` differ, with the exact difference `a − b`.
pub fn field_difference(a: &PolyVectorField, b: &PolyVectorField) -> Vec<(Var, SparsePoly)> {
    Var::ALL
        .iter()
        .filter_map(|&v| {
            let d = a.comp(v) - b.comp(v);
            if d.is_zero() {
                None
            } else {
                Some((v, d))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_fields_commute() {
        let b = lie_bracket(&PolyVectorField::coordinate(Var::Z), &PolyVectorField::coordinate(Var::W));
        assert!(b.is_zero());
    }

    #[test]
    fn bracket_of_linear_fields() {
        // [z∂x, ∂z] = −∂x
        let a = PolyVectorField::coordinate(Var::X).scale(&SparsePoly::var(Var::Z));
        let b = PolyVectorField::coordinate(Var::Z);
        let br = lie_bracket(&a, &b);
        assert_eq!(br, PolyVectorField::coordinate(Var::X).neg());
    }

    #[test]
    fn compiled_field_matches_exact() {
        let z = SparsePoly::var(Var::Z);
        let w = SparsePoly::var(Var::W);
        let f = PolyVectorField::new(&z * &w, &z * &z, w.clone(), SparsePoly::from_int(3));
        let c = f.compile();
        let q = [0.3, -0.2, 0.7, 1.1];
        let v = c.eval(&q);
        let e = f.eval(&Point4::from_array(q));
        for i in 0..4 {
            assert!((v[i] - e[i]).abs() < 1e-15);
        }
        let j = c.jacobian(&q);
        assert!((j[0][2] - 1.1).abs() < 1e-15);
        assert!((j[1][2] - 1.4).abs() < 1e-15);
        assert_eq!(j[3][3], 0.0);
    }
}
