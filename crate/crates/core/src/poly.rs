//! Exact sparse polynomials in the chart coordinates `(x, y, z, w)`.
//!
//! Coefficients are arbitrary-precision rationals and every operation returns
//! a canonical term map (no stored zero coefficients), so two polynomials are
//! equal exactly when their term maps are equal.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational scalar.
pub type Rational = BigRational;

/// Exponent tuple in the fixed order `(x, y, z, w)`.
pub type Exponent = [u32; 4];

/// One of the four chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    Z,
    W,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::Z, Var::W];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::W => "w",
        }
    }
}

/// A point of the chart with floating coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point4 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Point4 {
    pub const ORIGIN: Point4 = Point4 { x: 0.0, y: 0.0, z: 0.0, w: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Point4 { x, y, z, w }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Point4::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// `z² + w²`, the squared distance to the surface `z = w = 0`.
    pub fn rho(&self) -> f64 {
        self.z * self.z + self.w * self.w
    }

    pub fn dist(&self, other: &Point4) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        let s: f64 = a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
        num_traits::Float::sqrt(s)
    }
}

/// A point with exact rational coordinates, used for exact rank computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint(pub [Rational; 4]);

impl RationalPoint {
    pub fn origin() -> Self {
        RationalPoint(core::array::from_fn(|_| Rational::zero()))
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        RationalPoint(c.map(|v| Rational::from_integer(BigInt::from(v))))
    }

    /// Every finite float is a dyadic rational; this conversion is exact.
    pub fn from_point(p: &Point4) -> Option<Self> {
        let mut out: [Rational; 4] = core::array::from_fn(|_| Rational::zero());
        for (slot, v) in out.iter_mut().zip(p.to_array()) {
            *slot = Rational::from_float(v)?;
        }
        Some(RationalPoint(out))
    }

    pub fn to_point(&self) -> Point4 {
        Point4::from_array(core::array::from_fn(|i| rational_to_f64(&self.0[i])))
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, integers, and plain or exponent decimal literals
/// (`"-0.25"`, `"1e-3"`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(String::from(s));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut all = String::from(int_part);
    all.push_str(frac_part);
    let n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Exact multivariate polynomial over the rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    terms: BTreeMap<Exponent, Rational>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        SparsePoly::default()
    }

    pub fn one() -> Self {
        SparsePoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        SparsePoly::monomial(c, [0; 4])
    }

    pub fn from_int(c: i64) -> Self {
        SparsePoly::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 4];
        e[v.index()] = 1;
        SparsePoly::monomial(Rational::one(), e)
    }

    pub fn monomial(c: Rational, exp: Exponent) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        SparsePoly { terms }
    }

    /// Builds a polynomial from possibly repeated, possibly zero terms.
    pub fn from_terms<I: IntoIterator<Item = (Rational, Exponent)>>(iter: I) -> Self {
        let mut p = SparsePoly::zero();
        for (c, e) in iter {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&e) {
            Some(slot) => {
                *slot += c;
                slot.is_zero()
            }
            None => {
                self.terms.insert(e, c);
                false
            }
        };
        if remove {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.terms.keys().any(|e| e[v.index()] > 0)
    }

    pub fn scale(&self, c: &Rational) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero();
        }
        SparsePoly { terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> SparsePoly {
        let mut acc = SparsePoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> SparsePoly {
        let i = v.index();
        let mut out = SparsePoly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = *e;
            ne[i] -= 1;
            out.add_term(ne, c * Rational::from_integer(BigInt::from(e[i])));
        }
        out
    }

    /// Substitutes zero for every variable in `vars`.
    pub fn restrict_zero(&self, vars: &[Var]) -> SparsePoly {
        SparsePoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| vars.iter().all(|v| e[v.index()] == 0))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn eval_exact(&self, q: &RationalPoint) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (k, &p) in e.iter().enumerate() {
                if p > 0 {
                    t *= num_traits::pow(q.0[k].clone(), p as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Value at a float point. The point is converted exactly to rationals,
    /// the sum is formed exactly and rounded once at the end.
    pub fn eval(&self, q: &Point4) -> f64 {
        match RationalPoint::from_point(q) {
            Some(rq) => rational_to_f64(&self.eval_exact(&rq)),
            None => f64::NAN,
        }
    }

    /// Float-coefficient copy for hot evaluation loops.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        SparsePoly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for SparsePoly {
            type Output = SparsePoly;
            fn $m(self, rhs: SparsePoly) -> SparsePoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&SparsePoly> for SparsePoly {
            type Output = SparsePoly;
            fn $m(self, rhs: &SparsePoly) -> SparsePoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<SparsePoly> for &SparsePoly {
            type Output = SparsePoly;
            fn $m(self, rhs: SparsePoly) -> SparsePoly {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        -&self
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        // highest total degree first
        let mut terms: Vec<(&Exponent, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let is_const = e.iter().all(|&p| p == 0);
            let mut first = true;
            if !mag.is_one() || is_const {
                write!(f, "{}", mag)?;
                first = false;
            }
            for v in Var::ALL {
                let p = e[v.index()];
                if p == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                f.write_str(v.name())?;
                if p > 1 {
                    write!(f, "^{}", p)?;
                }
            }
        }
        Ok(())
    }
}

/// Float-coefficient polynomial. Coefficients are the correctly rounded
/// values of the exact ones.
#[derive(Clone, Debug, Default)]
pub struct CompiledPoly {
    terms: Vec<(f64, Exponent)>,
    max_exp: [u32; 4],
}

impl CompiledPoly {
    pub fn new(p: &SparsePoly) -> Self {
        let mut max_exp = [0u32; 4];
        let terms = p
            .terms()
            .map(|(e, c)| {
                for k in 0..4 {
                    max_exp[k] = max_exp[k].max(e[k]);
                }
                (rational_to_f64(c), *e)
            })
            .collect();
        CompiledPoly { terms, max_exp }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, q: &[f64; 4]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        // power tables; catalog degrees stay tiny
        let mut pows = [[1.0f64; 8]; 4];
        let small = self.max_exp.iter().all(|&m| m < 8);
        if small {
            for k in 0..4 {
                for p in 1..=self.max_exp[k] as usize {
                    pows[k][p] = pows[k][p - 1] * q[k];
                }
            }
        }
        let mut acc = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for k in 0..4 {
                if e[k] > 0 {
                    t *= if small { pows[k][e[k] as usize] } else { ipow(q[k], e[k]) };
                }
            }
            acc += t;
        }
        acc
    }
}

fn ipow(mut b: f64, mut e: u32) -> f64 {
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}
