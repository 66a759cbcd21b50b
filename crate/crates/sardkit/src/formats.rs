//! File formats: the JSON polynomial encoding, user model files, CSV with
//! comment headers, and control files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use sardkit_core::endpoint::ControlPath;
use sardkit_core::poly::{parse_rational, Exponent};
use sardkit_core::{PfaffianPair, Point4, Rational, SparsePoly};
use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL: &str = "sardkit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("polynomial JSON: {0}")]
    Poly(String),
    #[error("model file: {0}")]
    Model(String),
    #[error("control file line {line}: {msg}")]
    Control { line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {what} '{text}'")]
    Value { what: &'static str, text: String },
}

fn coef_to_json(c: &Rational) -> Value {
    if c.denom().is_one() {
        if let Some(v) = c.numer().to_i64() {
            return json!(v);
        }
    }
    Value::String(format!("{}/{}", c.numer(), c.denom()))
}

/// `[[coef, [ex, ey, ez, ew]], …]` in lexicographic exponent order.
pub fn poly_to_json(p: &SparsePoly) -> Value {
    Value::Array(p.terms().map(|(e, c)| json!([coef_to_json(c), e])).collect())
}

fn coef_from_json(v: &Value) -> Result<Rational, FormatError> {
    match v {
        // the shortest decimal form of the number, read as an exact decimal
        Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| FormatError::Poly(e.to_string())),
        Value::String(s) => parse_rational(s).map_err(|e| FormatError::Poly(e.to_string())),
        other => Err(FormatError::Poly(format!("coefficient must be a number or \"p/q\", got {other}"))),
    }
}

pub fn poly_from_json(v: &Value) -> Result<SparsePoly, FormatError> {
    let terms = v.as_array().ok_or_else(|| FormatError::Poly("expected a list of terms".into()))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(|| FormatError::Poly(format!("bad term {t}")))?;
        let c = coef_from_json(&pair[0])?;
        let ex = pair[1]
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| FormatError::Poly(format!("exponent must have four entries: {}", pair[1])))?;
        let mut e: Exponent = [0; 4];
        for (slot, x) in e.iter_mut().zip(ex) {
            *slot = x
                .as_u64()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| FormatError::Poly(format!("exponent must be a non-negative integer: {x}")))?;
        }
        out.push((c, e));
    }
    Ok(SparsePoly::from_terms(out))
}

pub fn pair_to_json(p: &PfaffianPair) -> Value {
    json!({"f": poly_to_json(&p.f), "g": poly_to_json(&p.g)})
}

pub fn pair_from_json(v: &Value) -> Result<PfaffianPair, FormatError> {
    let get = |k: &str| v.get(k).ok_or_else(|| FormatError::Model(format!("missing key \"{k}\"")));
    Ok(PfaffianPair::new(poly_from_json(get("f")?)?, poly_from_json(get("g")?)?))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Read { path: path.display().to_string(), source })
}

pub fn load_pair(path: &Path) -> Result<PfaffianPair, FormatError> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| FormatError::Model(e.to_string()))?;
    pair_from_json(&v)
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Provenance recorded at the top of every output file.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub model: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
}

impl Meta {
    pub fn new(command: &str, model: &str, seed: u64) -> Self {
        Meta { tool: TOOL, version: VERSION, command: command.into(), model: model.into(), seed, params: BTreeMap::new() }
    }

    pub fn param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.insert(k.into(), v.to_string());
        self
    }

    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}", self.tool, self.version);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# model: {}", self.model);
        let _ = writeln!(s, "# seed: {}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }
}

/// CSV text with a comment header, a column row and formatted rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(meta: &Meta, columns: &[&str]) -> Self {
        let mut text = meta.csv_header();
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// JSON document whose first key is `meta`.
pub fn json_with_meta<T: Serialize>(meta: &Meta, body: &T) -> serde_json::Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, T: Serialize> {
        meta: &'a Meta,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { meta, body })?;
    s.push('\n');
    Ok(s)
}

/// A decimal, or a quotient of two decimals such as `-0.001/3`.
fn parse_entry(s: &str) -> Option<Rational> {
    if let Ok(r) = parse_rational(s) {
        return Some(r);
    }
    let (a, b) = s.split_once('/')?;
    let (a, b) = (parse_rational(a.trim()).ok()?, parse_rational(b.trim()).ok()?);
    (!num_traits::Zero::is_zero(&b)).then(|| a / b)
}

pub fn parse_point(s: &str) -> Result<[Rational; 4], FormatError> {
    let bad = || FormatError::Value { what: "point", text: s.into() };
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let mut out: [Rational; 4] = std::array::from_fn(|_| Rational::from_integer(BigInt::from(0)));
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = parse_entry(p.trim()).ok_or_else(bad)?;
    }
    Ok(out)
}

pub fn parse_point_f64(s: &str) -> Result<Point4, FormatError> {
    let r = parse_point(s)?;
    Ok(Point4::from_array(std::array::from_fn(|i| sardkit_core::poly::rational_to_f64(&r[i]))))
}

/// `lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, usize), FormatError> {
    let bad = || FormatError::Value { what: "grid (lo:hi:n)", text: s.into() };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || n == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

/// One `u1,u2` pair per line; `#` starts a comment.
pub fn parse_control(text: &str) -> Result<ControlPath, FormatError> {
    let mut u = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("u1") {
            continue;
        }
        let err = |msg: &str| FormatError::Control { line: i + 1, msg: msg.into() };
        let mut it = line.split(',').map(str::trim);
        let a: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("expected u1,u2"))?;
        let b: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("expected u1,u2"))?;
        if it.next().is_some() {
            return Err(err("expected exactly two values"));
        }
        u.push((a, b));
    }
    ControlPath::new(u).map_err(|e| FormatError::Control { line: 0, msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sardkit_core::poly::rat;
    use sardkit_core::{CatalogModel, Var};

    #[test]
    fn poly_round_trip() {
        for m in CatalogModel::ALL {
            let p = m.pair();
            let back = pair_from_json(&pair_to_json(&p)).unwrap();
            assert_eq!(back, p);
        }
        let g = CatalogModel::D2334B.pair().g;
        let v = poly_to_json(&g);
        assert_eq!(v, json!([[1, [0, 0, 1, 2]], ["1/3", [0, 0, 3, 0]]]));
    }

    #[test]
    fn decimal_coefficients_are_exact() {
        let p = poly_from_json(&json!([[0.5, [0, 0, 2, 0]], ["-3/4", [0, 0, 0, 1]]])).unwrap();
        assert_eq!(p.coeff(&[0, 0, 2, 0]), rat(1, 2));
        assert_eq!(p.coeff(&[0, 0, 0, 1]), rat(-3, 4));
        let q = poly_from_json(&json!([[0.1, [1, 0, 0, 0]]])).unwrap();
        assert_eq!(q, SparsePoly::var(Var::X).scale(&rat(1, 10)));
    }

    #[test]
    fn rejects_malformed_polys() {
        assert!(poly_from_json(&json!({"a": 1})).is_err());
        assert!(poly_from_json(&json!([[1, [0, 0, 1]]])).is_err());
        assert!(poly_from_json(&json!([[1, [0, 0, -1, 0]]])).is_err());
        assert!(poly_from_json(&json!([["1/0", [0, 0, 1, 0]]])).is_err());
        assert!(pair_from_json(&json!({"f": []})).is_err());
    }

    #[test]
    fn numbers_have_17_digits() {
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(num(0.0), "0.0000000000000000e0");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn parses_inputs() {
        assert_eq!(parse_point("0,0,1/2,1").unwrap()[2], rat(1, 2));
        assert!(parse_point("0,0,1").is_err());
        assert_eq!(parse_point("-0.001/3,0,0,0").unwrap()[0], rat(-1, 3000));
        assert!(parse_point("1/0,0,0,0").is_err());
        assert_eq!(parse_grid("0.01:0.2:20").unwrap(), (0.01, 0.2, 20));
        assert!(parse_grid("1:0:3").is_err());
        let c = parse_control("# header\nu1,u2\n0,1\n1, -0.5 # tail\n").unwrap();
        assert_eq!(c.segments(), &[(0.0, 1.0), (1.0, -0.5)]);
        assert!(parse_control("1\n").is_err());
        assert!(parse_control("").is_err());
    }

    #[test]
    fn header_lists_parameters() {
        let m = Meta::new("flow", "d224", 7).param("t", 10).param("rtol", 1e-10);
        let h = m.csv_header();
        assert!(h.starts_with("# sardkit "));
        assert!(h.contains("# seed: 7\n"));
        assert!(h.contains("# rtol: 0.0000000001\n"));
    }
}
