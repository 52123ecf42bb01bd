//! Exact evaluation of the `j`-map of `X_20b` and a height-bounded search for
//! rational points over given `j`-invariants.
//!
//! `j(t) = N(t) / (t + 1)^4` with
//! `N(t) = -4t^8 + 32t^7 + 80t^6 - 288t^5 - 504t^4 + 864t^3 + 1296t^2 - 864t - 1188`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Numerator coefficients, constant term first.
const NUM: [i64; 9] = [-1188, -864, 1296, 864, -504, -288, 80, 32, -4];
/// Denominator coefficients `(t + 1)^4`, constant term first.
const DEN: [i64; 5] = [1, 4, 6, 4, 1];

/// Homogenised value `sum c_i a^i b^(deg - i)`.
fn homogeneous(coeffs: &[i64], a: &BigInt, b: &BigInt) -> BigInt {
    let deg = coeffs.len() - 1;
    let mut acc = BigInt::zero();
    for (i, &c) in coeffs.iter().enumerate() {
        acc += BigInt::from(c) * num_traits::pow(a.clone(), i) * num_traits::pow(b.clone(), deg - i);
    }
    acc
}

/// `j(t)` as an exact rational; fails with `Pole` at `t = -1`.
pub fn j_of_t(t: &Rational) -> Result<Rational> {
    let (a, b) = (t.numer(), t.denom());
    let den = homogeneous(&DEN, a, b);
    if den.is_zero() {
        return Err(Error::Pole(format_rational(t)));
    }
    let num = homogeneous(&NUM, a, b);
    // N(a/b) = num / b^8, D(a/b) = den / b^4
    Ok(Rational::new(num, den * num_traits::pow(b.clone(), 4)))
}

/// Parses `a/b` or `a`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::MalformedRecord(format!("cannot parse rational {s:?}"));
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// All reduced `t = a/b` with `|a| <= h` and `1 <= b <= h`, in order of
/// `(b, a)`.
pub fn rationals_of_height(h: u64) -> Vec<Rational> {
    let h = h as i64;
    let mut out = Vec::new();
    for b in 1..=h {
        for a in -h..=h {
            if a.gcd(&b) == 1 || (a == 0 && b == 1) {
                out.push(Rational::new(BigInt::from(a), BigInt::from(b)));
            }
        }
    }
    out
}

/// For each target `j`, the parameters `t` of height at most `h` with
/// `j(t) = target`, sorted by `(denominator, numerator)`.
pub fn search_preimages(targets: &[Rational], h: u64) -> BTreeMap<Rational, Vec<Rational>> {
    let mut out: BTreeMap<Rational, Vec<Rational>> =
        targets.iter().map(|t| (t.clone(), Vec::new())).collect();
    for t in rationals_of_height(h) {
        if let Ok(j) = j_of_t(&t) {
            if let Some(v) = out.get_mut(&j) {
                v.push(t);
            }
        }
    }
    out
}

/// `j`-invariants of the elliptic curves over `Q` with complex
/// multiplication, as shipped in `data/cm_j_invariants.json`.
pub fn default_cm_j_invariants() -> Vec<Rational> {
    let text = include_str!("../data/cm_j_invariants.json");
    let v: serde_json::Value = serde_json::from_str(text).expect("bundled data parses");
    v["j_invariants"]
        .as_array()
        .expect("j_invariants array")
        .iter()
        .map(|x| parse_rational(x.as_str().expect("string entries")).expect("valid rational"))
        .collect()
}

pub fn is_integral(r: &Rational) -> bool {
    r.denom() == &BigInt::from(1)
}

pub fn abs_height(r: &Rational) -> BigInt {
    r.numer().abs().max(r.denom().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn small_values() {
        assert_eq!(j_of_t(&q("0")).unwrap(), q("-1188"));
        assert_eq!(j_of_t(&q("1")).unwrap(), q("-36"));
        assert!(matches!(j_of_t(&q("-1")), Err(Error::Pole(_))));
        assert!(matches!(j_of_t(&q("-2/2")), Err(Error::Pole(_))));
    }

    #[test]
    fn matches_direct_polynomial_evaluation() {
        // independent evaluation with plain rational arithmetic
        for s in ["1/2", "-3/7", "5", "11/13"] {
            let t = q(s);
            let mut n = Rational::zero();
            let mut pw = Rational::from_integer(BigInt::from(1));
            for c in NUM {
                n += Rational::from_integer(BigInt::from(c)) * pw.clone();
                pw *= t.clone();
            }
            let one = Rational::from_integer(BigInt::from(1));
            let d = num_traits::pow(t.clone() + one, 4);
            assert_eq!(j_of_t(&t).unwrap(), n / d);
        }
    }

    #[test]
    fn parameter_enumeration() {
        let ts = rationals_of_height(2);
        let shown: Vec<String> = ts.iter().map(format_rational).collect();
        assert_eq!(shown, ["-2", "-1", "0", "1", "2", "-1/2", "1/2"]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&q("6/4")), "3/2");
    }

    #[test]
    fn bundled_cm_list() {
        let v = default_cm_j_invariants();
        assert_eq!(v.len(), 13);
        assert!(v.contains(&q("1728")) && v.contains(&q("0")));
    }
}
