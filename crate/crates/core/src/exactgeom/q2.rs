//! Exact elements `a + b·√2` of the quadratic field ℚ(√2).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact number `a + b·√2` with unbounded rational parts.
///
/// `BigRational` keeps both parts reduced with a positive denominator, so the
/// derived structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Q2 {
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Q2 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Q2 { a, b }
    }

    /// `an/ad + (bn/bd)·√2` from machine integers.
    pub fn from_ratios(an: i64, ad: i64, bn: i64, bd: i64) -> Self {
        Q2::new(rat(an, ad), rat(bn, bd))
    }

    pub fn from_int(n: i64) -> Self {
        Q2::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Q2::new(r, BigRational::zero())
    }

    pub fn sqrt2() -> Self {
        Q2::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        Q2::default()
    }

    pub fn one() -> Self {
        Q2::from_int(1)
    }

    /// Rational part.
    pub fn a(&self) -> &BigRational {
        &self.a
    }

    /// Coefficient of √2.
    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a − b·√2`.
    pub fn conjugate(&self) -> Q2 {
        Q2::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm `a² − 2b²`, the product with the conjugate.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(2.into()) * &self.b * &self.b
    }

    /// Exact sign of `a + b·√2` in {-1, 0, +1}.
    ///
    /// When the parts disagree in sign the answer is decided by comparing
    /// `a²` against `2b²`.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sa >= 0 && sb >= 0 {
            return (sa + sb).signum();
        }
        if sa <= 0 && sb <= 0 {
            return -1;
        }
        let a2 = &self.a * &self.a;
        let b2 = BigRational::from_integer(2.into()) * &self.b * &self.b;
        match a2.cmp(&b2) {
            Ordering::Equal => 0,
            Ordering::Greater => sa,
            Ordering::Less => sb,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Q2> {
        if self.is_zero() {
            return None;
        }
        // a² − 2b² ≠ 0 for nonzero elements since √2 is irrational.
        let n = self.norm();
        Some(Q2::new(&self.a / &n, -(&self.b / &n)))
    }

    pub fn checked_div(&self, rhs: &Q2) -> Option<Q2> {
        rhs.inverse().map(|inv| self * &inv)
    }

    /// Total order by real value.
    pub fn cmp_value(&self, other: &Q2) -> Ordering {
        (self - other).signum().cmp(&0)
    }

    /// Lexicographic order on the pair (rational part, √2 coefficient).
    ///
    /// This is a structural order used only for canonical sorting; it is not
    /// the order of the real line.
    pub fn cmp_parts(&self, other: &Q2) -> Ordering {
        self.a.cmp(&other.a).then_with(|| self.b.cmp(&other.b))
    }

    /// Floating-point approximation for display and tolerance checks.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// `⌊self · 2^bits⌋` computed exactly.
    pub fn floor_scaled(&self, bits: u32) -> BigInt {
        let scale = BigInt::one() << bits;
        let d = self.a.denom() * self.b.denom();
        // self · 2^bits = (p + q√2) / d with integers p, q.
        let p = self.a.numer() * self.b.denom() * &scale;
        let q = self.b.numer() * self.a.denom() * &scale;
        let two_q2: BigInt = BigInt::from(2) * &q * &q;
        let root = two_q2.sqrt();
        let approx = if q.is_negative() { &p - &root - 1 } else { &p + &root };
        let mut m = num_integer::Integer::div_floor(&approx, &d);
        let target = self * &Q2::from_rational(BigRational::from_integer(scale));
        // The estimate is within one of the true floor; settle it exactly.
        while Q2::from_rational(BigRational::from_integer(m.clone())).cmp_value(&target) == Ordering::Greater {
            m -= 1;
        }
        while Q2::from_rational(BigRational::from_integer(&m + 1)).cmp_value(&target) != Ordering::Greater {
            m += 1;
        }
        m
    }
}

fn sign_of(r: &BigRational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl From<i64> for Q2 {
    fn from(n: i64) -> Self {
        Q2::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a Q2> for &'a Q2 {
            type Output = Q2;
            fn $method(self, rhs: &'a Q2) -> Q2 {
                let f: fn(&Q2, &Q2) -> Q2 = $body;
                f(self, rhs)
            }
        }
        impl $tr<Q2> for Q2 {
            type Output = Q2;
            fn $method(self, rhs: Q2) -> Q2 {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Q2> for Q2 {
            type Output = Q2;
            fn $method(self, rhs: &'a Q2) -> Q2 {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |l, r| Q2::new(&l.a + &r.a, &l.b + &r.b));
forward_binop!(Sub, sub, |l, r| Q2::new(&l.a - &r.a, &l.b - &r.b));
forward_binop!(Mul, mul, |l, r| {
    let two = BigRational::from_integer(2.into());
    Q2::new(&l.a * &r.a + two * &l.b * &r.b, &l.a * &r.b + &l.b * &r.a)
});

impl Neg for Q2 {
    type Output = Q2;
    fn neg(self) -> Q2 {
        Q2::new(-self.a, -self.b)
    }
}

impl Neg for &Q2 {
    type Output = Q2;
    fn neg(self) -> Q2 {
        Q2::new(-self.a.clone(), -self.b.clone())
    }
}

impl std::iter::Sum for Q2 {
    fn sum<I: Iterator<Item = Q2>>(iter: I) -> Q2 {
        iter.fold(Q2::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Q2> for Q2 {
    fn sum<I: Iterator<Item = &'a Q2>>(iter: I) -> Q2 {
        iter.fold(Q2::zero(), |acc, x| acc + x)
    }
}

/// Serialized as `p/q+r/s*sqrt2`, dropping a zero term; zero is `0`.
impl fmt::Display for Q2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt2", self.b),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{}-{}*sqrt2", self.a, -self.b.clone())
                } else {
                    write!(f, "{}+{}*sqrt2", self.a, self.b)
                }
            }
        }
    }
}

fn parse_rational(s: &str, whole: &str) -> Result<BigRational> {
    let bad = || Error::ParseQ2(whole.to_string());
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Parses a single signed term: a rational, or a rational times `sqrt2`.
fn parse_term(term: &str, whole: &str) -> Result<(BigRational, bool)> {
    let t = term.trim();
    let bad = || Error::ParseQ2(whole.to_string());
    if let Some(coef) = t.strip_suffix("sqrt2") {
        let coef = coef.trim_end();
        let coef = coef.strip_suffix('*').unwrap_or(coef).trim();
        let value = match coef {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            c => parse_rational(c, whole)?,
        };
        Ok((value, true))
    } else if t.contains("sqrt") {
        Err(bad())
    } else {
        Ok((parse_rational(t, whole)?, false))
    }
}

impl FromStr for Q2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Q2> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::ParseQ2(s.to_string()));
        }
        // Split into signed terms at '+'/'-' that are not the leading sign
        // and do not follow a '/'.
        let bytes = compact.as_bytes();
        let mut terms = Vec::new();
        let mut start = 0;
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/' && bytes[i - 1] != b'*' {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        if terms.len() > 2 {
            return Err(Error::ParseQ2(s.to_string()));
        }
        let mut a = None;
        let mut b = None;
        for term in terms {
            let (value, irrational) = parse_term(term, s)?;
            let slot = if irrational { &mut b } else { &mut a };
            if slot.is_some() {
                return Err(Error::ParseQ2(s.to_string()));
            }
            *slot = Some(value);
        }
        Ok(Q2::new(a.unwrap_or_else(BigRational::zero), b.unwrap_or_else(BigRational::zero)))
    }
}

impl serde::Serialize for Q2 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Q2 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Q2, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
