//! Exact values in the ring `Q[pi, 1/pi]`.
//!
//! [`PiScalar`] holds a single monomial `q * pi^k`; [`PiPoly`] holds a finite
//! sum of such monomials. Both render to and parse from the interchange text
//! format `num/den*pi^k`, with polynomial terms joined by `+` in descending
//! order of the pi-degree.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::{BigInt, One, Signed, Zero};

use super::Rat;
use crate::error::{Error, Result};

/// A rational multiple of an integer power of pi.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiScalar {
    coeff: Rat,
    pideg: i32,
}

impl PiScalar {
    pub fn new(coeff: Rat, pideg: i32) -> Self {
        if coeff.is_zero() {
            Self::zero()
        } else {
            PiScalar { coeff, pideg }
        }
    }

    pub fn zero() -> Self {
        PiScalar { coeff: Rat::zero(), pideg: 0 }
    }

    pub fn one() -> Self {
        PiScalar { coeff: Rat::one(), pideg: 0 }
    }

    pub fn rational(q: Rat) -> Self {
        Self::new(q, 0)
    }

    pub fn from_int(v: i64) -> Self {
        Self::rational(Rat::from_integer(BigInt::from(v)))
    }

    /// `num/den * pi^pideg` from machine integers.
    pub fn frac(num: i64, den: i64, pideg: i32) -> Self {
        Self::new(Rat::new(BigInt::from(num), BigInt::from(den)), pideg)
    }

    pub fn coeff(&self) -> &Rat {
        &self.coeff
    }

    pub fn pideg(&self) -> i32 {
        self.pideg
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PiScalar { coeff: self.coeff.recip(), pideg: -self.pideg })
    }

    pub fn checked_div(&self, rhs: &PiScalar) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        Self::new(num::pow(self.coeff.clone(), e as usize), self.pideg * e as i32)
    }

    pub fn scale(&self, q: &Rat) -> Self {
        Self::new(&self.coeff * q, self.pideg)
    }

    /// Fast double-precision evaluation. Use [`super::eval_numeric`] when the
    /// result has to be certified.
    pub fn to_f64(&self) -> f64 {
        use num::ToPrimitive;
        self.coeff.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pideg)
    }
}

impl Default for PiScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl Mul for &PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: &PiScalar) -> PiScalar {
        PiScalar::new(&self.coeff * &rhs.coeff, self.pideg + rhs.pideg)
    }
}

impl Mul for PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: PiScalar) -> PiScalar {
        &self * &rhs
    }
}

impl Neg for PiScalar {
    type Output = PiScalar;
    fn neg(self) -> PiScalar {
        PiScalar::new(-self.coeff, self.pideg)
    }
}

impl From<Rat> for PiScalar {
    fn from(q: Rat) -> Self {
        PiScalar::rational(q)
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, q: &Rat) -> fmt::Result {
    write!(f, "{}/{}", q.numer(), q.denom())
}

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rat(f, &self.coeff)?;
        write!(f, "*pi^{}", self.pideg)
    }
}

/// Parses `num/den*pi^k`. The fraction must already be in lowest terms with a
/// positive denominator, so that rendering a parsed value reproduces the input.
fn parse_term(s: &str) -> Result<(Rat, i32)> {
    let bad = || Error::Parse { what: "pi term", input: s.to_string() };
    let (frac, deg) = s.split_once("*pi^").ok_or_else(bad)?;
    let (num, den) = frac.split_once('/').ok_or_else(bad)?;
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    let deg: i32 = deg.parse().map_err(|_| bad())?;
    if !den.is_positive() {
        return Err(bad());
    }
    let q = Rat::new(num.clone(), den.clone());
    if q.numer() != &num || q.denom() != &den {
        return Err(bad());
    }
    Ok((q, deg))
}

impl FromStr for PiScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (q, deg) = parse_term(s)?;
        if q.is_zero() && deg != 0 {
            return Err(Error::Parse { what: "pi term", input: s.to_string() });
        }
        Ok(PiScalar::new(q, deg))
    }
}

/// A finite sum `sum_k q_k pi^k` with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PiPoly {
    terms: BTreeMap<i32, Rat>,
}

impl PiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        PiScalar::one().into()
    }

    pub fn rational(q: Rat) -> Self {
        PiScalar::rational(q).into()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending pi-degree.
    pub fn terms(&self) -> impl Iterator<Item = PiScalar> + '_ {
        self.terms.iter().rev().map(|(&k, q)| PiScalar::new(q.clone(), k))
    }

    pub fn coeff(&self, pideg: i32) -> Rat {
        self.terms.get(&pideg).cloned().unwrap_or_else(Rat::zero)
    }

    /// The single monomial, if this polynomial is homogeneous.
    pub fn as_scalar(&self) -> Option<PiScalar> {
        match self.terms.len() {
            0 => Some(PiScalar::zero()),
            1 => self.terms().next(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, t: &PiScalar) {
        if t.is_zero() {
            return;
        }
        let e = self.terms.entry(t.pideg()).or_insert_with(Rat::zero);
        *e += t.coeff();
        if e.is_zero() {
            self.terms.remove(&t.pideg());
        }
    }

    pub fn mul_scalar(&self, s: &PiScalar) -> PiPoly {
        let mut out = PiPoly::zero();
        for t in self.terms() {
            out.add_term(&(&t * s));
        }
        out
    }

    pub fn pow(&self, e: u32) -> PiPoly {
        let mut acc = PiPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.terms().map(|t| t.to_f64()).sum()
    }
}

impl From<PiScalar> for PiPoly {
    fn from(s: PiScalar) -> Self {
        let mut p = PiPoly::zero();
        p.add_term(&s);
        p
    }
}

impl From<Rat> for PiPoly {
    fn from(q: Rat) -> Self {
        PiPoly::rational(q)
    }
}

impl Add for &PiPoly {
    type Output = PiPoly;
    fn add(self, rhs: &PiPoly) -> PiPoly {
        let mut out = self.clone();
        for t in rhs.terms() {
            out.add_term(&t);
        }
        out
    }
}

impl Add for PiPoly {
    type Output = PiPoly;
    fn add(self, rhs: PiPoly) -> PiPoly {
        &self + &rhs
    }
}

impl Neg for &PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        PiPoly {
            terms: self.terms.iter().map(|(&k, q)| (k, -q.clone())).collect(),
        }
    }
}

impl Neg for PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        -&self
    }
}

impl Sub for &PiPoly {
    type Output = PiPoly;
    fn sub(self, rhs: &PiPoly) -> PiPoly {
        self + &(-rhs)
    }
}

impl Sub for PiPoly {
    type Output = PiPoly;
    fn sub(self, rhs: PiPoly) -> PiPoly {
        &self - &rhs
    }
}

impl Mul for &PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: &PiPoly) -> PiPoly {
        let mut out = PiPoly::zero();
        for a in self.terms() {
            for b in rhs.terms() {
                out.add_term(&(&a * &b));
            }
        }
        out
    }
}

impl Mul for PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: PiPoly) -> PiPoly {
        &self * &rhs
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "{}", PiScalar::zero());
        }
        for (i, t) in self.terms().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for PiPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { what: "pi polynomial", input: s.to_string() };
        let mut out = PiPoly::zero();
        let mut last: Option<i32> = None;
        // A term may itself start with '-', so split on '+' only.
        for part in s.split('+') {
            let (q, deg) = parse_term(part)?;
            if q.is_zero() {
                if s != "0/1*pi^0" {
                    return Err(bad());
                }
                continue;
            }
            if last.is_some_and(|l| deg >= l) {
                return Err(bad());
            }
            last = Some(deg);
            out.add_term(&PiScalar::new(q, deg));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_render() {
        assert_eq!(PiScalar::frac(7, 720, 4).to_string(), "7/720*pi^4");
        assert_eq!(PiScalar::zero().to_string(), "0/1*pi^0");
        assert_eq!(PiScalar::frac(6, 1, -2).to_string(), "6/1*pi^-2");
        assert_eq!(PiScalar::frac(0, 5, 3), PiScalar::zero());
    }

    #[test]
    fn scalar_parse_rejects_unreduced() {
        assert!("2/4*pi^1".parse::<PiScalar>().is_err());
        assert!("1/-2*pi^1".parse::<PiScalar>().is_err());
        assert!("0/1*pi^3".parse::<PiScalar>().is_err());
        assert!("1/2pi^3".parse::<PiScalar>().is_err());
        assert_eq!("-3/7*pi^-2".parse::<PiScalar>().unwrap(), PiScalar::frac(-3, 7, -2));
    }

    #[test]
    fn poly_render_descending() {
        let mut p = PiPoly::zero();
        p.add_term(&PiScalar::frac(1, 48, 0));
        p.add_term(&PiScalar::frac(1, 12, 2));
        p.add_term(&PiScalar::frac(-1, 2, -2));
        let s = p.to_string();
        assert_eq!(s, "1/12*pi^2+1/48*pi^0+-1/2*pi^-2");
        assert_eq!(s.parse::<PiPoly>().unwrap(), p);
        assert_eq!(PiPoly::zero().to_string(), "0/1*pi^0");
        assert_eq!("0/1*pi^0".parse::<PiPoly>().unwrap(), PiPoly::zero());
    }

    #[test]
    fn cancellation_removes_term() {
        let a: PiPoly = PiScalar::frac(1, 3, 2).into();
        let b: PiPoly = PiScalar::frac(1, 3, 2).into();
        assert!((&a - &b).is_zero());
    }
}
