//! Certified numerics: dyadic intervals that always contain the true value.

use std::cmp::Ordering;
use std::sync::LazyLock;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use parking_lot::RwLock;

use super::{PiPoly, Rat};
use crate::error::{out_of_range, Error, Result};

/// Closed interval `[lo, hi]` with dyadic rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumInterval {
    lo: Rat,
    hi: Rat,
}

/// Bits needed for `digits` significant decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// Largest dyadic with `bits` significant bits that is `<= q`.
fn round_down(q: &Rat, bits: u32) -> Rat {
    if q.is_zero() {
        return Rat::zero();
    }
    let e = q.numer().bits() as i64 - q.denom().bits() as i64;
    let s = bits as i64 - e;
    if s >= 0 {
        let m = (q.numer() << s as u64).div_floor(q.denom());
        Rat::new(m, pow2(s as u64))
    } else {
        let m = q.numer().div_floor(&(q.denom() << (-s) as u64));
        Rat::from_integer(m << (-s) as u64)
    }
}

fn round_up(q: &Rat, bits: u32) -> Rat {
    -round_down(&-q, bits)
}

impl NumInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        NumInterval { lo, hi }
    }

    pub fn exact(q: Rat) -> Self {
        NumInterval { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        Self::exact(Rat::zero())
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rat) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_interval(&self, other: &NumInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn mid(&self) -> Rat {
        (&self.lo + &self.hi) / Rat::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    fn rounded(lo: Rat, hi: Rat, bits: u32) -> Self {
        NumInterval { lo: round_down(&lo, bits), hi: round_up(&hi, bits) }
    }

    pub fn add(&self, o: &NumInterval, bits: u32) -> Self {
        Self::rounded(&self.lo + &o.lo, &self.hi + &o.hi, bits)
    }

    pub fn neg(&self) -> Self {
        NumInterval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn sub(&self, o: &NumInterval, bits: u32) -> Self {
        self.add(&o.neg(), bits)
    }

    pub fn mul(&self, o: &NumInterval, bits: u32) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self::rounded(lo, hi, bits)
    }

    pub fn scale(&self, q: &Rat, bits: u32) -> Self {
        self.mul(&NumInterval::exact(q.clone()), bits)
    }

    pub fn recip(&self, bits: u32) -> Result<Self> {
        if self.contains(&Rat::zero()) {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::rounded(self.hi.recip(), self.lo.recip(), bits))
    }

    pub fn div(&self, o: &NumInterval, bits: u32) -> Result<Self> {
        Ok(self.mul(&o.recip(bits)?, bits))
    }

    pub fn powi(&self, e: i32, bits: u32) -> Result<Self> {
        let base = if e < 0 { self.recip(bits)? } else { self.clone() };
        let mut acc = NumInterval::exact(Rat::one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base, bits);
        }
        Ok(acc)
    }

    /// Square root of a non-negative interval.
    pub fn sqrt(&self, bits: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(out_of_range("sqrt argument", "interval reaches below zero"));
        }
        let s = bits as u64 + 2;
        let scaled = |q: &Rat, up: bool| {
            let n = q.numer() << (2 * s);
            if up {
                n.div_ceil(q.denom())
            } else {
                n.div_floor(q.denom())
            }
        };
        let lo = scaled(&self.lo, false).sqrt();
        let mut hi = scaled(&self.hi, true).sqrt();
        if &hi * &hi < scaled(&self.hi, true) {
            hi += 1;
        }
        Ok(NumInterval { lo: Rat::new(lo, pow2(s)), hi: Rat::new(hi, pow2(s)) })
    }

    /// Sign of the contained value, if the interval excludes zero or is `[0,0]`.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Midpoint rendered with `sig` significant decimal digits.
    pub fn to_decimal(&self, sig: u32) -> String {
        render_decimal(&self.mid(), sig)
    }
}

/// Plain positional rendering of `q` rounded to `sig` significant digits.
pub fn render_decimal(q: &Rat, sig: u32) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let neg = q.is_negative();
    let a = q.abs();
    let ten = BigInt::from(10);
    // Decimal exponent of the leading digit.
    let mut exp: i64 = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow10 = |e: i64| num::pow(ten.clone(), e.unsigned_abs() as usize);
    loop {
        let shift = sig as i64 - 1 - exp;
        let scaled = if shift >= 0 { &a * Rat::from_integer(pow10(shift)) } else { &a / Rat::from_integer(pow10(shift)) };
        let m = scaled.round().to_integer();
        let len = m.to_string().len() as i64;
        if len > sig as i64 {
            exp += 1;
            continue;
        }
        if len < sig as i64 {
            exp -= 1;
            continue;
        }
        let digits = m.to_string();
        let point = exp + 1;
        let body = if point <= 0 {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        } else if point as usize >= digits.len() {
            format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
        } else {
            format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
        };
        return if neg { format!("-{body}") } else { body };
    }
}

/// `floor(2^n / (k * x^e))`-style fixed-point series for `arctan(1/x)`.
/// Returns the scaled value and a bound on the absolute error in ulps.
fn arctan_inv(x: u32, n: u64) -> (BigInt, u64) {
    let one = BigInt::one() << n;
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = x.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        let term = &one / (&power * (2 * k + 1));
        if term.is_zero() {
            break;
        }
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power *= &x2;
        k += 1;
    }
    (sum, k + 1)
}

static PI_CACHE: LazyLock<RwLock<Option<(u32, NumInterval)>>> = LazyLock::new(|| RwLock::new(None));

/// An interval around pi whose width is at most `2^-bits` (relative).
pub fn pi_interval(bits: u32) -> NumInterval {
    if let Some((b, iv)) = PI_CACHE.read().as_ref() {
        if *b >= bits {
            return iv.clone();
        }
    }
    let n = bits as u64 + 16;
    let (a5, e5) = arctan_inv(5, n);
    let (a239, e239) = arctan_inv(239, n);
    let p = a5 * 16 - a239 * 4;
    let err = BigInt::from(16 * e5 + 4 * e239);
    let den = pow2(n);
    let iv = NumInterval { lo: Rat::new(&p - &err, den.clone()), hi: Rat::new(&p + &err, den) };
    *PI_CACHE.write() = Some((bits, iv.clone()));
    iv
}

/// An interval around `ln 2` from `sum_{k>=1} 1/(k 2^k)`.
pub fn ln2_interval(bits: u32) -> NumInterval {
    let n = bits as u64 + 16;
    let one = BigInt::one() << n;
    let mut sum = BigInt::zero();
    let mut k: u64 = 1;
    while k <= n + 1 {
        sum += &one / (BigInt::from(k) << k);
        k += 1;
    }
    // Each floor loses < 1 ulp; the tail after n+1 terms is below one ulp.
    let err = BigInt::from(k + 1);
    let den = pow2(n);
    NumInterval { lo: Rat::new(&sum - &err, den.clone()), hi: Rat::new(&sum + &err, den) }
}

/// Certified enclosure of an exact value at roughly `digits` significant digits.
pub fn eval_numeric(x: impl Into<PiPoly>, digits: u32) -> Result<NumInterval> {
    if digits == 0 {
        return Err(out_of_range("precision", "at least one digit is required"));
    }
    let x: PiPoly = x.into();
    let bits = bits_for_digits(digits) + 16;
    let max_deg = x.terms().map(|t| t.pideg().unsigned_abs()).max().unwrap_or(0);
    // pi^k amplifies the relative error of pi by about k.
    let wp = bits + 32 + (32 - max_deg.leading_zeros());
    let pi = pi_interval(wp);
    let mut acc = NumInterval::zero();
    for t in x.terms() {
        let term = if t.pideg() == 0 {
            NumInterval::exact(t.coeff().clone())
        } else {
            pi.powi(t.pideg(), wp)?.scale(t.coeff(), wp)
        };
        acc = if acc.lo.is_zero() && acc.hi.is_zero() {
            term
        } else {
            acc.add(&term, wp)
        };
    }
    Ok(acc)
}

pub const COMPARE_START_DIGITS: u32 = 50;
pub const COMPARE_MAX_DIGITS: u32 = 3200;

/// Orders two exact values. Equal representations compare equal symbolically;
/// otherwise the difference is enclosed at 50, 100, ... 3200 digits until its
/// sign is certain.
pub fn compare(a: &PiPoly, b: &PiPoly) -> Result<Ordering> {
    if a == b {
        return Ok(Ordering::Equal);
    }
    let d = a - b;
    let mut digits = COMPARE_START_DIGITS;
    while digits <= COMPARE_MAX_DIGITS {
        if let Some(o) = eval_numeric(d.clone(), digits)?.sign() {
            if o != Ordering::Equal {
                return Ok(o);
            }
        }
        digits *= 2;
    }
    Err(Error::Undecided { digits: COMPARE_MAX_DIGITS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PiScalar;

    #[test]
    fn rounding_is_outward() {
        let third = Rat::new(1.into(), 3.into());
        let lo = round_down(&third, 20);
        let hi = round_up(&third, 20);
        assert!(lo < third && third < hi);
        let big = Rat::new(BigInt::from(10).pow(40) + 7, 3.into());
        assert!(round_down(&big, 16) <= big && big <= round_up(&big, 16));
        let neg = -third.clone();
        assert!(round_down(&neg, 10) <= neg && neg <= round_up(&neg, 10));
    }

    #[test]
    fn pi_digits() {
        let pi = pi_interval(200);
        let s = pi.to_decimal(50);
        assert_eq!(s, "3.1415926535897932384626433832795028841971693993751");
        assert!(pi.width() < Rat::new(1.into(), BigInt::one() << 190));
    }

    #[test]
    fn ln2_digits() {
        assert_eq!(ln2_interval(128).to_decimal(30), "0.693147180559945309417232121458");
    }

    #[test]
    fn eval_examples() {
        let v = eval_numeric(PiScalar::frac(1, 12, 2), 20).unwrap();
        assert!(v.to_decimal(10).starts_with("0.822467033"));
        assert_eq!(eval_numeric(PiScalar::zero(), 5).unwrap(), NumInterval::zero());
        let sixth = Rat::new(1.into(), 6.into());
        assert_eq!(eval_numeric(PiScalar::rational(sixth.clone()), 3).unwrap(), NumInterval::exact(sixth));
        assert!(eval_numeric(PiScalar::one(), 0).is_err());
    }

    #[test]
    fn width_shrinks() {
        let x: PiPoly = PiScalar::frac(3, 7, -5).into();
        let w1 = eval_numeric(x.clone(), 20).unwrap().width();
        let w2 = eval_numeric(x, 80).unwrap().width();
        assert!(w2 < w1);
    }

    #[test]
    fn compare_separates() {
        let a: PiPoly = PiScalar::frac(1, 6, 0).into();
        let b: PiPoly = PiScalar::frac(1, 60, 2).into();
        assert_eq!(compare(&a, &b).unwrap(), Ordering::Greater);
        assert_eq!(compare(&a, &a).unwrap(), Ordering::Equal);
        // 22/7 vs pi
        let c: PiPoly = PiScalar::frac(22, 7, 0).into();
        let pi: PiPoly = PiScalar::frac(1, 1, 1).into();
        assert_eq!(compare(&c, &pi).unwrap(), Ordering::Greater);
    }

    #[test]
    fn sqrt_encloses() {
        let two = NumInterval::exact(Rat::from_integer(2.into()));
        let r = two.sqrt(100).unwrap();
        let sq = r.mul(&r, 200);
        assert!(sq.contains(&Rat::from_integer(2.into())));
        assert_eq!(r.to_decimal(20), "1.4142135623730950488");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(render_decimal(&Rat::new(1.into(), 8.into()), 3), "0.125");
        assert_eq!(render_decimal(&Rat::new(12345.into(), 1.into()), 3), "12300");
        assert_eq!(render_decimal(&Rat::new((-5).into(), 3.into()), 4), "-1.667");
        assert_eq!(render_decimal(&Rat::new(999.into(), 1000.into()), 2), "1.0");
    }
}
