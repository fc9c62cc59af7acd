//! Exact arithmetic over `Q[pi, 1/pi]`, the zeta/Bernoulli machinery behind the
//! recursion coefficients, and certified numeric evaluation.

mod interval;
mod pi;
mod special;

pub use interval::{
    bits_for_digits, compare, eval_numeric, ln2_interval, pi_interval, render_decimal, NumInterval,
    COMPARE_MAX_DIGITS, COMPARE_START_DIGITS,
};
pub use pi::{PiPoly, PiScalar};
pub use special::{bernoulli, binomial, coeff_a, coeff_b, factorial, zeta_even};
pub(crate) use special::coeff_a_rat;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rat = num::BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

/// Parses `p/q`, an integer, or a plain decimal such as `0.05` into an exact
/// rational.
pub fn parse_rat(s: &str) -> crate::Result<Rat> {
    use num::{BigInt, Zero};
    let bad = || crate::Error::Parse { what: "rational", input: s.to_string() };
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num::pow(BigInt::from(10), frac.len());
    let q = Rat::new(digits, scale);
    Ok(if neg { -q } else { q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("0.05").unwrap(), rat(1, 20));
        assert_eq!(parse_rat("-2").unwrap(), rat(-2, 1));
        assert_eq!(parse_rat("6/8").unwrap(), rat(3, 4));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat(".").is_err());
    }
}
