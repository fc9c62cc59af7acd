//! Expected counts of short multi-curves, Poisson diagnostics and the
//! probability upper-bound sums for separating multi-curves.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::arith::{binomial, eval_numeric, factorial, parse_rat, NumInterval, PiPoly, PiScalar, Rat};
use crate::error::{out_of_range, Error, Result};
use crate::intersection::{check_stable, BracketEngine};
use crate::topology::{enumerate_splits, euler, pairing_multiplicity};
use crate::volumes::{box_moment_coeffs, volume, volume_poly};

/// Digits used for the certified enclosures attached to results.
pub const RESULT_DIGITS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LengthKind {
    Rational,
    RationalPi,
}

/// An exact cut-off length: either `q` or `q * pi` with `q > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CutoffLength {
    kind: LengthKind,
    value: Rat,
}

impl CutoffLength {
    pub fn new(kind: LengthKind, value: Rat) -> Result<Self> {
        if value <= Rat::zero() {
            return Err(out_of_range("cut-off length", format!("{value} is not positive")));
        }
        Ok(CutoffLength { kind, value })
    }

    pub fn rational(value: Rat) -> Result<Self> {
        Self::new(LengthKind::Rational, value)
    }

    pub fn times_pi(value: Rat) -> Result<Self> {
        Self::new(LengthKind::RationalPi, value)
    }

    pub fn kind(&self) -> LengthKind {
        self.kind
    }

    pub fn value(&self) -> &Rat {
        &self.value
    }

    pub fn exact(&self) -> PiScalar {
        match self.kind {
            LengthKind::Rational => PiScalar::new(self.value.clone(), 0),
            LengthKind::RationalPi => PiScalar::new(self.value.clone(), 1),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.exact().to_f64()
    }

    pub fn kind_label(&self) -> &'static str {
        match self.kind {
            LengthKind::Rational => "rational",
            LengthKind::RationalPi => "rational*pi",
        }
    }
}

impl fmt::Display for CutoffLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LengthKind::Rational => write!(f, "{}", self.value),
            LengthKind::RationalPi => write!(f, "{}pi", self.value),
        }
    }
}

impl FromStr for CutoffLength {
    type Err = Error;
    /// `RAT` or `RATpi`, e.g. `1/5pi` or `0.2`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().strip_suffix("pi") {
            Some(q) => Self::times_pi(parse_rat(q)?),
            None => Self::rational(parse_rat(s)?),
        }
    }
}

/// A value together with the hypothesis violations met while computing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationResult {
    pub exact: Option<PiPoly>,
    pub numeric: NumInterval,
    pub main_term: f64,
    pub rel_deviation: f64,
    pub warnings: Vec<String>,
}

/// `sum_j c_j (L^2)^j` for an exact `L`.
fn eval_in_square(coeffs: &[PiScalar], l: &PiScalar) -> PiPoly {
    let l2 = l.pow(2);
    let mut acc = PiPoly::zero();
    let mut pw = PiScalar::one();
    for c in coeffs {
        acc.add_term(&(c * &pw));
        pw = &pw * &l2;
    }
    acc
}

/// `2 arcsinh(1)`, the length below which pants around puncture pairs are
/// disjoint.
pub fn collar_length_limit() -> f64 {
    2.0 * 1f64.asinh()
}

/// Expected number of `k`-tuples of disjoint pants, each bounding two
/// punctures and a curve of length at most `L`.
pub fn expected_pants_count(e: &BracketEngine, g: u32, n: u32, k: u32, l: &CutoffLength) -> Result<ExpectationResult> {
    if k == 0 || n < 2 * k {
        return Err(out_of_range("k", format!("need n >= 2k >= 2, got n={n}, k={k}")));
    }
    check_stable(g, n)?;
    check_stable(g, n - k)?;
    let vn = volume(e, g, n)?;
    let vnk = volume(e, g, n - k)?;
    let poly = volume_poly(e, g, n - k)?;
    let moments = box_moment_coeffs(&poly, k);
    let integral = eval_in_square(&moments, &l.exact());
    let scale = PiScalar::rational(Rat::from_integer(pairing_multiplicity(n, k)?)).checked_div(&vn)?;
    let exact = integral.mul_scalar(&scale);
    let numeric = eval_numeric(exact.clone(), RESULT_DIGITS)?;

    let falling: f64 = (0..2 * k).map(|i| (n - i) as f64).product();
    let ratio = eval_numeric(vnk.checked_div(&vn)?, RESULT_DIGITS)?.to_f64();
    let half = l.to_f64() / 2.0;
    let main_term = falling * ratio * (2.0 * half.cosh() - 2.0).powi(k as i32);
    let value = numeric.to_f64();
    let rel_deviation = (value / main_term - 1.0).abs();
    Ok(ExpectationResult { exact: Some(exact), numeric, main_term, rel_deviation, warnings: Vec::new() })
}

/// The `r`-th factorial moment of the pants count; flags lengths where the
/// pants may overlap.
pub fn factorial_moment(e: &BracketEngine, g: u32, n: u32, r: u32, l: &CutoffLength) -> Result<ExpectationResult> {
    let mut res = expected_pants_count(e, g, n, r, l)?;
    if l.to_f64() >= collar_length_limit() {
        res.warnings.push(format!("L = {l} >= 2 arcsinh 1: pants need not be disjoint"));
    }
    Ok(res)
}

/// `log 2 / sqrt(4 pi (log 2 + pi))`.
pub fn poisson_regime_limit() -> f64 {
    LN_2 / (4.0 * PI * (LN_2 + PI)).sqrt()
}

/// `lambda(a, C) = a^2 (cosh(pi C) - 1) / (4 pi^2)`.
pub fn poisson_lambda(a: f64, c: f64) -> Result<Flagged<f64>> {
    if a < 0.0 || c < 0.0 || !a.is_finite() || !c.is_finite() {
        return Err(out_of_range("poisson parameters", format!("a = {a}, C = {c}")));
    }
    let value = a * a / (4.0 * PI * PI) * ((PI * c).cosh() - 1.0);
    let mut warnings = Vec::new();
    if c >= poisson_regime_limit() {
        warnings.push(format!("C = {c} is not below log2/sqrt(4pi(log2+pi))"));
    }
    Ok(Flagged { value, warnings })
}

pub fn poisson_pmf(lambda: f64, j: u32) -> f64 {
    let mut p = (-lambda).exp();
    for i in 1..=j {
        p *= lambda / i as f64;
    }
    p
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondMoment {
    pub mean: PiPoly,
    pub second_factorial: PiPoly,
    pub second_moment: PiPoly,
    /// `E[N]^2 / E[N^2]`.
    pub bound: f64,
    /// `V_{g,n-1}^2 / (V_{g,n} V_{g,n-2})`.
    pub target: Rat,
    pub warnings: Vec<String>,
}

pub fn second_moment_bound(e: &BracketEngine, g: u32, n: u32, l: &CutoffLength) -> Result<SecondMoment> {
    if n < 4 {
        return Err(out_of_range("n", format!("second moment needs n >= 4, got {n}")));
    }
    let first = factorial_moment(e, g, n, 1, l)?;
    let second = factorial_moment(e, g, n, 2, l)?;
    let mean = first.exact.expect("exact cut-off");
    let second_factorial = second.exact.expect("exact cut-off");
    let second_moment = &mean + &second_factorial;
    let m = first.numeric.to_f64();
    let s = eval_numeric(second_moment.clone(), RESULT_DIGITS)?.to_f64();
    let bound = if s > 0.0 { m * m / s } else { 0.0 };
    let v1 = volume(e, g, n - 1)?;
    let target = v1.pow(2).checked_div(&(&volume(e, g, n)? * &volume(e, g, n - 2)?))?;
    debug_assert_eq!(target.pideg(), 0);
    let mut warnings = first.warnings;
    warnings.extend(second.warnings);
    warnings.dedup();
    Ok(SecondMoment { mean, second_factorial, second_moment, bound, target: target.coeff().clone(), warnings })
}

/// The cut-off scale `(sqrt(g)/n)^(1/2)`, or `g^(1/8)/n^(1/4)` with `variant`,
/// rounded down to `digits` decimals.
pub fn length_scale(g: u32, n: u32, variant: bool, digits: u32) -> Result<CutoffLength> {
    if g == 0 || n == 0 {
        return Err(out_of_range("length scale", format!("need g, n >= 1, got ({g}, {n})")));
    }
    let root = if variant { 8 } else { 4 };
    let unit = num::pow(BigInt::from(10), digits as usize);
    // (g / n^2)^(1/root) * 10^digits = (g * 10^(root digits) / n^2)^(1/root).
    let radicand = BigInt::from(g) * num::pow(unit.clone(), root as usize) / (BigInt::from(n) * BigInt::from(n));
    let r = radicand.nth_root(root);
    if r.is_zero() {
        return Err(out_of_range("length scale", format!("below 10^-{digits} for ({g}, {n})")));
    }
    CutoffLength::rational(Rat::new(r, unit))
}

/// `max_{0 <= i <= m+1} C(n, i)`.
pub fn binomial_weight(m: u32, n: u32) -> BigInt {
    (0..=m + 1).map(|i| binomial(n, i)).max().unwrap_or_else(BigInt::one)
}

/// `log 2 / (2 pi)`.
pub fn cheeger_regime_limit() -> f64 {
    LN_2 / (2.0 * PI)
}

fn product_ratio(e: &BracketEngine, g1: u32, n1: u32, g2: u32, n2: u32, vn: &PiScalar) -> Result<f64> {
    let r = (&volume(e, g1, n1)? * &volume(e, g2, n2)?).checked_div(vn)?;
    Ok(eval_numeric(r, 20)?.to_f64())
}

/// Upper bound for the probability that the geodesic Cheeger constant is at
/// most `C`, summed over all separating multi-curve types.
pub fn cheeger_prob_upper(e: &BracketEngine, g: u32, n: u32, c: f64) -> Result<Flagged<f64>> {
    if c < 0.0 || !c.is_finite() {
        return Err(out_of_range("C", format!("{c}")));
    }
    let chi = euler(g, n);
    check_stable(g, n)?;
    let vn = volume(e, g, n)?;
    let mut total = 0.0;
    for m in 1..=(chi / 2).max(0) as u32 {
        let weight = binomial_weight(m, n).to_f64().unwrap_or(f64::INFINITY);
        let t = 2.0 * PI * m as f64 * c;
        for s in enumerate_splits(m, g, n)? {
            let ratio = product_ratio(e, s.g1, s.n1, s.g2, s.n2, &vn)?;
            let mut inner = 0.0;
            for k in 1..=s.n1 {
                let fk = factorial(k).to_f64().unwrap() * factorial(2 * k).to_f64().unwrap();
                inner += t.powi(2 * k as i32) / fk;
            }
            total += weight * ratio * inner * t.exp();
        }
    }
    let mut warnings = Vec::new();
    if c >= cheeger_regime_limit() {
        warnings.push(format!("C = {c} is not below log2/(2pi)"));
    }
    Ok(Flagged { value: total, warnings })
}

/// `(1/V_{g,n}) sum_{m >= 2} sum_{I_m} C(m,n) V_{g1,n1} V_{g2,n2} e^(L_m)`
/// with `L_m = 2 pi m u + 3 (2 pi m u)^(2/3)`.
pub fn pvol2_sum(e: &BracketEngine, g: u32, n: u32, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < cheeger_regime_limit()) {
        return Err(out_of_range("u", format!("{u} not in (0, log2/(2pi))")));
    }
    check_stable(g, n)?;
    let chi = euler(g, n);
    let vn = volume(e, g, n)?;
    let mut total = 0.0;
    for m in 2..=(chi / 2).max(0) as u32 {
        let weight = binomial_weight(m, n).to_f64().unwrap_or(f64::INFINITY);
        let t = 2.0 * PI * m as f64 * u;
        let lm = t + 3.0 * t.powf(2.0 / 3.0);
        for s in enumerate_splits(m, g, n)? {
            total += weight * product_ratio(e, s.g1, s.n1, s.g2, s.n2, &vn)? * lm.exp();
        }
    }
    Ok(total)
}

/// `a! b! / (a+b+2)!`, so that the integral of `x^a y^b` over the triangle
/// `x, y >= 0, x + y <= T` is this times `T^(a+b+2)`.
pub fn triangle_moment(a: u32, b: u32) -> Rat {
    Rat::new(factorial(a) * factorial(b), factorial(a + b + 2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoCurveBound {
    pub exact: PiPoly,
    pub value: f64,
    /// `value * (g + n)`.
    pub scaled: f64,
}

/// `(1/V_{g,n})` times the integral of `V_{g-1,n+1}(x, y, 0, ...) x y` over
/// `x + y <= 2 pi C`.
pub fn two_curve_expectation_bound(e: &BracketEngine, g: u32, n: u32, c: &Rat) -> Result<TwoCurveBound> {
    if *c <= Rat::zero() {
        return Err(out_of_range("C", format!("{c} is not positive")));
    }
    if g == 0 {
        return Err(out_of_range("genus", "the two-curve bound needs g >= 1"));
    }
    check_stable(g, n)?;
    check_stable(g - 1, n + 1)?;
    let vn = volume(e, g, n)?;
    let poly = volume_poly(e, g - 1, n + 1)?;
    let t = PiScalar::new(c * Rat::from_integer(2.into()), 1);
    let mut exact = PiPoly::zero();
    for (key, coeff) in poly.coeffs() {
        let nonzero: Vec<u32> = key.expanded().into_iter().filter(|&v| v > 0).collect();
        let (a, b) = match nonzero.as_slice() {
            [] => (0, 0),
            [a] => (*a, 0),
            [a, b] => (*a, *b),
            _ => continue,
        };
        // Ordered placements of (a, b) into the x and y slots.
        let placements: &[(u32, u32)] = if a == b { &[(a, b)][..] } else { &[(a, b), (b, a)][..] };
        for &(p, q) in placements {
            let w = triangle_moment(2 * p + 1, 2 * q + 1);
            exact.add_term(&(&coeff.scale(&w) * &t.pow(2 * p + 2 * q + 4)));
        }
    }
    let exact = exact.mul_scalar(&vn.recip()?);
    let value = eval_numeric(exact.clone(), RESULT_DIGITS)?.to_f64();
    Ok(TwoCurveBound { exact, value, scaled: value * (g + n) as f64 })
}

/// Empirical summary of Poisson samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSample {
    pub pmf: Vec<f64>,
    pub mean: f64,
    /// Entry `r-1` estimates `E[(X)_r]` for `r = 1..=4`.
    pub factorial_moments: Vec<f64>,
}

pub fn simulate_poisson(lambda: f64, trials: u64, seed: u64) -> Result<PoissonSample> {
    if !(lambda >= 0.0 && lambda.is_finite()) || trials == 0 {
        return Err(out_of_range("simulation", format!("lambda = {lambda}, trials = {trials}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = if lambda > 0.0 {
        Some(Poisson::new(lambda).map_err(|e| out_of_range("lambda", e.to_string()))?)
    } else {
        None
    };
    let mut counts: Vec<u64> = Vec::new();
    let mut fm = [0f64; 4];
    let mut sum = 0f64;
    for _ in 0..trials {
        let x = dist.as_ref().map_or(0u64, |d| d.sample(&mut rng) as u64);
        if counts.len() <= x as usize {
            counts.resize(x as usize + 1, 0);
        }
        counts[x as usize] += 1;
        sum += x as f64;
        let mut falling = 1.0;
        for (r, slot) in fm.iter_mut().enumerate() {
            falling *= x as f64 - r as f64;
            *slot += falling;
        }
    }
    let n = trials as f64;
    Ok(PoissonSample {
        pmf: counts.iter().map(|&c| c as f64 / n).collect(),
        mean: sum / n,
        factorial_moments: fm.iter().map(|s| s / n).collect(),
    })
}

/// Integrates the Taylor polynomial of `2 sinh(x/2)` of the given order
/// over `[0, L]` exactly, monomial by monomial.
pub fn sinh_integral_taylor(l: &Rat, order: u32) -> Rat {
    let mut acc = Rat::zero();
    // 2 sinh(x/2) = sum_j 2 (x/2)^(2j+1) / (2j+1)!.
    let mut j = 0;
    while 2 * j < order {
        let p = 2 * j + 1;
        let coeff = Rat::new(BigInt::from(2), factorial(p) << p as u64);
        // x^p integrates to L^(p+1)/(p+1).
        acc += coeff * num::pow(l.clone(), p as usize + 1) / Rat::from_integer((p + 1).into());
        j += 1;
    }
    acc
}

/// `T^(2k) / (2k)!`, the integral of `prod x_i` over the simplex
/// `sum x_i <= T` in `k` variables.
pub fn simplex_integral(k: u32, t: &Rat) -> Rat {
    num::pow(t.clone(), 2 * k as usize) / Rat::from_integer(factorial(2 * k))
}

/// Monte-Carlo estimate of the same integral: mean and standard error.
pub fn simplex_integral_mc(k: u32, t: f64, samples: u64, seed: u64) -> (f64, f64) {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol = t.powi(k as i32);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let x: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * t).collect();
        let v = if x.iter().sum::<f64>() <= t { x.iter().product::<f64>() * vol } else { 0.0 };
        s += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / n).sqrt())
}
