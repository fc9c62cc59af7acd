//! Collar and Cheeger-constant calculus on hyperbolic surfaces.

use std::f64::consts::PI;
use std::fmt;

use crate::arith::{bits_for_digits, ln2_interval, pi_interval, rat, NumInterval};
use crate::error::{out_of_range, Result};
use crate::random_model::Flagged;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveData {
    length: f64,
    area_small: f64,
}

impl CurveData {
    pub fn new(length: f64, area_small: f64) -> Result<Self> {
        if !(length > 0.0 && area_small > 0.0) {
            return Err(out_of_range("curve data", format!("length {length}, area {area_small}")));
        }
        Ok(CurveData { length, area_small })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn area_small(&self) -> f64 {
        self.area_small
    }
}

pub fn curve_h(c: &CurveData) -> f64 {
    c.length / c.area_small
}

/// `arcsinh(1 / sinh(l/2))`.
pub fn collar_halfwidth(l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(out_of_range("length", format!("{l}")));
    }
    Ok((1.0 / (l / 2.0).sinh()).asinh())
}

/// Length `l cosh t` of the curve at distance `t` from a geodesic of length
/// `l`, with the unsigned area offset `l sinh t`.
pub fn neighbor_curve(l: f64, t: f64) -> Result<Flagged<(f64, f64)>> {
    if t < 0.0 {
        return Err(out_of_range("distance", format!("{t}")));
    }
    let w = collar_halfwidth(l)?;
    let mut warnings = Vec::new();
    if t > w {
        warnings.push(format!("t = {t} exceeds the collar half-width {w}"));
    }
    Ok(Flagged { value: (l * t.cosh(), l * t.sinh()), warnings })
}

/// `(H/(1+H), H)`.
pub fn h_bounds_from_geodesic(big_h: f64) -> Result<(f64, f64)> {
    if big_h < 0.0 {
        return Err(out_of_range("H", format!("{big_h}")));
    }
    Ok((big_h / (1.0 + big_h), big_h))
}

pub fn phi(big_h: f64, t: f64) -> Result<f64> {
    if !(big_h > 0.0) || t < 0.0 {
        return Err(out_of_range("phi arguments", format!("H = {big_h}, t = {t}")));
    }
    Ok(big_h * t.cosh() / (1.0 + big_h * t.sinh()))
}

/// Minimum of `phi(H, .)`, attained at `t = arcsinh(H)`.
pub fn phi_min(big_h: f64) -> Result<f64> {
    if !(big_h > 0.0) {
        return Err(out_of_range("H", format!("{big_h}")));
    }
    Ok(big_h / (1.0 + big_h * big_h).sqrt())
}

/// Smallest value of `phi(H, t)` on the grid `t = 0, step, 2 step, ...,
/// t_max`.
pub fn phi_grid_min(big_h: f64, t_max: f64, step: f64) -> Result<f64> {
    let steps = (t_max / step).round() as u64;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        best = best.min(phi(big_h, i as f64 * step)?);
    }
    Ok(best)
}

pub fn c_to_h_threshold(c: f64) -> Result<f64> {
    if c < 0.0 {
        return Err(out_of_range("C", format!("{c}")));
    }
    Ok(c / (1.0 + c * c).sqrt())
}

/// Inverse of [`c_to_h_threshold`] on `[0, 1)`.
pub fn h_to_c_threshold(h: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&h) {
        return Err(out_of_range("h", format!("{h}")));
    }
    Ok(h / (1.0 - h * h).sqrt())
}

/// A constant with a certified enclosure and its 30-digit rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub name: &'static str,
    pub enclosure: NumInterval,
    pub decimal: String,
}

impl Constant {
    pub fn value(&self) -> f64 {
        self.enclosure.to_f64()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeConstants {
    /// `log 2 / sqrt(4 pi (log 2 + pi))`.
    pub poisson_c: Constant,
    /// `(log 2 / (log 2 + 2 pi))^2 / 4`.
    pub spectral_gap: Constant,
    /// `log 2 / (2 pi)`.
    pub geodesic_c: Constant,
    /// `log 2 / (log 2 + 2 pi)`.
    pub cheeger_h: Constant,
}

impl RegimeConstants {
    pub fn all(&self) -> [&Constant; 4] {
        [&self.poisson_c, &self.spectral_gap, &self.geodesic_c, &self.cheeger_h]
    }
}

pub const CONSTANT_DIGITS: u32 = 30;

pub fn regime_constants() -> Result<RegimeConstants> {
    let bits = bits_for_digits(CONSTANT_DIGITS + 10);
    let pi = pi_interval(bits);
    let ln2 = ln2_interval(bits);
    let two_pi = pi.scale(&rat(2, 1), bits);
    let four_pi = pi.scale(&rat(4, 1), bits);
    let mk = |name, enclosure: NumInterval| {
        let decimal = enclosure.to_decimal(CONSTANT_DIGITS);
        Constant { name, enclosure, decimal }
    };
    let poisson = ln2.div(&four_pi.mul(&ln2.add(&pi, bits), bits).sqrt(bits)?, bits)?;
    let cheeger = ln2.div(&ln2.add(&two_pi, bits), bits)?;
    let gap = cheeger.mul(&cheeger, bits).scale(&rat(1, 4), bits);
    let geodesic = ln2.div(&two_pi, bits)?;
    Ok(RegimeConstants {
        poisson_c: mk("poisson_c", poisson),
        spectral_gap: mk("spectral_gap", gap),
        geodesic_c: mk("geodesic_c", geodesic),
        cheeger_h: mk("cheeger_h", cheeger),
    })
}

/// `(log 2 - 2 pi eps) / (2 pi (1 - eps) + log 2)`.
pub fn mt3_threshold(eps: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (ln2 - 2.0 * PI * eps) / (2.0 * PI * (1.0 - eps) + ln2)
}

/// `30 sqrt(2 pi (n-2)) / (2 pi floor((n-2)/2))`.
pub fn sphere_h_upper(n: u32) -> Result<f64> {
    if n < 4 {
        return Err(out_of_range("n", format!("{n} < 4")));
    }
    let m = (n - 2) as f64;
    Ok(30.0 * (2.0 * PI * m).sqrt() / (2.0 * PI * ((n - 2) / 2) as f64))
}

/// `h^2/4` and the coefficient of the unknown constant in `c h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayqBounds {
    pub lower: f64,
    pub upper_coefficient: f64,
}

impl fmt::Display for RayqBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}*c]", self.lower, self.upper_coefficient)
    }
}

pub fn rayq_bounds(h: f64) -> Result<RayqBounds> {
    if h < 0.0 {
        return Err(out_of_range("h", format!("{h}")));
    }
    Ok(RayqBounds { lower: h * h / 4.0, upper_coefficient: h })
}
