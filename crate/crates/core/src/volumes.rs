//! Volume polynomials `V_{g,n}(x_1, ..., x_n)` assembled from brackets, and
//! the ratio diagnostics built on them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num::{BigInt, One, ToPrimitive};

use crate::arith::{coeff_b, eval_numeric, factorial, PiPoly, PiScalar, Rat};
use crate::error::{out_of_range, Error, Result};
use crate::intersection::{check_stable, dimension, multisets, BracketEngine, BracketKey};
use crate::topology::{check_split, euler, SplitPair};

pub const DUMP_HEADER: &str = "wpvol v1";

/// The coefficient table of `V_{g,n}` in the undoubled boundary lengths.
/// Entry `d` is the coefficient of `prod x_i^(2 d_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumePolynomial {
    g: u32,
    n: u32,
    coeffs: Vec<(BracketKey, PiScalar)>,
}

/// `4^|d| prod (2d_i + 1)!`.
fn coefficient_denominator(key: &BracketKey) -> BigInt {
    let mut den = BigInt::one() << (2 * key.weight() as u64);
    for &(v, c) in key.parts() {
        for _ in 0..c {
            den *= factorial(2 * v + 1);
        }
    }
    den
}

/// Minimal ring interface shared by the exact and the floating evaluator.
trait Ring: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn from_coeff(c: &PiScalar) -> Self;
}

impl Ring for PiPoly {
    fn zero() -> Self {
        PiPoly::zero()
    }
    fn one() -> Self {
        PiPoly::one()
    }
    fn is_zero(&self) -> bool {
        PiPoly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn from_coeff(c: &PiScalar) -> Self {
        c.clone().into()
    }
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn from_coeff(c: &PiScalar) -> Self {
        c.to_f64()
    }
}

impl VolumePolynomial {
    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Coefficients keyed by exponent multiset, in descending key order.
    pub fn coeffs(&self) -> &[(BracketKey, PiScalar)] {
        &self.coeffs
    }

    pub fn coeff(&self, d: &[u32]) -> PiScalar {
        if d.len() != self.n as usize {
            return PiScalar::zero();
        }
        let key = BracketKey::new(self.g, d);
        self.coeffs
            .binary_search_by(|(k, _)| key.cmp(k))
            .map(|i| self.coeffs[i].1.clone())
            .unwrap_or_default()
    }

    pub fn constant(&self) -> PiScalar {
        self.coeff(&vec![0; self.n as usize])
    }

    /// Sums `coeff(d) prod x_i^(2 d_i)` over all exponent vectors. The table
    /// is symmetric, so the positions are folded in one at a time while only
    /// the multiset of exponents placed so far is remembered.
    fn evaluate<T: Ring>(&self, squares: &[T]) -> Result<T> {
        if squares.len() != self.n as usize {
            return Err(Error::Arity { expected: self.n as usize, got: squares.len() });
        }
        let top = dimension(self.g, self.n).max(0) as u32;
        let mut states: HashMap<Vec<(u32, u32)>, (u32, T)> = HashMap::new();
        states.insert(Vec::new(), (0, T::one()));
        for y in squares {
            let mut powers = vec![T::one()];
            if !y.is_zero() {
                for d in 1..=top as usize {
                    let p = powers[d - 1].mul(y);
                    powers.push(p);
                }
            }
            let mut next: HashMap<Vec<(u32, u32)>, (u32, T)> = HashMap::with_capacity(states.len());
            for (parts, (w, val)) in &states {
                for (d, pw) in powers.iter().enumerate().take((top - w) as usize + 1) {
                    let mut p = parts.clone();
                    if d > 0 {
                        insert_nonzero(&mut p, d as u32);
                    }
                    let term = val.mul(pw);
                    next.entry(p)
                        .and_modify(|e| e.1 = e.1.add(&term))
                        .or_insert((w + d as u32, term));
                }
            }
            states = next;
        }
        let mut keys: Vec<_> = states.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        let mut acc = T::zero();
        for (parts, (_, val)) in keys {
            let mut d: Vec<u32> = parts.iter().flat_map(|&(v, c)| std::iter::repeat_n(v, c as usize)).collect();
            d.resize(self.n as usize, 0);
            let c = self.coeff(&d);
            if !c.is_zero() {
                acc = acc.add(&T::from_coeff(&c).mul(&val));
            }
        }
        Ok(acc)
    }

    /// Exact value at the given boundary lengths.
    pub fn eval(&self, lengths: &[PiPoly]) -> Result<PiPoly> {
        let squares: Vec<PiPoly> = lengths.iter().map(|x| x * x).collect();
        if squares.len() != self.n as usize {
            return Err(Error::Arity { expected: self.n as usize, got: squares.len() });
        }
        self.evaluate(&squares)
    }

    /// Double-precision value at the given boundary lengths.
    pub fn eval_f64(&self, lengths: &[f64]) -> Result<f64> {
        let squares: Vec<f64> = lengths.iter().map(|x| x * x).collect();
        self.evaluate(&squares)
    }

    /// Coefficients of `V(x, ..., x, 0, ..., 0)` (first `k` entries equal to
    /// `x`) as a polynomial in `x^2`: entry `j` multiplies `x^(2j)`.
    pub fn diagonal_coeffs(&self, k: u32) -> Result<Vec<PiScalar>> {
        if k > self.n {
            return Err(Error::Arity { expected: self.n as usize, got: k as usize });
        }
        let top = dimension(self.g, self.n).max(0) as usize;
        let mut out = vec![PiPoly::zero(); top + 1];
        for (key, c) in &self.coeffs {
            let d = key.expanded();
            let zeros = d.iter().filter(|&&v| v == 0).count() as u32;
            let nonzero = self.n - zeros;
            if nonzero > k {
                continue;
            }
            // Number of ways to place the nonzero exponents in the first k
            // slots: k! / (prod c_v! * (k - nonzero)!).
            let mut ways = factorial(k) / factorial(k - nonzero);
            for &(v, cnt) in key.parts() {
                if v > 0 {
                    ways /= factorial(cnt);
                }
            }
            let deg = key.weight() as usize;
            out[deg].add_term(&c.scale(&Rat::from_integer(ways)));
        }
        Ok(out.into_iter().map(|p| p.as_scalar().expect("homogeneous")).collect())
    }

    /// Lines of the `wpvol v1` dump, without the header.
    pub fn dump_lines(&self) -> String {
        let mut s = String::new();
        for (k, c) in &self.coeffs {
            let _ = writeln!(s, "{}|{}|{}|{}", self.g, self.n, k.render_parts(), c);
        }
        s
    }
}

fn insert_nonzero(parts: &mut Vec<(u32, u32)>, v: u32) {
    match parts.binary_search_by(|&(x, _)| v.cmp(&x)) {
        Ok(i) => parts[i].1 += 1,
        Err(i) => parts.insert(i, (v, 1)),
    }
}

/// Writes polynomials in the `wpvol v1` format.
pub fn write_dump(path: &Path, polys: &[VolumePolynomial]) -> Result<()> {
    let mut s = String::from(DUMP_HEADER);
    s.push('\n');
    for p in polys {
        s.push_str(&p.dump_lines());
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Reads a `wpvol v1` dump back into polynomials, in file order.
pub fn read_dump(path: &Path) -> Result<Vec<VolumePolynomial>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("");
    if header != DUMP_HEADER {
        return Err(Error::Version { path: path.to_path_buf(), expected: DUMP_HEADER.into(), found: header.into() });
    }
    let mut out: Vec<VolumePolynomial> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let malformed = |msg: &str| Error::Malformed { path: path.to_path_buf(), line: i + 2, msg: msg.into() };
        let f: Vec<&str> = line.split('|').collect();
        if f.len() != 4 {
            return Err(malformed("expected 4 fields"));
        }
        let g: u32 = f[0].parse().map_err(|_| malformed("bad genus"))?;
        let n: u32 = f[1].parse().map_err(|_| malformed("bad n"))?;
        let key = BracketKey::parse_parts(g, f[2]).filter(|k| k.n() == n).ok_or_else(|| malformed("bad exponents"))?;
        let c: PiScalar = f[3].parse().map_err(|e: Error| malformed(&e.to_string()))?;
        match out.last_mut() {
            Some(p) if p.g == g && p.n == n => p.coeffs.push((key, c)),
            _ => out.push(VolumePolynomial { g, n, coeffs: vec![(key, c)] }),
        }
    }
    for p in &mut out {
        p.coeffs.sort_by(|a, b| b.0.cmp(&a.0));
    }
    Ok(out)
}

/// `V_{g,n}`, the constant term of the volume polynomial.
pub fn volume(e: &BracketEngine, g: u32, n: u32) -> Result<PiScalar> {
    e.bracket(g, &vec![0; n as usize])
}

pub fn volume_poly(e: &BracketEngine, g: u32, n: u32) -> Result<VolumePolynomial> {
    check_stable(g, n)?;
    e.check_budget(g, n)?;
    let top = dimension(g, n).max(0) as u32;
    let mut coeffs = Vec::new();
    for d in multisets(n, top) {
        let key = BracketKey::new(g, &d);
        let b = e.bracket_key(&key);
        if b.is_zero() {
            continue;
        }
        let den = Rat::from_integer(coefficient_denominator(&key));
        coeffs.push((key, b.scale(&den.recip())));
    }
    coeffs.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(VolumePolynomial { g, n, coeffs })
}

/// Exact `V_{g,n}(x_1, ..., x_n)`.
pub fn volume_at(e: &BracketEngine, g: u32, n: u32, lengths: &[PiPoly]) -> Result<PiPoly> {
    if lengths.len() != n as usize {
        return Err(Error::Arity { expected: n as usize, got: lengths.len() });
    }
    volume_poly(e, g, n)?.eval(lengths)
}

/// `(2g-2+n) V_{g,n} / V_{g,n+1}`.
pub fn mz_ratio(e: &BracketEngine, g: u32, n: u32) -> Result<PiScalar> {
    check_stable(g, n)?;
    let v = volume(e, g, n)?;
    let w = volume(e, g, n + 1)?;
    v.scale(&Rat::from_integer(euler(g, n).into())).checked_div(&w)
}

/// `V_{g,n}^2 / (V_{g,n-1} V_{g,n+1})`, an exact rational.
pub fn ratio_r(e: &BracketEngine, g: u32, n: u32) -> Result<Rat> {
    if n == 0 {
        return Err(out_of_range("n", "ratio_R needs n >= 1"));
    }
    check_stable(g, n - 1)?;
    let v = volume(e, g, n)?;
    let below = volume(e, g, n - 1)?;
    let above = volume(e, g, n + 1)?;
    let r = v.pow(2).checked_div(&(&below * &above))?;
    assert_eq!(r.pideg(), 0, "pi-degrees must cancel in ratio_R");
    Ok(r.coeff().clone())
}

/// Both sides of the exact ratio identity and their difference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: PiScalar,
    pub rhs: PiPoly,
    pub residual: PiPoly,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// `1/2 sum_{m=1}^{3g-2+n} (-1)^(m-1) b_m c_m(g,n)`.
pub fn alternating_sum(e: &BracketEngine, g: u32, n: u32) -> Result<PiPoly> {
    let top = dimension(g, n + 1);
    let mut acc = PiPoly::zero();
    for m in 1..=top.max(0) as u32 {
        let t = &coeff_b(m)? * &e.c_m(g, n, m)?;
        acc.add_term(&if m % 2 == 1 { t } else { -t });
    }
    Ok(acc.mul_scalar(&PiScalar::frac(1, 2, 0)))
}

pub fn identity_check(e: &BracketEngine, g: u32, n: u32) -> Result<IdentityCheck> {
    check_stable(g, n)?;
    let lhs = mz_ratio(e, g, n)?;
    let rhs = alternating_sum(e, g, n)?;
    let residual = &PiPoly::from(lhs.clone()) - &rhs;
    Ok(IdentityCheck { lhs, rhs, residual })
}

/// `V_{g,n} sqrt(2g-2+n) / ((2g-3+n)! (4 pi^2)^(2g-3+n))`.
pub fn cor1_bound_check(e: &BracketEngine, g: u32, n: u32) -> Result<f64> {
    check_stable(g, n)?;
    let chi = euler(g, n);
    let k = (chi - 1) as u32;
    let den = PiScalar::new(Rat::from_integer(factorial(k) << (2 * k as u64)), 2 * k as i32);
    let q = volume(e, g, n)?.checked_div(&den)?;
    let v = eval_numeric(q, 30)?.to_f64();
    Ok(v * (chi as f64).sqrt())
}

/// The two sides of the product-of-volumes bound for a split in `I_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LRatio {
    pub exact_lhs: PiScalar,
    pub exact_rhs: Rat,
    pub lhs: f64,
    pub rhs: f64,
}

/// `V_{g1,n1} V_{g2,n2} / V_{g,n}` against `m^m (chi-m)^(chi-m) / chi^chi`.
pub fn lratio_check(e: &BracketEngine, m: u32, split: &SplitPair, g: u32, n: u32) -> Result<LRatio> {
    check_split(m, split, g, n)?;
    let chi = euler(g, n) as u32;
    let lhs = (&volume(e, split.g1, split.n1)? * &volume(e, split.g2, split.n2)?).checked_div(&volume(e, g, n)?)?;
    let pw = |b: u32, x: u32| Rat::from_integer(num::pow(BigInt::from(b), x as usize));
    let rhs = pw(m, m) * pw(chi - m, chi - m) / pw(chi, chi);
    Ok(LRatio {
        lhs: eval_numeric(lhs.clone(), 30)?.to_f64(),
        rhs: rhs.to_f64().unwrap_or(f64::NAN),
        exact_lhs: lhs,
        exact_rhs: rhs,
    })
}

/// `V(x)` integrated against `prod x_i dx_i` over `[0, L]^k` in the first
/// `k` slots with the remaining slots set to zero. `L^2` is supplied as an
/// exact value; the result is returned as a polynomial in `L^2`, entry `j`
/// multiplying `L^(2j)`.
pub(crate) fn box_moment_coeffs(poly: &VolumePolynomial, k: u32) -> Vec<PiScalar> {
    // Each monomial x^(2d+1) integrates to L^(2d+2)/(2d+2).
    let top = dimension(poly.g, poly.n).max(0) as usize;
    let mut out = vec![PiPoly::zero(); top + k as usize + 1];
    for (key, c) in poly.coeffs() {
        let d = key.expanded();
        let nonzero: Vec<u32> = d.iter().copied().filter(|&v| v > 0).collect();
        if nonzero.len() as u32 > k {
            continue;
        }
        let zeros_in_box = k as usize - nonzero.len();
        let mut ways = factorial(k) / factorial(zeros_in_box as u32);
        for &(v, cnt) in key.parts() {
            if v > 0 {
                ways /= factorial(cnt);
            }
        }
        let mut den = BigInt::one() << zeros_in_box;
        for &v in &nonzero {
            den *= 2 * v + 2;
        }
        let deg = key.weight() as usize + k as usize;
        out[deg].add_term(&c.scale(&Rat::new(ways, den)));
    }
    out.into_iter().map(|p| p.as_scalar().expect("homogeneous")).collect()
}
