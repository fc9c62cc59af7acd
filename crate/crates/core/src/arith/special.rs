//! Bernoulli numbers, even zeta values and the recursion coefficients.

use num::{BigInt, One, Zero};
use std::sync::LazyLock;

use parking_lot::RwLock;

use super::{PiScalar, Rat};
use crate::error::{out_of_range, Result};

static BERNOULLI: LazyLock<RwLock<Vec<Rat>>> = LazyLock::new(|| RwLock::new(vec![Rat::one()]));

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Bernoulli number `B_m` with the convention `B_1 = -1/2`.
///
/// Values come from `sum_{j=0}^{m} C(m+1, j) B_j = 0` and are cached up to the
/// largest index requested so far.
pub fn bernoulli(m: u32) -> Rat {
    let m = m as usize;
    if let Some(b) = BERNOULLI.read().get(m) {
        return b.clone();
    }
    let mut table = BERNOULLI.write();
    while table.len() <= m {
        let k = table.len() as u32;
        let mut acc = Rat::zero();
        for (j, bj) in table.iter().enumerate() {
            acc += bj * Rat::from_integer(binomial(k + 1, j as u32));
        }
        let bk = -acc / Rat::from_integer(BigInt::from(k + 1));
        table.push(bk);
    }
    table[m].clone()
}

/// `zeta(2i)` as an exact multiple of `pi^(2i)`.
pub fn zeta_even(i: u32) -> Result<PiScalar> {
    if i == 0 {
        return Err(out_of_range("zeta index", "zeta(0) is not an even positive value"));
    }
    let b = bernoulli(2 * i);
    let sign = if i % 2 == 1 { Rat::one() } else { -Rat::one() };
    let two_pow = BigInt::one() << (2 * i);
    let q = sign * b * Rat::new(two_pow, 2 * factorial(2 * i));
    Ok(PiScalar::new(q, 2 * i as i32))
}

/// `a_0 = 1/2` and `a_i = zeta(2i)(1 - 2^(1-2i))` for `i >= 1`.
pub fn coeff_a(i: u32) -> PiScalar {
    if i == 0 {
        return PiScalar::frac(1, 2, 0);
    }
    let z = zeta_even(i).expect("i >= 1");
    let pow = BigInt::one() << (2 * i - 1);
    let factor = Rat::new(pow.clone() - 1u32, pow);
    z.scale(&factor)
}

/// The rational part of `a_i`, i.e. `a_i / pi^(2i)`.
pub(crate) fn coeff_a_rat(i: u32) -> Rat {
    coeff_a(i).coeff().clone()
}

/// `b_m = m pi^(2m-2) / (2m+1)!`.
pub fn coeff_b(m: u32) -> Result<PiScalar> {
    if m == 0 {
        return Err(out_of_range("b index", "b_m is defined for m >= 1"));
    }
    let q = Rat::new(BigInt::from(m), factorial(2 * m + 1));
    Ok(PiScalar::new(q, 2 * m as i32 - 2))
}
