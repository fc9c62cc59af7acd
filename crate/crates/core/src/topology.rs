//! Separating multi-curves: the split sets `I_m`, puncture pairings and their
//! multiplicities.

use std::fmt;

use num::BigInt;

use crate::arith::{binomial, factorial};
use crate::error::{out_of_range, Error, Result};

/// A split of a surface of signature `(g, n)` into `(g1, n1)` and `(g2, n2)`
/// along `k` curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitPair {
    pub g1: u32,
    pub n1: u32,
    pub g2: u32,
    pub n2: u32,
    n: u32,
}

impl SplitPair {
    /// Builds a split of `(g, n)`, checking the genus and curve count.
    pub fn new(g1: u32, n1: u32, g2: u32, n2: u32, g: u32, n: u32) -> Result<Self> {
        let s = SplitPair { g1, n1, g2, n2, n };
        let total = n1 + n2;
        let bad = || out_of_range("split", format!("{s} does not split (g={g}, n={n})"));
        if total <= n || !(total - n).is_multiple_of(2) {
            return Err(bad());
        }
        if g1 + g2 + s.k() != g + 1 {
            return Err(bad());
        }
        Ok(s)
    }

    /// Number of curves along which the surface is cut.
    pub fn k(&self) -> u32 {
        (self.n1 + self.n2 - self.n) / 2
    }

    /// Euler size `2g1 - 2 + n1` of the first piece.
    pub fn m(&self) -> u32 {
        2 * self.g1 + self.n1 - 2
    }

    pub fn ambient_n(&self) -> u32 {
        self.n
    }
}

impl fmt::Display for SplitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}|{},{}|{})", self.g1, self.n1, self.g2, self.n2, (self.n1 + self.n2).saturating_sub(self.n) / 2)
    }
}

/// Euler size `2g - 2 + n`.
pub fn euler(g: u32, n: u32) -> i64 {
    2 * g as i64 - 2 + n as i64
}

/// The set `I_m` for signature `(g, n)`, sorted by `(g1, n1, g2, n2)`.
///
/// Splits with `k = 0` satisfy the three defining conditions formally but do
/// not correspond to any curve, so they are left out.
pub fn enumerate_splits(m: u32, g: u32, n: u32) -> Result<Vec<SplitPair>> {
    let chi = euler(g, n);
    if chi < 2 {
        return Err(out_of_range("signature", format!("2g-2+n = {chi} < 2 for (g={g}, n={n})")));
    }
    if m == 0 || m as i64 > chi / 2 {
        return Err(out_of_range("m", format!("m = {m} not in [1, {}]", chi / 2)));
    }
    let rest = chi - m as i64;
    let mut out = Vec::new();
    for n1 in 1..=m + 2 {
        if !(m + 2 - n1).is_multiple_of(2) {
            continue;
        }
        let g1 = (m + 2 - n1) / 2;
        let lo = (n as i64 - n1 as i64).max(1);
        let hi = n as i64 + n1 as i64;
        for n2 in lo..=hi {
            let twice_g2 = rest + 2 - n2;
            if twice_g2 < 0 || twice_g2 % 2 != 0 {
                continue;
            }
            let (g2, n2) = ((twice_g2 / 2) as u32, n2 as u32);
            if n1 + n2 <= n {
                continue;
            }
            out.push(SplitPair { g1, n1, g2, n2, n });
        }
    }
    out.sort();
    debug_assert!(out.iter().all(|s| s.g1 + s.g2 + s.k() == g + 1));
    Ok(out)
}

/// Checks that `split` belongs to `I_m` for `(g, n)`.
pub fn check_split(m: u32, split: &SplitPair, g: u32, n: u32) -> Result<()> {
    let all = enumerate_splits(m, g, n)?;
    if all.iter().any(|s| (s.g1, s.n1, s.g2, s.n2) == (split.g1, split.n1, split.g2, split.n2)) {
        Ok(())
    } else {
        Err(Error::InvalidSplit { split: split.to_string(), m, g, n })
    }
}

/// Upper bound `2(m+3)^2` on `|I_m|`.
pub fn split_count_bound(m: u32) -> u64 {
    2 * (m as u64 + 3).pow(2)
}

/// `k` disjoint unordered pairs of punctures out of `{1, ..., n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PantsPairing {
    pairs: Vec<(u32, u32)>,
}

impl PantsPairing {
    pub fn new(n: u32, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut seen = vec![false; n as usize + 1];
        let mut norm = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            for v in [i, j] {
                if v == 0 || v > n || seen[v as usize] {
                    return Err(out_of_range("pairing", format!("{pairs:?} on {n} punctures")));
                }
                seen[v as usize] = true;
            }
            norm.push((i.min(j), i.max(j)));
        }
        Ok(PantsPairing { pairs: norm })
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }
}

/// `n! / (2^k (n-2k)!)`, the number of sequences of `k` disjoint unordered
/// pairs.
pub fn pairing_multiplicity(n: u32, k: u32) -> Result<BigInt> {
    if k == 0 || n < 2 * k {
        return Err(out_of_range("pairing", format!("need n >= 2k >= 2, got n={n}, k={k}")));
    }
    Ok(factorial(n) / (factorial(n - 2 * k) << k))
}

/// `C(n, n1 - k)`: the ways to hand out the punctures of a split.
pub fn split_type_count(n: u32, n1: u32, k: u32) -> Result<BigInt> {
    if k > n1 || n1 - k > n {
        return Err(out_of_range("split type", format!("n1-k = {}-{} not in [0, {n}]", n1, k)));
    }
    Ok(binomial(n, n1 - k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuples(v: &[SplitPair]) -> Vec<(u32, u32, u32, u32)> {
        v.iter().map(|s| (s.g1, s.n1, s.g2, s.n2)).collect()
    }

    #[test]
    fn splits_of_genus_two_one_puncture() {
        let s = enumerate_splits(1, 2, 1).unwrap();
        assert_eq!(tuples(&s), vec![(0, 3, 0, 4), (0, 3, 1, 2), (1, 1, 1, 2)]);
        assert_eq!(s.iter().map(SplitPair::k).collect::<Vec<_>>(), vec![3, 2, 1]);
        assert_eq!(s[2].to_string(), "(1,1|1,2|1)");
        assert!(enumerate_splits(5, 2, 1).is_err());
        assert!(enumerate_splits(0, 2, 1).is_err());
        assert!(enumerate_splits(1, 1, 1).is_err());
    }

    #[test]
    fn split_conditions_hold() {
        for g in 0..8 {
            for n in 0..12 {
                let chi = euler(g, n);
                if chi < 2 {
                    continue;
                }
                for m in 1..=(chi / 2) as u32 {
                    for s in enumerate_splits(m, g, n).unwrap() {
                        assert_eq!(euler(s.g1, s.n1) + euler(s.g2, s.n2), chi);
                        assert_eq!(s.m(), m);
                        assert!(euler(s.g1, s.n1) <= euler(s.g2, s.n2));
                        assert!(n as i64 - s.n1 as i64 <= s.n2 as i64 && s.n2 <= n + s.n1);
                        assert!(s.k() >= 1);
                        assert_eq!(s.g1 + s.g2 + s.k(), g + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn membership() {
        let ok = SplitPair::new(0, 3, 1, 2, 1, 3).unwrap();
        assert!(check_split(1, &ok, 1, 3).is_ok());
        let bad = SplitPair::new(1, 1, 0, 4, 2, 1).unwrap();
        assert!(matches!(check_split(1, &bad, 2, 1), Err(Error::InvalidSplit { .. })));
        assert!(SplitPair::new(0, 3, 0, 3, 2, 6).is_err());
    }

    #[test]
    fn multiplicities() {
        assert_eq!(pairing_multiplicity(2, 1).unwrap(), BigInt::from(1));
        assert_eq!(pairing_multiplicity(4, 2).unwrap(), BigInt::from(6));
        assert_eq!(pairing_multiplicity(6, 2).unwrap(), BigInt::from(90));
        assert!(pairing_multiplicity(3, 2).is_err());
        assert_eq!(split_type_count(1, 3, 3).unwrap(), BigInt::from(1));
        assert_eq!(split_type_count(5, 3, 1).unwrap(), BigInt::from(10));
        assert_eq!(split_type_count(4, 2, 2).unwrap(), BigInt::from(1));
        assert!(split_type_count(2, 5, 1).is_err());
    }

    #[test]
    fn pairing_validation() {
        let p = PantsPairing::new(4, &[(3, 1), (2, 4)]).unwrap();
        assert_eq!(p.pairs(), &[(1, 3), (2, 4)]);
        assert!(PantsPairing::new(4, &[(1, 2), (2, 3)]).is_err());
        assert!(PantsPairing::new(3, &[(1, 4)]).is_err());
    }
}
