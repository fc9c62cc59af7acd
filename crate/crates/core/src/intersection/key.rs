use std::fmt;

use crate::error::{Error, Result};

/// Canonical identifier of a bracket `[tau_{d_1} ... tau_{d_n}]_{g,n}`.
///
/// The exponent multiset is stored as `(value, count)` pairs sorted by
/// descending value with no zero counts, so every permutation of `d` maps to
/// the same key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BracketKey {
    g: u32,
    parts: Vec<(u32, u32)>,
}

pub(crate) fn insert_value(parts: &mut Vec<(u32, u32)>, v: u32) {
    match parts.binary_search_by(|&(x, _)| v.cmp(&x)) {
        Ok(i) => parts[i].1 += 1,
        Err(i) => parts.insert(i, (v, 1)),
    }
}

pub(crate) fn remove_value(parts: &mut Vec<(u32, u32)>, v: u32) {
    let i = parts.binary_search_by(|&(x, _)| v.cmp(&x)).expect("value present in multiset");
    if parts[i].1 == 1 {
        parts.remove(i);
    } else {
        parts[i].1 -= 1;
    }
}

pub fn is_stable(g: u32, n: u32) -> bool {
    2 * g as i64 - 2 + n as i64 > 0
}

pub fn check_stable(g: u32, n: u32) -> Result<()> {
    if is_stable(g, n) {
        Ok(())
    } else {
        Err(Error::UnstableSignature { g, n })
    }
}

/// `3g - 3 + n`, the complex dimension of the moduli space.
pub fn dimension(g: u32, n: u32) -> i64 {
    3 * g as i64 - 3 + n as i64
}

impl BracketKey {
    pub fn new(g: u32, d: &[u32]) -> Self {
        let mut parts = Vec::new();
        for &v in d {
            insert_value(&mut parts, v);
        }
        BracketKey { g, parts }
    }

    /// Validating constructor for user-facing input.
    pub fn checked(g: u32, d: &[i64]) -> Result<Self> {
        check_stable(g, d.len() as u32)?;
        if let Some(&v) = d.iter().find(|&&v| v < 0) {
            return Err(Error::NegativeIndex(v));
        }
        let d: Vec<u32> = d.iter().map(|&v| v as u32).collect();
        Ok(Self::new(g, &d))
    }

    pub(crate) fn from_parts(g: u32, parts: Vec<(u32, u32)>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(parts.iter().all(|p| p.1 > 0));
        BracketKey { g, parts }
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> u32 {
        self.parts.iter().map(|p| p.1).sum()
    }

    pub fn parts(&self) -> &[(u32, u32)] {
        &self.parts
    }

    /// `|d|`.
    pub fn weight(&self) -> i64 {
        self.parts.iter().map(|&(v, c)| v as i64 * c as i64).sum()
    }

    /// `d_0 = 3g - 3 + n - |d|`; negative when the bracket vanishes.
    pub fn d0(&self) -> i64 {
        dimension(self.g, self.n()) - self.weight()
    }

    pub fn max_entry(&self) -> Option<u32> {
        self.parts.first().map(|p| p.0)
    }

    /// The exponents, largest first.
    pub fn expanded(&self) -> Vec<u32> {
        self.parts.iter().flat_map(|&(v, c)| std::iter::repeat_n(v, c as usize)).collect()
    }

    /// `v1:c1,v2:c2,...` as used by the cache and volume dump files.
    pub fn render_parts(&self) -> String {
        self.parts.iter().map(|(v, c)| format!("{v}:{c}")).collect::<Vec<_>>().join(",")
    }

    pub fn parse_parts(g: u32, s: &str) -> Option<Self> {
        let mut parts: Vec<(u32, u32)> = Vec::new();
        if !s.is_empty() {
            for item in s.split(',') {
                let (v, c) = item.split_once(':')?;
                let v: u32 = v.parse().ok()?;
                let c: u32 = c.parse().ok()?;
                if c == 0 || parts.last().is_some_and(|&(pv, _)| pv <= v) {
                    return None;
                }
                parts.push((v, c));
            }
        }
        Some(BracketKey { g, parts })
    }
}

impl fmt::Display for BracketKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.g, self.render_parts())
    }
}
