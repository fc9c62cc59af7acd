//! Memoized evaluation of the bracket recursion.
//!
//! Every bracket `[prod tau_{d_i}]_{g,n}` equals `q * pi^(2 d_0)` with `q`
//! rational, so the engine only stores `q`. Entries of the recursion:
//!
//! * `A^j = 8 sum_L (2d_j+1) a_L [tau_{d_1+d_j+L-1} prod_{i!=1,j} tau_{d_i}]_{g,n-1}`
//! * `B   = 16 sum_L sum_{k1+k2=L+d_1-2} a_L [tau_k1 tau_k2 prod_{i!=1} tau_{d_i}]_{g-1,n+1}`
//! * `C   = 16 sum_{I,J,g'} sum_L sum_{k1+k2=L+d_1-2} a_L [tau_k1 tau_I]_{g',|I|+1} [tau_k2 tau_J]_{g-g',|J|+1}`
//!
//! Indices below zero and unstable sub-signatures contribute nothing. The
//! distinguished entry `d_1` is the largest exponent.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num::{BigInt, One, Signed, Zero};
use parking_lot::RwLock;
use rayon::prelude::*;

use super::key::{check_stable, dimension, insert_value, is_stable, remove_value, BracketKey};
use crate::arith::{binomial, coeff_a_rat, factorial, PiScalar, Rat};
use crate::error::{out_of_range, Error, Result};

pub const CACHE_HEADER: &str = "wpbracket v1";

/// Shared table of computed brackets. Insertion is idempotent.
#[derive(Debug, Default)]
pub struct BracketCache {
    entries: RwLock<HashMap<BracketKey, Rat>>,
}

impl BracketCache {
    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &BracketKey) -> Option<PiScalar> {
        self.entries.read().get(key).map(|q| PiScalar::new(q.clone(), 2 * key.d0() as i32))
    }

    fn get_rat(&self, key: &BracketKey) -> Option<Rat> {
        self.entries.read().get(key).cloned()
    }

    fn insert_rat(&self, key: BracketKey, q: Rat) -> Rat {
        debug_assert!(key.d0() >= 0);
        debug_assert!(!q.is_negative(), "negative bracket at {key}");
        self.entries.write().entry(key).or_insert(q).clone()
    }

    /// Inserts a value after checking that its pi-degree is `2 d_0`.
    /// Returns `true` if the key was new.
    pub fn insert(&self, key: BracketKey, value: &PiScalar) -> Result<bool> {
        let d0 = key.d0();
        if d0 < 0 || !is_stable(key.g(), key.n()) {
            return Err(out_of_range("cache key", key.to_string()));
        }
        if !value.is_zero() && value.pideg() as i64 != 2 * d0 {
            return Err(out_of_range(
                "pi-degree",
                format!("{key} needs pi^{} but got pi^{}", 2 * d0, value.pideg()),
            ));
        }
        let mut map = self.entries.write();
        match map.get(&key) {
            Some(old) if old != value.coeff() => Err(out_of_range("cache value", format!("conflicting value for {key}"))),
            Some(_) => Ok(false),
            None => {
                map.insert(key, value.coeff().clone());
                Ok(true)
            }
        }
    }

    /// Entries sorted by `(g, n, exponents)`.
    pub fn sorted_entries(&self) -> Vec<(BracketKey, PiScalar)> {
        let map = self.entries.read();
        let mut out: Vec<_> = map
            .iter()
            .map(|(k, q)| (k.clone(), PiScalar::new(q.clone(), 2 * k.d0() as i32)))
            .collect();
        out.sort_by(|a, b| (a.0.g(), a.0.n(), &a.0).cmp(&(b.0.g(), b.0.n(), &b.0)));
        out
    }

    pub fn save(&self, path: &Path) -> Result<usize> {
        let entries = self.sorted_entries();
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "{CACHE_HEADER}")?;
        for (k, v) in &entries {
            writeln!(w, "{}|{}|{}", k.g(), k.render_parts(), v)?;
        }
        w.flush()?;
        Ok(entries.len())
    }

    /// Loads a cache file, returning the number of entries it holds.
    pub fn load(&self, path: &Path) -> Result<usize> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        if header != CACHE_HEADER {
            return Err(Error::Version {
                path: path.to_path_buf(),
                expected: CACHE_HEADER.to_string(),
                found: header.to_string(),
            });
        }
        let mut count = 0;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            if line.is_empty() {
                continue;
            }
            let malformed = |msg: String| Error::Malformed { path: path.to_path_buf(), line: lineno, msg };
            let fields: Vec<&str> = line.split('|').collect();
            if fields.len() != 3 {
                return Err(malformed(format!("expected 3 fields, found {}", fields.len())));
            }
            let g: u32 = fields[0].parse().map_err(|_| malformed(format!("bad genus {:?}", fields[0])))?;
            let key = BracketKey::parse_parts(g, fields[1])
                .ok_or_else(|| malformed(format!("bad exponent list {:?}", fields[1])))?;
            let value: PiScalar = fields[2].parse().map_err(|e: Error| malformed(e.to_string()))?;
            self.insert(key, &value).map_err(|e| malformed(e.to_string()))?;
            count += 1;
        }
        Ok(count)
    }
}

/// Statistics reported by [`BracketEngine::warm`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WarmStats {
    pub signatures: usize,
    pub new_entries: usize,
    pub total_entries: usize,
    pub elapsed: Duration,
}

/// Stable signatures `(g, n)` with `3g - 3 + n <= budget`, ordered by
/// dimension, then genus.
pub fn signatures_within(budget: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let b = budget as i64;
    let mut g = 0;
    while dimension(g, 0) <= b {
        let mut n = 0;
        while dimension(g, n) <= b {
            if is_stable(g, n) {
                out.push((g, n));
            }
            n += 1;
        }
        g += 1;
    }
    out.sort_by_key(|&(g, n)| (dimension(g, n), g));
    out
}

/// All exponent multisets of size `n` with `|d| <= max_weight`.
pub fn multisets(n: u32, max_weight: u32) -> Vec<Vec<u32>> {
    fn rec(rem_slots: u32, max_part: u32, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem_slots == 0 {
            out.push(cur.clone());
            return;
        }
        for v in (0..=max_part.min(budget)).rev() {
            cur.push(v);
            rec(rem_slots - 1, v, budget - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_weight, max_weight, &mut Vec::new(), &mut out);
    out
}

type ConvolvedKey = (u32, Vec<(u32, u32)>, i64);

/// The bracket engine: recursion, memo table and an optional budget on the
/// dimension of signatures requested through the public API.
#[derive(Debug)]
pub struct BracketEngine {
    cache: BracketCache,
    alpha: RwLock<Arc<Vec<Rat>>>,
    // (g, J, s) -> sum_k a_{s+k} [tau_k tau_J]_{g,|J|+1}, shared by every
    // split whose second half is (g, J).
    convolved: RwLock<HashMap<ConvolvedKey, Rat>>,
    budget: Option<u32>,
}

impl Default for BracketEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl BracketEngine {
    pub fn new() -> Self {
        BracketEngine {
            cache: BracketCache::default(),
            alpha: RwLock::new(Arc::new(Vec::new())),
            convolved: RwLock::new(HashMap::new()),
            budget: None,
        }
    }

    pub fn with_budget(budget: u32) -> Self {
        BracketEngine { budget: Some(budget), ..Self::new() }
    }

    pub fn budget(&self) -> Option<u32> {
        self.budget
    }

    pub fn cache(&self) -> &BracketCache {
        &self.cache
    }

    /// Rejects signatures whose dimension exceeds the budget.
    pub fn check_budget(&self, g: u32, n: u32) -> Result<()> {
        if let Some(b) = self.budget {
            let dim = dimension(g, n);
            if dim > b as i64 {
                return Err(Error::BudgetExceeded { g, n, dim: dim as u32, budget: b });
            }
        }
        Ok(())
    }

    fn alphas(&self, upto: usize) -> Arc<Vec<Rat>> {
        {
            let a = self.alpha.read();
            if a.len() > upto {
                return a.clone();
            }
        }
        let mut w = self.alpha.write();
        if w.len() <= upto {
            let target = (upto + 1).max(2 * w.len()).max(32);
            let mut v: Vec<Rat> = w.as_ref().clone();
            while v.len() < target {
                v.push(coeff_a_rat(v.len() as u32));
            }
            *w = Arc::new(v);
        }
        w.clone()
    }

    /// Exact bracket `[prod tau_{d_i}]_{g,n}`.
    pub fn bracket(&self, g: u32, d: &[u32]) -> Result<PiScalar> {
        let n = d.len() as u32;
        check_stable(g, n)?;
        self.check_budget(g, n)?;
        Ok(self.bracket_key(&BracketKey::new(g, d)))
    }

    /// Bracket of a canonical key; no budget check.
    pub fn bracket_key(&self, key: &BracketKey) -> PiScalar {
        let d0 = key.d0();
        if d0 < 0 {
            return PiScalar::zero();
        }
        PiScalar::new(self.raw(key), 2 * d0 as i32)
    }

    /// Rational coefficient of the bracket, memoized.
    pub(crate) fn raw(&self, key: &BracketKey) -> Rat {
        if key.d0() < 0 {
            return Rat::zero();
        }
        if let Some(q) = self.cache.get_rat(key) {
            return q;
        }
        let q = self.evaluate(key);
        self.cache.insert_rat(key.clone(), q)
    }

    fn raw_parts(&self, g: u32, parts: Vec<(u32, u32)>) -> Rat {
        self.raw(&BracketKey::from_parts(g, parts))
    }

    fn evaluate(&self, key: &BracketKey) -> Rat {
        let g = key.g();
        let n = key.n();
        if n == 0 {
            return self.dilaton(g);
        }
        match (g, n) {
            (0, 3) => {
                return if key.weight() == 0 { Rat::one() } else { Rat::zero() };
            }
            (1, 1) => {
                return match key.max_entry() {
                    Some(0) => Rat::new(1.into(), 12.into()),
                    Some(1) => Rat::new(1.into(), 2.into()),
                    _ => Rat::zero(),
                };
            }
            _ => {}
        }
        let d1 = key.max_entry().expect("n >= 1");
        let mut rest = key.parts().to_vec();
        remove_value(&mut rest, d1);
        self.recurse(g, d1, &rest)
    }

    /// `V_{g,0}` from `(2g-2) V_{g,0} = 1/2 sum_m (-1)^(m-1) b_m [tau_m]_{g,1}`.
    fn dilaton(&self, g: u32) -> Rat {
        assert!(g >= 2, "V_(g,0) needs g >= 2");
        let mut acc = Rat::zero();
        for m in 1..=(3 * g - 2) {
            let b = Rat::new(BigInt::from(m), factorial(2 * m + 1));
            let term = b * self.raw(&BracketKey::new(g, &[m]));
            if m % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc / Rat::from_integer(BigInt::from(4 * (g - 1)))
    }

    /// One application of the recursion with `d1` distinguished and the
    /// remaining exponents in `rest`. Sub-brackets come from the memo table.
    fn recurse(&self, g: u32, d1: u32, rest: &[(u32, u32)]) -> Rat {
        let n = 1 + rest.iter().map(|p| p.1).sum::<u32>();
        let rest_weight: i64 = rest.iter().map(|&(v, c)| v as i64 * c as i64).sum();
        let d0 = dimension(g, n) - d1 as i64 - rest_weight;
        if d0 < 0 {
            return Rat::zero();
        }

        let mut a_term = Rat::zero();
        if is_stable(g, n - 1) {
            for &(v, c) in rest {
                let mut base = rest.to_vec();
                remove_value(&mut base, v);
                let inner = self.convolved(g, &base, rest_weight - v as i64, 1 - d1 as i64 - v as i64);
                a_term += inner * Rat::from_integer(BigInt::from(c as u64 * (2 * v as u64 + 1)));
            }
            a_term *= Rat::from_integer(BigInt::from(8));
        }

        // Ordered pairs (k1, k2); the inner sum over k2 is a convolution.
        let mut b_term = Rat::zero();
        if g >= 1 && is_stable(g - 1, n + 1) {
            let top = dimension(g - 1, n + 1) - rest_weight;
            for k1 in 0..=top {
                let mut p = rest.to_vec();
                insert_value(&mut p, k1 as u32);
                b_term += self.convolved(g - 1, &p, rest_weight + k1, k1 + 2 - d1 as i64);
            }
            b_term *= Rat::from_integer(BigInt::from(16));
        }

        let c_term = self.split_term(g, d1, rest) * Rat::from_integer(BigInt::from(16));
        a_term + b_term + c_term
    }

    /// `sum_{k >= 0} a_{s+k} [tau_k tau_J]_{g,|J|+1}`, memoized.
    fn convolved(&self, g: u32, part: &[(u32, u32)], weight: i64, s: i64) -> Rat {
        let top = dimension(g, 1 + part.iter().map(|p| p.1).sum::<u32>()) - weight;
        if top < 0 || s + top < 0 {
            return Rat::zero();
        }
        let memo_key = (g, part.to_vec(), s);
        if let Some(v) = self.convolved.read().get(&memo_key) {
            return v.clone();
        }
        let alpha = self.alphas((s + top) as usize);
        let mut acc = Rat::zero();
        for k in (-s).max(0)..=top {
            let mut p = part.to_vec();
            insert_value(&mut p, k as u32);
            let b = self.raw_parts(g, p);
            if !b.is_zero() {
                acc += &alpha[(s + k) as usize] * b;
            }
        }
        self.convolved.write().entry(memo_key).or_insert(acc).clone()
    }

    /// The separating term, enumerating `I ⊔ J` by multiplicity classes.
    fn split_term(&self, g: u32, d1: u32, rest: &[(u32, u32)]) -> Rat {
        let mut acc = Rat::zero();
        let mut choice = vec![0u32; rest.len()];
        loop {
            // I takes choice[i] copies of class i, J the remainder.
            let mut part_i = Vec::new();
            let mut part_j = Vec::new();
            let mut mult = BigInt::one();
            let (mut size_i, mut size_j, mut w_i, mut w_j) = (0u32, 0u32, 0i64, 0i64);
            for (&(v, c), &s) in rest.iter().zip(&choice) {
                if s > 0 {
                    part_i.push((v, s));
                }
                if c - s > 0 {
                    part_j.push((v, c - s));
                }
                mult *= binomial(c, s);
                size_i += s;
                size_j += c - s;
                w_i += v as i64 * s as i64;
                w_j += v as i64 * (c - s) as i64;
            }
            let mut sub = Rat::zero();
            for g1 in 0..=g {
                let g2 = g - g1;
                if !is_stable(g1, size_i + 1) || !is_stable(g2, size_j + 1) {
                    continue;
                }
                let max1 = dimension(g1, size_i + 1) - w_i;
                for k1 in 0..=max1 {
                    let w = self.convolved(g2, &part_j, w_j, k1 + 2 - d1 as i64);
                    if w.is_zero() {
                        continue;
                    }
                    let mut p = part_i.clone();
                    insert_value(&mut p, k1 as u32);
                    let x = self.raw_parts(g1, p);
                    if !x.is_zero() {
                        sub += x * w;
                    }
                }
            }
            if !sub.is_zero() {
                acc += sub * Rat::from_integer(mult);
            }
            // Next choice vector (odometer).
            let mut i = 0;
            loop {
                if i == rest.len() {
                    return acc;
                }
                if choice[i] < rest[i].1 {
                    choice[i] += 1;
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    /// Evaluates the recursion once with `d[idx]` as the distinguished entry,
    /// bypassing the memo table at the top level. Used to check that the
    /// result does not depend on which entry is distinguished.
    pub fn bracket_with_distinguished(&self, g: u32, d: &[u32], idx: usize) -> Result<PiScalar> {
        let n = d.len() as u32;
        check_stable(g, n)?;
        if idx >= d.len() {
            return Err(out_of_range("distinguished index", format!("{idx} >= {n}")));
        }
        let key = BracketKey::new(g, d);
        let d0 = key.d0();
        if d0 < 0 {
            return Ok(PiScalar::zero());
        }
        if (g, n) == (0, 3) || (g, n) == (1, 1) {
            return Ok(self.bracket_key(&key));
        }
        let mut rest = Vec::new();
        for (i, &v) in d.iter().enumerate() {
            if i != idx {
                insert_value(&mut rest, v);
            }
        }
        Ok(PiScalar::new(self.recurse(g, d[idx], &rest), 2 * d0 as i32))
    }

    /// `c_m(g,n) = [tau_m tau_0^n]_{g,n+1} / V_{g,n+1}`.
    pub fn c_m(&self, g: u32, n: u32, m: u32) -> Result<PiScalar> {
        check_stable(g, n + 1)?;
        let top = dimension(g, n + 1);
        if m as i64 > top {
            return Err(out_of_range("m", format!("m = {m} exceeds 3g-2+n = {top}")));
        }
        self.check_budget(g, n + 1)?;
        let mut d = vec![0u32; n as usize + 1];
        d[0] = m;
        let num = self.bracket_key(&BracketKey::new(g, &d));
        let den = self.bracket_key(&BracketKey::new(g, &vec![0; n as usize + 1]));
        num.checked_div(&den)
    }

    /// Computes every bracket on every signature of dimension `<= budget`.
    ///
    /// Signatures are processed in increasing dimension, so each one only
    /// reads finished lower layers; keys inside a signature are independent
    /// and run on a pool of `threads` workers.
    pub fn warm(&self, budget: u32, threads: usize) -> Result<WarmStats> {
        let start = Instant::now();
        let before = self.cache.len();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| out_of_range("thread pool", e.to_string()))?;
        let sigs = signatures_within(budget);
        pool.install(|| {
            for &(g, n) in &sigs {
                let dim = dimension(g, n) as u32;
                let keys: Vec<BracketKey> =
                    multisets(n, dim).into_iter().map(|d| BracketKey::new(g, &d)).collect();
                keys.par_iter().for_each(|k| {
                    self.raw(k);
                });
            }
        });
        Ok(WarmStats {
            signatures: sigs.len(),
            new_entries: self.cache.len() - before,
            total_entries: self.cache.len(),
            elapsed: start.elapsed(),
        })
    }
}
