use std::collections::BTreeSet;

use num::BigInt;
use proptest::prelude::*;
use wpvol::topology::{enumerate_splits, euler, pairing_multiplicity, split_count_bound, split_type_count};

/// Every `(g1, n1, g2, n2)` in a box large enough to hold `I_m`, filtered by
/// the defining conditions alone.
fn brute_force(m: u32, g: u32, n: u32) -> Vec<(u32, u32, u32, u32)> {
    let chi = euler(g, n);
    let mut out = Vec::new();
    for g1 in 0..=g + 1 {
        for n1 in 1..=n + 2 * g + 4 {
            for g2 in 0..=g + 1 {
                for n2 in 1..=n + 2 * g + 4 {
                    let (e1, e2) = (euler(g1, n1), euler(g2, n2));
                    let sum = (n1 + n2) as i64 - n as i64;
                    if e1 + e2 == chi
                        && e1 == m as i64
                        && e1 <= e2
                        && n as i64 - n1 as i64 <= n2 as i64
                        && n2 <= n + n1
                        && sum >= 2
                        && sum % 2 == 0
                    {
                        out.push((g1, n1, g2, n2));
                    }
                }
            }
        }
    }
    out.sort();
    out
}

#[test]
fn splits_match_brute_force() {
    for g in 0..=5 {
        for n in 0..=8 {
            let chi = euler(g, n);
            if chi < 2 {
                continue;
            }
            for m in 1..=(chi / 2) as u32 {
                let got: Vec<_> = enumerate_splits(m, g, n).unwrap().iter().map(|s| (s.g1, s.n1, s.g2, s.n2)).collect();
                assert_eq!(got, brute_force(m, g, n), "m={m} g={g} n={n}");
            }
        }
    }
}

#[test]
fn split_counts_within_bound() {
    for g in 0..=12 {
        for n in 0..=20 {
            let chi = euler(g, n);
            if chi < 2 {
                continue;
            }
            for m in 1..=((chi / 2) as u32).min(12) {
                let len = enumerate_splits(m, g, n).unwrap().len() as u64;
                assert!(len <= split_count_bound(m), "|I_{m}({g},{n})| = {len}");
            }
        }
    }
}

/// Ordered sequences of `k` disjoint unordered pairs out of `n` points.
fn count_pairings(n: u32, k: u32, used: &mut BTreeSet<u32>) -> u64 {
    if k == 0 {
        return 1;
    }
    let mut total = 0;
    for i in 1..=n {
        for j in i + 1..=n {
            if used.contains(&i) || used.contains(&j) {
                continue;
            }
            used.insert(i);
            used.insert(j);
            total += count_pairings(n, k - 1, used);
            used.remove(&i);
            used.remove(&j);
        }
    }
    total
}

#[test]
fn pairing_multiplicity_matches_enumeration() {
    for n in 2..=10 {
        for k in 1..=4 {
            if 2 * k > n {
                assert!(pairing_multiplicity(n, k).is_err());
                continue;
            }
            let brute = count_pairings(n, k, &mut BTreeSet::new());
            assert_eq!(pairing_multiplicity(n, k).unwrap(), BigInt::from(brute), "n={n} k={k}");
        }
    }
}

proptest! {
    #[test]
    fn split_type_count_counts_subsets(n in 0u32..12, n1 in 1u32..12, k in 0u32..6) {
        prop_assume!(k <= n1 && n1 - k <= n);
        let size = (n1 - k) as usize;
        let subsets = (0u32..1 << n).filter(|s| s.count_ones() as usize == size).count();
        prop_assert_eq!(split_type_count(n, n1, k).unwrap(), BigInt::from(subsets));
    }
}
