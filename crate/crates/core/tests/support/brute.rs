//! Brute-force partition oracle, independent of the crate's counting code.
//!
//! Partitions are generated exhaustively and every rule is checked against
//! its definition on the full part list.
#![allow(dead_code)]

use rrid_core::{ConditionSet, Multiplicity};

/// All partitions of `n` as weakly decreasing part lists.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, largest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=largest.min(n)).rev() {
            cur.push(part);
            go(n - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Checks `parts` (weakly decreasing) against every rule of `c`.
pub fn accepts(parts: &[u32], c: &ConditionSet) -> bool {
    if let Some(s) = &c.smallest {
        for &x in parts {
            if x < s.min_part {
                return false;
            }
        }
        let copies = parts.iter().filter(|&&x| x == s.min_part).count() as u32;
        if let Multiplicity::Bounded(m) = s.max_mult {
            if copies > m {
                return false;
            }
        }
    }
    for d in &c.diffs {
        let k = d.distance as usize;
        for j in 0..parts.len() {
            if j + k < parts.len() && parts[j] - parts[j + k] < d.min_diff {
                return false;
            }
        }
    }
    for r in &c.congruences {
        let a = r.span as usize;
        for j in 0..parts.len() {
            if j + a >= parts.len() {
                break;
            }
            let close = parts[j] as i64 - parts[j + a] as i64 <= r.gap;
            let window: u64 = (j..=j + a).map(|i| parts[i] as u64).sum();
            if close && window % r.modulus as u64 != r.residue as u64 {
                return false;
            }
        }
    }
    true
}

/// Counts of accepted partitions of 0..=order, optionally with largest part
/// at most `cap` and at most `max_top` copies of `cap`.
pub fn counts(c: &ConditionSet, order: u32, cap: Option<u32>, max_top: Option<u32>) -> Vec<u64> {
    (0..=order)
        .map(|n| {
            partitions(n)
                .into_iter()
                .filter(|p| accepts(p, c))
                .filter(|p| match cap {
                    Some(k) => p.first().is_none_or(|&x| x <= k),
                    None => true,
                })
                .filter(|p| match (cap, max_top) {
                    (Some(k), Some(t)) => p.iter().filter(|&&x| x == k).count() as u32 <= t,
                    _ => true,
                })
                .count() as u64
        })
        .collect()
}
