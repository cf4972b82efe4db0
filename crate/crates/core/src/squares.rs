//! Sums of two and three squares whose roots are drawn from an admissible set
//! (for instance "not ±1", or "coprime to 6 and not ±1").

use crate::arith::{exact_sqrt, isqrt};
use crate::bitset::BitSet;

/// Tables for sums of admissible squares up to a fixed limit.
#[derive(Debug, Clone)]
pub struct SquareSums {
    limit: u64,
    roots: Vec<u64>,
    admissible: Vec<bool>,
    pairs: BitSet,
}

impl SquareSums {
    /// `admissible(r)` decides nonnegative roots; a square `r²` may be used
    /// iff its root is admissible.
    pub fn new(limit: u64, admissible: impl Fn(u64) -> bool) -> Self {
        let top = isqrt(limit);
        let flags: Vec<bool> = (0..=top).map(&admissible).collect();
        let roots: Vec<u64> = (0..=top).filter(|&r| flags[r as usize]).collect();
        let mut pairs = BitSet::new(limit as usize + 1);
        for (i, &a) in roots.iter().enumerate() {
            let a2 = a * a;
            if 2 * a2 > limit {
                break;
            }
            for &b in &roots[i..] {
                let s = a2 + b * b;
                if s > limit {
                    break;
                }
                pairs.set(s as usize);
            }
        }
        SquareSums {
            limit,
            roots,
            admissible: flags,
            pairs,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn roots(&self) -> &[u64] {
        &self.roots
    }

    /// Admissible root of `v` when `v` is an admissible square.
    pub fn admissible_root(&self, v: u64) -> Option<u64> {
        let r = exact_sqrt(v)?;
        self.admissible
            .get(r as usize)
            .copied()
            .unwrap_or(false)
            .then_some(r)
    }

    pub fn is_two(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} beyond table limit {}", self.limit);
        self.pairs.get(n as usize)
    }

    /// Least `x ≤ y` with `x² + y² = n`.
    pub fn two_witness(&self, n: u64) -> Option<(u64, u64)> {
        if !self.is_two(n) {
            return None;
        }
        self.roots
            .iter()
            .take_while(|&&x| 2 * x * x <= n)
            .find_map(|&x| self.admissible_root(n - x * x).map(|y| (x, y)))
    }

    pub fn is_three(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} beyond table limit {}", self.limit);
        self.roots
            .iter()
            .take_while(|&&x| x * x <= n)
            .any(|&x| self.pairs.get((n - x * x) as usize))
    }

    /// Lexicographically least `x ≤ y ≤ z` with `x² + y² + z² = n`.
    pub fn three_witness(&self, n: u64) -> Option<[u64; 3]> {
        assert!(n <= self.limit, "{n} beyond table limit {}", self.limit);
        for (i, &x) in self.roots.iter().enumerate() {
            if 3 * x * x > n {
                break;
            }
            let rest = n - x * x;
            if !self.pairs.get(rest as usize) {
                continue;
            }
            for &y in &self.roots[i..] {
                if 2 * y * y > rest {
                    break;
                }
                if let Some(z) = self.admissible_root(rest - y * y) {
                    return Some([x, y, z]);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonunit_tables_match_brute_force() {
        let t = SquareSums::new(2000, |r| r != 1);
        for n in 0..=2000u64 {
            let s = isqrt(n) as i64;
            let mut two = false;
            let mut three = false;
            for x in 0..=s {
                for y in 0..=s {
                    if x == 1 || y == 1 {
                        continue;
                    }
                    let q = x * x + y * y;
                    two |= q == n as i64;
                    for z in 0..=s {
                        three |= z != 1 && q + z * z == n as i64;
                    }
                }
            }
            assert_eq!(t.is_two(n), two, "two {n}");
            assert_eq!(t.is_three(n), three, "three {n}");
            assert_eq!(t.three_witness(n).is_some(), three);
            if let Some([x, y, z]) = t.three_witness(n) {
                assert!(x <= y && y <= z && x * x + y * y + z * z == n);
            }
        }
    }
}
