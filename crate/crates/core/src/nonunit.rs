//! Sums of three nonunit squares: `n = x² + y² + z²` with no square equal to 1
//! (zero coordinates are allowed).

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, is_sum_three_squares, isqrt, kronecker, rk_count, Factorization};
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::sieve::{ChunkedSieve, SieveReport};
use crate::squares::SquareSums;

/// `n = x² + y² + z²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub n: u64,
    /// Entries satisfy `0 ≤ x ≤ y ≤ z`.
    pub canonical: bool,
}

impl Triple {
    pub fn new(x: i64, y: i64, z: i64) -> Self {
        let n = (x * x + y * y + z * z) as u64;
        let canonical = 0 <= x && x <= y && y <= z;
        Triple {
            x,
            y,
            z,
            n,
            canonical,
        }
    }

    pub fn canonical(self) -> Self {
        let mut v = [self.x.abs(), self.y.abs(), self.z.abs()];
        v.sort_unstable();
        Triple::new(v[0], v[1], v[2])
    }

    pub fn is_nonunit(&self) -> bool {
        [self.x, self.y, self.z].iter().all(|c| c.abs() != 1)
    }

    pub fn coords(&self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = {}² + {}² + {}²", self.n, self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonunitStatus {
    pub n: u64,
    pub in_s3: bool,
    pub in_s3_nonunit: bool,
    pub witness: Option<Triple>,
}

pub fn status(n: u64) -> NonunitStatus {
    let witness = nonunit_witness(n);
    NonunitStatus {
        n,
        in_s3: is_sum_three_squares(n),
        in_s3_nonunit: witness.is_some(),
        witness,
    }
}

/// `r_3(n) − 6 r_2(n−1) + 12 r_1(n−2)` without the triple-intersection term.
/// Differs from the true nonunit count only at `n = 3`.
pub fn r3_nonunit_uncorrected(n: u64) -> i64 {
    let r2 = if n >= 1 {
        rk_count(n - 1, 2).unwrap()
    } else {
        0
    };
    let r1 = if n >= 2 {
        rk_count(n - 2, 1).unwrap()
    } else {
        0
    };
    rk_count(n, 3).unwrap() as i64 - 6 * r2 as i64 + 12 * r1 as i64
}

/// Number of ordered signed triples with `x² + y² + z² = n` and all `x², y², z² ≠ 1`.
///
/// Inclusion–exclusion over the coordinates equal to ±1; the full
/// intersection `(±1, ±1, ±1)` contributes 8 at `n = 3`.
pub fn r3_nonunit(n: u64) -> u64 {
    let v = r3_nonunit_uncorrected(n) - if n == 3 { 8 } else { 0 };
    debug_assert!(v >= 0);
    v as u64
}

/// `r3_nonunit(n)` for all `n ≤ hi` from tabulated `r_1`, `r_2`, `r_3`.
pub fn r3_nonunit_table(hi: u64) -> Vec<u64> {
    let len = hi as usize + 1;
    let top = isqrt(hi);
    let mut r1 = vec![0u64; len];
    for x in 0..=top {
        r1[(x * x) as usize] = if x == 0 { 1 } else { 2 };
    }
    let mut r2 = vec![0u64; len];
    for x in 0..=top {
        for (y2, &c) in r1.iter().enumerate() {
            let s = (x * x) as usize + y2;
            if s >= len {
                break;
            }
            r2[s] += c * r1[(x * x) as usize];
        }
    }
    let mut r3 = vec![0u64; len];
    for x in 0..=top {
        let x2 = (x * x) as usize;
        for (m, &c) in r2.iter().enumerate() {
            if x2 + m >= len {
                break;
            }
            r3[x2 + m] += c * r1[x2];
        }
    }
    (0..len)
        .map(|n| {
            let mut v = r3[n] as i64;
            if n >= 1 {
                v -= 6 * r2[n - 1] as i64;
            }
            if n >= 2 {
                v += 12 * r1[n - 2] as i64;
            }
            if n == 3 {
                v -= 8;
            }
            v as u64
        })
        .collect()
}

/// Lexicographically least canonical nonunit triple, if any.
pub fn nonunit_witness(n: u64) -> Option<Triple> {
    let top = isqrt(n);
    for x in (0..=top).filter(|&x| x != 1) {
        if 3 * x * x > n {
            break;
        }
        for y in (x..=top).filter(|&y| y != 1) {
            let rest = n - x * x;
            if 2 * y * y > rest {
                break;
            }
            if let Some(z) = exact_sqrt(rest - y * y) {
                if z != 1 {
                    return Some(Triple::new(x as i64, y as i64, z as i64));
                }
            }
        }
    }
    None
}

/// Least `x ≤ y` with `x² + y² = n` and `x², y² ≠ 1`.
pub fn two_nonunit_decomp(n: u64) -> Option<(u64, u64)> {
    (0..=isqrt(n))
        .filter(|&x| x != 1)
        .take_while(|&x| 2 * x * x <= n)
        .find_map(|x| exact_sqrt(n - x * x).filter(|&y| y != 1).map(|y| (x, y)))
}

/// `#{(x, y) ∈ ℤ² : x² + y² = n, 5 ∤ xy}`.
pub fn tilde_r2(n: u64) -> u64 {
    let top = isqrt(n) as i64;
    let mut count = 0;
    for x in -top..=top {
        if x % 5 == 0 {
            continue;
        }
        if let Some(y) = exact_sqrt(n - (x * x) as u64) {
            if y % 5 != 0 {
                count += 2;
            }
        }
    }
    count
}

/// `8 Σ_{d | u} (−4/d)` where `a² + b² = 5^t u`, `5 ∤ u`; the closed form of
/// `tilde_r2(25(a² + b²))`.
pub fn tilde_r2_formula(a: i64, b: i64) -> Result<u64> {
    let mut u = (a * a + b * b) as u64;
    if u == 0 {
        return invalid("a² + b² must be positive");
    }
    while u % 5 == 0 {
        u /= 5;
    }
    let s: i64 = Factorization::of(u)?
        .divisors()
        .into_iter()
        .map(|d| kronecker(-4, d) as i64)
        .sum();
    Ok(8 * s as u64)
}

/// Norms `a² + b²` for which no rewriting of `(5a)² + (5b)²` exists.
pub const CHANGE_EXCEPTIONS: [u64; 6] = [1, 2, 5, 8, 18, 250];

/// `(x, y)` with `x² + y² = 25(a² + b²)`, `x², y² ≥ 10` and `5 ∤ xy`; least `x`
/// with `0 < x ≤ y`.
pub fn change_witness(a: i64, b: i64) -> Option<(u64, u64)> {
    let target = 25 * (a * a + b * b) as u64;
    (4..=isqrt(target))
        .filter(|x| x % 5 != 0)
        .take_while(|&x| 2 * x * x <= target)
        .find_map(|x| {
            exact_sqrt(target - x * x)
                .filter(|&y| y % 5 != 0 && y * y >= 10)
                .map(|y| (x, y))
        })
}

/// All `(n, y)` with `1 ≤ n ≤ n_max`, `y ≥ 1` and `2^i 5^n = a + y²`, found by
/// exhaustive search with exact big-integer square roots.
pub fn soleqn_solutions(i: u32, a: u32, n_max: u32) -> Result<Vec<(u32, BigUint)>> {
    if i > 1 || !matches!(a, 1 | 4 | 9) {
        return invalid(format!(
            "(i, a) = ({i}, {a}) is outside i ∈ {{0, 1}}, a ∈ {{1, 4, 9}}"
        ));
    }
    let mut out = Vec::new();
    let mut pow = BigUint::one() << i;
    for n in 1..=n_max {
        pow *= 5u32;
        let a_big = BigUint::from(a);
        if pow <= a_big {
            continue;
        }
        let v = &pow - a_big;
        let y = v.sqrt();
        if &y * &y == v {
            out.push((n, y));
        }
    }
    Ok(out)
}

/// Number of `0 ≤ x ≤ y ≤ z` with `x² + y² + z² = n`.
pub fn essentially_distinct_count(n: u64) -> u64 {
    let top = isqrt(n);
    let mut count = 0;
    for x in 0..=top {
        if 3 * x * x > n {
            break;
        }
        for y in x..=top {
            let rest = n - x * x;
            if 2 * y * y > rest {
                break;
            }
            count += exact_sqrt(rest - y * y).is_some() as u64;
        }
    }
    count
}

/// `essentially_distinct_count(n)` for every `n ≤ hi`.
pub fn essentially_distinct_table(hi: u64) -> Vec<u32> {
    let mut counts = vec![0u32; hi as usize + 1];
    let top = isqrt(hi);
    for x in 0..=top {
        for y in x..=top {
            let s = x * x + y * y;
            if s + y * y > hi {
                break;
            }
            for z in y..=top {
                let t = s + z * z;
                if t > hi {
                    break;
                }
                counts[t as usize] += 1;
            }
        }
    }
    counts
}

/// Exceptions `n ∈ 𝒮₃ \ 𝒮₃¹` over a range, with membership decided against a
/// precomputed table of sums of two nonunit squares.
#[derive(Debug, Clone)]
pub struct NonunitSieve {
    sums: SquareSums,
    residues: Option<Vec<u8>>,
}

impl NonunitSieve {
    pub fn new(hi: u64, residues: Option<&[u8]>) -> Self {
        let residues = residues.map(|r| {
            let mut r: Vec<u8> = r.iter().map(|x| x % 5).collect();
            r.sort_unstable();
            r.dedup();
            r
        });
        NonunitSieve {
            sums: SquareSums::new(hi, |r| r != 1),
            residues,
        }
    }

    pub fn filter_label(&self) -> Option<String> {
        self.residues.as_ref().map(|r| {
            let r: Vec<String> = r.iter().map(u8::to_string).collect();
            format!("n mod 5 in {{{}}}", r.join(" "))
        })
    }

    pub fn in_filter(&self, n: u64) -> bool {
        self.residues
            .as_ref()
            .is_none_or(|r| r.contains(&((n % 5) as u8)))
    }

    pub fn is_nonunit(&self, n: u64) -> bool {
        self.sums.is_three(n)
    }

    pub fn is_exception(&self, n: u64) -> bool {
        n >= 1 && self.in_filter(n) && is_sum_three_squares(n) && !self.sums.is_three(n)
    }
}

pub fn sieve_nonunit_exceptions(
    lo: u64,
    hi: u64,
    residue_filter: Option<&[u8]>,
    exec: Execution,
) -> Result<SieveReport> {
    if lo > hi {
        return invalid(format!("lo = {lo} exceeds hi = {hi}"));
    }
    let sieve = NonunitSieve::new(hi, residue_filter);
    ChunkedSieve::new("nonunit", lo, hi)
        .filter(sieve.filter_label())
        .exec(exec)
        .run(|n| sieve.is_exception(n))
}

/// The twenty members of `𝒮₃ \ 𝒮₃¹`.
pub const NONUNIT_EXCEPTIONS: [u64; 20] = [
    1, 2, 3, 5, 6, 10, 11, 14, 19, 21, 26, 30, 35, 37, 42, 46, 51, 91, 163, 235,
];
