//! Exact integer arithmetic: primes and factorizations, quadratic symbols,
//! representation counts `r_k(n)`, Legendre's three-square criterion, class
//! numbers of imaginary quadratic orders and exact quadratic L-values at `s = 1`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default bound of the shared prime table.
pub const DEFAULT_PRIME_BOUND: u32 = 1_000_000;

/// Primes below a fixed bound, built once by an Eratosthenes sieve.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    bound: u32,
    primes: Vec<u32>,
}

impl PrimeTable {
    pub fn new(bound: u32) -> Self {
        let n = bound as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        PrimeTable { bound, primes }
    }

    /// The process-wide table up to [`DEFAULT_PRIME_BOUND`].
    pub fn global() -> &'static PrimeTable {
        static TABLE: OnceLock<PrimeTable> = OnceLock::new();
        TABLE.get_or_init(|| PrimeTable::new(DEFAULT_PRIME_BOUND))
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn factor(&self, n: u64) -> Factorization {
        assert!(n >= 1, "cannot factor zero");
        let mut rest = n;
        let mut factors = Vec::new();
        let mut push = |p: u64, rest: &mut u64| {
            if *rest % p == 0 {
                let mut e = 0;
                while *rest % p == 0 {
                    *rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        };
        for &p in &self.primes {
            let p = p as u64;
            if p * p > rest {
                break;
            }
            push(p, &mut rest);
        }
        // Past the table: continue with odd trial divisors.
        let mut d = (self.bound as u64 + 1) | 1;
        while d.saturating_mul(d) <= rest {
            push(d, &mut rest);
            d += 2;
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Factorization { n, factors }
    }
}

/// Prime factorization `n = ∏ p^e` with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn of(n: u64) -> Result<Self> {
        if n == 0 {
            return invalid("factorization of 0");
        }
        Ok(PrimeTable::global().factor(n))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Exponent of `p` in `n`.
    pub fn ord(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }
}

pub fn isqrt(n: u64) -> u64 {
    num_integer::Roots::sqrt(&n)
}

/// `Some(r)` with `r² = n`, `r ≥ 0`.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let table = PrimeTable::global();
    if n <= table.bound() as u64 {
        return table.primes().binary_search(&(n as u32)).is_ok();
    }
    let f = table.factor(n);
    f.factors.len() == 1 && f.factors[0].1 == 1
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && PrimeTable::global().factor(n).is_squarefree()
}

/// Kronecker symbol `(a / n)` for `n ≥ 1`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    assert!(n >= 1);
    let mut a = a as i128;
    let mut n = n as i128;
    let mut t = 1;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            t = -t;
        }
        n >>= tz;
    }
    a = a.rem_euclid(n);
    // Jacobi symbol for odd n.
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre_symbol(a: i64, p: u64) -> Result<i32> {
    if p % 2 == 0 || !is_prime(p) {
        return invalid(format!("{p} is not an odd prime"));
    }
    Ok(kronecker(a, p))
}

fn r1(n: u64) -> u64 {
    match exact_sqrt(n) {
        Some(0) => 1,
        Some(_) => 2,
        None => 0,
    }
}

fn r2(n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    let s = isqrt(n);
    (0..=s)
        .map(|x| r1(n - x * x) * if x == 0 { 1 } else { 2 })
        .sum()
}

fn r3(n: u64) -> u64 {
    let s = isqrt(n);
    (0..=s)
        .map(|x| r2(n - x * x) * if x == 0 { 1 } else { 2 })
        .sum()
}

/// Number of ordered signed `k`-tuples with `x_1² + … + x_k² = n`, `k ∈ {1, 2, 3}`.
pub fn rk_count(n: u64, k: u32) -> Result<u64> {
    match k {
        1 => Ok(r1(n)),
        2 => Ok(r2(n)),
        3 => Ok(r3(n)),
        _ => invalid(format!("rk_count supports k = 1, 2, 3 (got {k})")),
    }
}

/// `r_2(n) = 4 Σ_{d | n} (-4 / d)`.
pub fn r2_divisor_formula(n: u64) -> Result<u64> {
    let f = Factorization::of(n)?;
    let s: i64 = f
        .divisors()
        .into_iter()
        .map(|d| kronecker(-4, d) as i64)
        .sum();
    Ok(4 * s as u64)
}

/// Legendre's criterion: `n` is a sum of three squares unless `n = 4^a (8b + 7)`.
pub fn is_sum_three_squares(n: u64) -> bool {
    if n == 0 {
        return true;
    }
    let mut m = n;
    while m % 4 == 0 {
        m /= 4;
    }
    m % 8 != 7
}

/// Lexicographically least `0 ≤ x ≤ y ≤ z` with `x² + y² + z² = n`.
pub fn three_squares_witness(n: u64) -> Option<[u64; 3]> {
    let top = isqrt(n);
    (0..=top).take_while(|&x| 3 * x * x <= n).find_map(|x| {
        let rest = n - x * x;
        (x..=top)
            .take_while(|&y| 2 * y * y <= rest)
            .find_map(|y| exact_sqrt(rest - y * y).map(|z| [x, y, z]))
    })
}

/// Negative discriminant `D = conductor² · D*` of an imaginary quadratic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discriminant {
    pub d: i64,
    pub fundamental: i64,
    pub conductor: u64,
}

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 {
            return invalid(format!("discriminant must be negative (got {d})"));
        }
        if !matches!(d.rem_euclid(4), 0 | 1) {
            return invalid(format!("{d} is not ≡ 0, 1 (mod 4)"));
        }
        let fact = Factorization::of(d.unsigned_abs())?;
        let mut core: i64 = -1;
        for &(p, e) in &fact.factors {
            if e % 2 == 1 {
                core *= p as i64;
            }
        }
        let fundamental = if core.rem_euclid(4) == 1 {
            core
        } else {
            4 * core
        };
        let conductor = exact_sqrt((d / fundamental) as u64).expect("d / D* is a square");
        Ok(Discriminant {
            d,
            fundamental,
            conductor,
        })
    }

    pub fn is_fundamental(&self) -> bool {
        self.conductor == 1
    }

    /// Number of units of the maximal order: 6, 4 or 2.
    pub fn units(&self) -> u64 {
        match self.fundamental {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }
}

/// Number of reduced primitive forms `ax² + bxy + cy²` of discriminant `D`:
/// `|b| ≤ a ≤ c`, with `b ≥ 0` whenever `|b| = a` or `a = c`.
pub fn class_number(disc: &Discriminant) -> u64 {
    let d = disc.d;
    let abs = d.unsigned_abs() as i64;
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= abs {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    h
}

pub fn class_number_of(d: i64) -> Result<u64> {
    Ok(class_number(&Discriminant::new(d)?))
}

/// Exact value `coefficient · π / √|D*|` of `L(1, χ_D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub coefficient: BigRational,
    pub fundamental: i64,
}

impl LValue {
    pub fn to_f64(&self) -> f64 {
        self.coefficient.to_f64().unwrap() * std::f64::consts::PI
            / (self.fundamental.unsigned_abs() as f64).sqrt()
    }
}

/// `L(1, χ_d)` for a negative discriminant `d`, through the class number
/// formula for the attached fundamental discriminant and the Euler factors at
/// the primes dividing the conductor.
pub fn l_value_quadratic(d: i64) -> Result<LValue> {
    if d >= 0 {
        return invalid(format!("χ_{d}: only negative discriminants are supported"));
    }
    let disc = Discriminant::new(d)?;
    let fd = Discriminant::new(disc.fundamental)?;
    let h = class_number(&fd);
    let mut coefficient = rational(2 * h as i64, fd.units() as i64);
    if disc.conductor > 1 {
        for &(p, _) in &Factorization::of(disc.conductor)?.factors {
            let chi = kronecker(disc.fundamental, p) as i64;
            coefficient *= rational(p as i64 - chi, p as i64);
        }
    }
    Ok(LValue {
        coefficient,
        fundamental: disc.fundamental,
    })
}

pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `√(num / den)` when it is rational.
pub(crate) fn rational_sqrt(num: u64, den: u64) -> Option<BigRational> {
    let g = num.gcd(&den);
    let (a, b) = (exact_sqrt(num / g)?, exact_sqrt(den / g)?);
    Some(rational(a as i64, b as i64))
}

/// `r_3(n)` from `(16/π)√n L(1, χ_{-4n})` (n ≡ 3 mod 8) or `(24/π)√n L(1, χ_{-4n})`,
/// for square-free `n ≢ 7 (mod 8)`. The factors of π cancel exactly.
pub fn r3_analytic(n: u64) -> Result<BigRational> {
    if n == 0 || !is_squarefree(n) || n % 8 == 7 {
        return invalid(format!("{n} is not square-free with n ≢ 7 (mod 8)"));
    }
    let l = l_value_quadratic(-4 * n as i64)?;
    let lead = if n % 8 == 3 { 16 } else { 24 };
    let root = rational_sqrt(n, l.fundamental.unsigned_abs()).expect("n / |D*| is a square");
    let value = rational(lead, 1) * root * l.coefficient;
    debug_assert!(!value.is_negative());
    Ok(value)
}

/// Whether a rational is an integer equal to `v`.
pub fn rational_is(r: &BigRational, v: u64) -> bool {
    r.is_integer() && r.to_integer() == BigInt::from(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_square_witnesses() {
        for n in 0..=5000u64 {
            let w = three_squares_witness(n);
            assert_eq!(w.is_some(), is_sum_three_squares(n), "n = {n}");
            if let Some([x, y, z]) = w {
                assert!(x <= y && y <= z && x * x + y * y + z * z == n);
            }
        }
        assert_eq!(three_squares_witness(14), Some([1, 2, 3]));
    }

    fn brute_rk(n: u64, k: u32) -> u64 {
        let s = isqrt(n) as i64 + 1;
        let mut c = 0;
        match k {
            2 => {
                for x in -s..=s {
                    for y in -s..=s {
                        c += (x * x + y * y == n as i64) as u64;
                    }
                }
            }
            3 => {
                for x in -s..=s {
                    for y in -s..=s {
                        for z in -s..=s {
                            c += (x * x + y * y + z * z == n as i64) as u64;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        c
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(2, 5).unwrap(), -1);
        assert_eq!(legendre_symbol(-9, 5).unwrap(), 1);
        assert_eq!(legendre_symbol(0, 7).unwrap(), 0);
        assert!(legendre_symbol(3, 2).is_err());
        assert!(legendre_symbol(3, 9).is_err());
    }

    #[test]
    fn kronecker_at_two_and_negative() {
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-8, 5), -1);
    }

    #[test]
    fn rk_examples() {
        assert_eq!(rk_count(25, 2).unwrap(), 12);
        assert_eq!(rk_count(14, 3).unwrap(), 48);
        assert_eq!(rk_count(0, 3).unwrap(), 1);
        assert_eq!(rk_count(0, 1).unwrap(), 1);
        assert!(rk_count(5, 4).is_err());
        for n in [25, 14, 50, 99, 130] {
            assert_eq!(rk_count(n, 2).unwrap(), brute_rk(n, 2));
            assert_eq!(rk_count(n, 3).unwrap(), brute_rk(n, 3));
        }
    }

    #[test]
    fn r2_formula_examples() {
        assert_eq!(r2_divisor_formula(25).unwrap(), 12);
        assert_eq!(r2_divisor_formula(13).unwrap(), 8);
        assert_eq!(r2_divisor_formula(3).unwrap(), 0);
        assert!(r2_divisor_formula(0).is_err());
    }

    #[test]
    fn r2_formula_matches_enumeration() {
        for n in 1..=10_000 {
            assert_eq!(
                r2_divisor_formula(n).unwrap(),
                rk_count(n, 2).unwrap(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn three_square_criterion_matches_counts() {
        assert!(!is_sum_three_squares(7));
        assert!(!is_sum_three_squares(28));
        assert!(is_sum_three_squares(33));
        for n in 0..=10_000 {
            assert_eq!(
                is_sum_three_squares(n),
                rk_count(n, 3).unwrap() > 0,
                "n = {n}"
            );
        }
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number_of(-4).unwrap(), 1);
        assert_eq!(class_number_of(-23).unwrap(), 3);
        assert_eq!(class_number_of(-12).unwrap(), 1);
        assert_eq!(class_number_of(-3).unwrap(), 1);
        assert_eq!(class_number_of(-20).unwrap(), 2);
        assert_eq!(class_number_of(-163).unwrap(), 1);
        assert!(class_number_of(5).is_err());
        assert!(class_number_of(-5).is_err());
    }

    #[test]
    fn discriminant_decomposition() {
        let d = Discriminant::new(-200).unwrap();
        assert_eq!((d.fundamental, d.conductor), (-8, 5));
        let d = Discriminant::new(-12).unwrap();
        assert_eq!((d.fundamental, d.conductor), (-3, 2));
        assert!(Discriminant::new(-4).unwrap().is_fundamental());
    }

    #[test]
    fn l_values() {
        let pi = std::f64::consts::PI;
        let l = l_value_quadratic(-4).unwrap();
        assert!((l.to_f64() - pi / 4.0).abs() < 1e-12);
        let l = l_value_quadratic(-200).unwrap();
        assert_eq!(l.fundamental, -8);
        assert_eq!(l.coefficient, rational(6, 5));
        assert!((l.to_f64() - 1.33286).abs() < 1e-5);
        let l = l_value_quadratic(-12).unwrap();
        assert!((l.to_f64() - pi / (2.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!(l_value_quadratic(12).is_err());
    }

    #[test]
    fn l_value_matches_partial_sums() {
        // Independent route: Σ χ(m)/m with Cesàro-style averaging of the tail.
        for d in [-3i64, -4, -7, -8, -20, -23, -200, -300, -84] {
            let m_max = 200_000u64;
            let mut s = 0.0;
            let mut acc = 0.0;
            for m in 1..=m_max {
                s += kronecker(d, m) as f64 / m as f64;
                acc += s;
            }
            let approx = acc / m_max as f64;
            let exact = l_value_quadratic(d).unwrap().to_f64();
            assert!(
                (approx - exact).abs() < 2e-3,
                "d = {d}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn r3_formula_exact_small() {
        assert!(rational_is(&r3_analytic(3).unwrap(), 8));
        assert!(rational_is(&r3_analytic(1).unwrap(), 6));
        assert!(r3_analytic(7).is_err());
        assert!(r3_analytic(12).is_err());
    }

    #[test]
    fn r3_formula_matches_counts() {
        for n in (1..=2000u64).filter(|&n| n % 8 != 7 && is_squarefree(n)) {
            let exact = r3_analytic(n).unwrap();
            assert!(
                rational_is(&exact, rk_count(n, 3).unwrap()),
                "n = {n}: {exact}"
            );
        }
    }

    #[test]
    fn factorization_invariants() {
        for n in [1u64, 2, 360, 999_983, 1_000_003 * 3, 600_851_475_143] {
            let f = Factorization::of(n).unwrap();
            let prod: u64 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.factors.iter().all(|&(p, e)| e >= 1 && is_prime(p)));
        }
        assert_eq!(
            Factorization::of(12).unwrap().divisors(),
            vec![1, 2, 3, 4, 6, 12]
        );
    }

    proptest! {
        #[test]
        fn legendre_is_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000, idx in 1usize..25) {
            let p = PrimeTable::global().primes()[idx] as u64;
            prop_assume!(p <= 100);
            let lhs = legendre_symbol(a * b, p).unwrap();
            let rhs = legendre_symbol(a, p).unwrap() * legendre_symbol(b, p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
