//! The genus of `f = 3x² + 25y² + 25z² − 10xy − 10xz`: local densities, the
//! closed-form genus representation number, the cusp form
//! `φ = ½(θ_g − θ_f)`, and the coefficients of the weight-2 newform attached
//! to `y² + xy + y = x³ + x² − 3x + 1`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{
    is_prime, is_squarefree, kronecker, l_value_quadratic, rational, rational_sqrt, Factorization,
    PrimeTable,
};
use crate::error::{invalid, Result};
use crate::exec::{map_ordered, Execution};
use crate::ternary::{automorphism_count, form_f, form_g, theta_coeffs, QSeries};

/// Largest precision accepted by [`shimura_coeffs`].
pub const MAX_SHIMURA_TERMS: u64 = 100_000;

/// Square-class representatives of the square-free integers in the genus.
pub const SQUARE_CLASS_REPS: [u64; 7] = [2, 3, 13, 17, 22, 42, 62];

/// Square-free `n ≢ 7 (mod 8)` with `n ≡ ±2 (mod 5)`.
pub fn is_genus_eligible(n: u64) -> bool {
    n > 0 && is_squarefree(n) && n % 8 != 7 && matches!(n % 5, 2 | 3)
}

fn check_eligible(n: u64) -> Result<()> {
    if is_genus_eligible(n) {
        Ok(())
    } else {
        invalid(format!(
            "{n} is not square-free with n ≢ 7 (mod 8) and n ≡ ±2 (mod 5)"
        ))
    }
}

/// Local density `α_p(n, f)`.
pub fn alpha_p(n: u64, p: u64) -> Result<BigRational> {
    check_eligible(n)?;
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    Ok(match p {
        2 if n % 8 == 3 => rational(1, 1),
        2 => rational(3, 2),
        5 => rational(2, 1),
        _ if n % p == 0 => rational(p as i64 * p as i64 - 1, p as i64 * p as i64),
        _ => rational(p as i64 + kronecker(-(n as i64), p) as i64, p as i64),
    })
}

/// Densities at 2, 5 and the primes dividing `n`; every other `α_p` is an
/// Euler factor of `L(1, χ_{−100n})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDensityProfile {
    pub n: u64,
    pub factors: Vec<(u64, BigRational)>,
}

impl LocalDensityProfile {
    pub fn new(n: u64) -> Result<Self> {
        check_eligible(n)?;
        let mut primes = vec![2, 5];
        primes.extend(
            Factorization::of(n)?
                .factors
                .iter()
                .map(|&(p, _)| p)
                .filter(|&p| p != 2),
        );
        primes.sort_unstable();
        let factors = primes
            .into_iter()
            .map(|p| Ok((p, alpha_p(n, p)?)))
            .collect::<Result<_>>()?;
        Ok(LocalDensityProfile { n, factors })
    }

    pub fn alpha(&self, p: u64) -> Option<&BigRational> {
        self.factors.iter().find(|(q, _)| *q == p).map(|(_, a)| a)
    }
}

/// `r(n, gen f)` in exact and floating form.
#[derive(Debug, Clone, PartialEq)]
pub struct GenusCount {
    pub exact: BigRational,
    pub approx: f64,
}

/// `r(n, gen f) = b_n √n L(1, χ_{−100n})` with `b_n = 4/(3π)` for
/// `n ≡ 3 (mod 8)` and `2/π` otherwise. The class number formula puts a
/// factor `π / √|D*|` into the L-value, and `n / |D*|` is a rational square,
/// so the result is rational.
pub fn r_gen_f(n: u64) -> Result<GenusCount> {
    check_eligible(n)?;
    let l = l_value_quadratic(-100 * n as i64)?;
    let lead = if n % 8 == 3 {
        rational(4, 3)
    } else {
        rational(2, 1)
    };
    let root = rational_sqrt(n, l.fundamental.unsigned_abs()).expect("n / |D*| is a square");
    let exact = lead * root * &l.coefficient;
    let b_n = if n % 8 == 3 { 4.0 / 3.0 } else { 2.0 } / std::f64::consts::PI;
    let approx = b_n * (n as f64).sqrt() * l.to_f64();
    Ok(GenusCount { exact, approx })
}

/// `(|O(f)|, |O(g)|)`, computed once by enumeration.
pub fn automorphism_orders() -> (u64, u64) {
    static ORDERS: OnceLock<(u64, u64)> = OnceLock::new();
    *ORDERS.get_or_init(|| (automorphism_count(&form_f()), automorphism_count(&form_g())))
}

/// Mass weights `(1/o(f), 1/o(g))` normalised to sum 1.
pub fn mass_weights() -> (BigRational, BigRational) {
    let (of, og) = automorphism_orders();
    let total = (of + og) as i64;
    (rational(og as i64, total), rational(of as i64, total))
}

fn average(r_f: u64, r_g: u64) -> BigRational {
    let (wf, wg) = mass_weights();
    wf * BigInt::from(r_f) + wg * BigInt::from(r_g)
}

/// `(2/5) r(n, f) + (3/5) r(n, g)`.
pub fn weighted_genus_average(n: u64) -> BigRational {
    average(form_f().rep_count(n), form_g().rep_count(n))
}

fn phi_from(r_f: u64, r_g: u64) -> i64 {
    let d = r_g as i64 - r_f as i64;
    assert!(d % 2 == 0, "r(n,g) and r(n,f) differ in parity");
    d / 2
}

/// `a(n) = (r(n, g) − r(n, f)) / 2`.
pub fn phi_coeff(n: u64) -> i64 {
    phi_from(form_f().rep_count(n), form_g().rep_count(n))
}

/// θ_f and θ_g to a common precision, with derived genus data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusSeries {
    pub theta_f: QSeries,
    pub theta_g: QSeries,
}

/// One row of the genus report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenusRow {
    pub n: u64,
    pub r_f: u64,
    pub r_g: u64,
    pub genus_avg_exact: String,
    pub genus_avg_analytic: Option<String>,
    pub phi: i64,
}

impl GenusSeries {
    pub fn new(terms: u64, exec: Execution) -> Result<Self> {
        Ok(GenusSeries {
            theta_f: theta_coeffs(&form_f(), terms, exec)?,
            theta_g: theta_coeffs(&form_g(), terms, exec)?,
        })
    }

    pub fn precision(&self) -> u64 {
        self.theta_f.precision() as u64
    }

    pub fn r_f(&self, n: u64) -> u64 {
        self.theta_f.coeff(n as usize) as u64
    }

    pub fn r_g(&self, n: u64) -> u64 {
        self.theta_g.coeff(n as usize) as u64
    }

    pub fn average(&self, n: u64) -> BigRational {
        average(self.r_f(n), self.r_g(n))
    }

    pub fn phi(&self, n: u64) -> i64 {
        phi_from(self.r_f(n), self.r_g(n))
    }

    pub fn phi_series(&self) -> QSeries {
        QSeries::new((0..=self.precision()).map(|n| self.phi(n)).collect())
    }

    /// Rows `1..=precision`; the analytic column is filled for eligible `n`.
    pub fn rows(&self) -> Result<Vec<GenusRow>> {
        (1..=self.precision())
            .map(|n| {
                let analytic = if is_genus_eligible(n) {
                    Some(r_gen_f(n)?.exact.to_string())
                } else {
                    None
                };
                Ok(GenusRow {
                    n,
                    r_f: self.r_f(n),
                    r_g: self.r_g(n),
                    genus_avg_exact: self.average(n).to_string(),
                    genus_avg_analytic: analytic,
                    phi: self.phi(n),
                })
            })
            .collect()
    }
}

/// `Σ_{n ≤ N} a(n) qⁿ`.
pub fn phi_series(terms: u64, exec: Execution) -> Result<QSeries> {
    Ok(GenusSeries::new(terms, exec)?.phi_series())
}

/// The representative `m` of the square class of `n` in `ℚ₂^×` and `ℚ₅^×`.
/// Both `n` and every representative are 5-adic non-square units, so only the
/// 2-adic class (parity of `ord₂` and the odd part mod 8) decides.
pub fn square_class_rep(n: u64) -> Result<u64> {
    check_eligible(n)?;
    let class = |v: u64| (v.trailing_zeros() % 2, (v >> v.trailing_zeros()) % 8);
    let hits: Vec<u64> = SQUARE_CLASS_REPS
        .iter()
        .copied()
        .filter(|&m| class(m) == class(n))
        .collect();
    assert_eq!(hits.len(), 1, "square class of {n} is not unique");
    Ok(hits[0])
}

/// The curve `y² + xy + y = x³ + x² − 3x + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticTrace {
    pub p: u64,
    pub a_p: i64,
}

impl EllipticTrace {
    pub fn within_hasse_bound(&self) -> bool {
        (self.a_p * self.a_p) as u64 <= 4 * self.p
    }
}

/// Affine points over `F_p` by exhaustive evaluation.
pub fn affine_points_brute(p: u64) -> u64 {
    let mut count = 0;
    for x in 0..p {
        let rhs = (x * x % p * x + x * x + 3 * (p - x % p) + 1) % p;
        for y in 0..p {
            if (y * y + x * y + y) % p == rhs {
                count += 1;
            }
        }
    }
    count
}

/// Affine points for odd `p`: completing the square in `y` gives
/// `(2y + x + 1)² = 4x³ + 5x² − 10x + 5`, counted through a residue table.
fn affine_points(p: u64) -> u64 {
    if p == 2 {
        return affine_points_brute(p);
    }
    let mut square = vec![false; p as usize];
    for t in 0..p {
        square[(t * t % p) as usize] = true;
    }
    let neg10 = (p - 10 % p) % p;
    let mut count = 0;
    for x in 0..p {
        let v = ((4 * x % p * x % p * x) + 5 * x * x + neg10 * x + 5) % p;
        count += if v == 0 {
            1
        } else if square[v as usize] {
            2
        } else {
            0
        };
    }
    count
}

/// `a_p = p + 1 − #E(F_p)`, the point at infinity included. At the bad
/// primes the singular point is counted too.
pub fn elliptic_ap(p: u64) -> Result<EllipticTrace> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    Ok(EllipticTrace {
        p,
        a_p: p as i64 + 1 - (affine_points(p) as i64 + 1),
    })
}

/// `Φ = Σ A(n) qⁿ` for `n ≤ N`, with `A(0) = 0`.
pub fn shimura_coeffs(terms: u64, exec: Execution) -> Result<QSeries> {
    if terms == 0 || terms > MAX_SHIMURA_TERMS {
        return invalid(format!("precision {terms} outside 1..={MAX_SHIMURA_TERMS}"));
    }
    let primes: Vec<u64> = PrimeTable::global()
        .primes()
        .iter()
        .map(|&p| p as u64)
        .take_while(|&p| p <= terms)
        .collect();
    let traces = map_ordered(exec, &primes, |&p| elliptic_ap(p).map(|t| t.a_p));
    let traces: Vec<i64> = traces.into_iter().collect::<Result<_>>()?;

    let n = terms as usize;
    let mut a = vec![0i64; n + 1];
    a[1] = 1;
    // Prime powers first, then extend multiplicatively over the least prime.
    for (&p, &ap) in primes.iter().zip(&traces) {
        let p = p as usize;
        let (mut prev, mut cur, mut q) = (1i64, ap, p);
        loop {
            a[q] = cur;
            if q > n / p {
                break;
            }
            let next = if 50 % p == 0 {
                ap * cur
            } else {
                ap * cur - p as i64 * prev
            };
            prev = cur;
            cur = next;
            q *= p;
        }
    }
    let mut least = vec![0usize; n + 1];
    for &p in &primes {
        let p = p as usize;
        for k in (p..=n).step_by(p) {
            if least[k] == 0 {
                least[k] = p;
            }
        }
    }
    for k in 2..=n {
        let p = least[k];
        let mut q = p;
        while k % (q * p) == 0 {
            q *= p;
        }
        if q != k {
            a[k] = a[q] * a[k / q];
        }
    }
    Ok(QSeries::new(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_p(2, 5).unwrap(), rational(2, 1));
        assert_eq!(alpha_p(3, 2).unwrap(), rational(1, 1));
        assert_eq!(alpha_p(2, 2).unwrap(), rational(3, 2));
        assert_eq!(alpha_p(13, 13).unwrap(), rational(168, 169));
        // (−2/3) = 1.
        assert_eq!(alpha_p(2, 3).unwrap(), rational(4, 3));
        assert!(alpha_p(7, 2).is_err());
        assert!(alpha_p(12, 2).is_err());
        assert!(alpha_p(4, 2).is_err());
        assert!(alpha_p(2, 9).is_err());
    }

    #[test]
    fn density_profile() {
        let prof = LocalDensityProfile::new(42).unwrap();
        let ps: Vec<u64> = prof.factors.iter().map(|(p, _)| *p).collect();
        assert_eq!(ps, vec![2, 3, 5, 7]);
        assert_eq!(prof.alpha(7), Some(&rational(48, 49)));
    }

    #[test]
    fn genus_count_examples() {
        assert_eq!(r_gen_f(2).unwrap().exact, rational(6, 5));
        assert_eq!(r_gen_f(3).unwrap().exact, rational(4, 5));
        assert_eq!(r_gen_f(37).unwrap().exact, weighted_genus_average(37));
        assert_eq!(form_f().rep_count(37), 0);
        assert!((r_gen_f(2).unwrap().approx - 1.2).abs() < 1e-9);
        assert!(r_gen_f(5).is_err());
    }

    #[test]
    fn mass_weights_are_two_fifths_three_fifths() {
        assert_eq!(mass_weights(), (rational(2, 5), rational(3, 5)));
    }

    #[test]
    fn weighted_average_examples() {
        assert_eq!(weighted_genus_average(0), rational(1, 1));
        assert_eq!(weighted_genus_average(2), rational(6, 5));
        assert_eq!(form_g().rep_count(13) - form_f().rep_count(13), 4);
    }

    #[test]
    fn analytic_genus_count_equals_weighted_average() {
        let s = GenusSeries::new(2000, Execution::Parallel).unwrap();
        let mut checked = 0;
        for n in (1..=2000).filter(|&n| is_genus_eligible(n)) {
            assert_eq!(r_gen_f(n).unwrap().exact, s.average(n), "n = {n}");
            checked += 1;
        }
        assert!(checked > 400);
    }

    #[test]
    fn phi_displayed_coefficients() {
        let phi = phi_series(30, Execution::Sequential).unwrap();
        let terms: Vec<(usize, i64)> = phi.terms().collect();
        let shown = [
            (2, 1),
            (3, -1),
            (8, 1),
            (12, -1),
            (13, 2),
            (17, -1),
            (18, -2),
            (22, -3),
            (27, 1),
        ];
        assert_eq!(&terms[..shown.len()], &shown);
        assert_eq!(phi_coeff(22), -3);
        assert_eq!(phi_coeff(5), 0);
    }

    #[test]
    fn decomposition_identities() {
        let s = GenusSeries::new(10_000, Execution::Parallel).unwrap();
        for n in 0..=10_000 {
            let (rf, rg) = (s.r_f(n) as i64, s.r_g(n) as i64);
            assert_eq!((rg - rf) % 2, 0, "parity at {n}");
            if n > 1000 {
                continue;
            }
            let e = s.average(n);
            let phi = rational(s.phi(n), 1);
            assert_eq!(rational(rf, 1) - &e, rational(-6, 5) * &phi, "θ_f at {n}");
            assert_eq!(rational(rg, 1) - &e, rational(4, 5) * &phi, "θ_g at {n}");
        }
        for n in 1..=10_000 {
            let avg = s.average(n);
            if avg.is_zero() {
                continue;
            }
            assert!(
                rational(s.phi(n).abs(), 1) <= avg * rational(5, 4),
                "envelope at {n}"
            );
        }
    }

    #[test]
    fn traces_match_brute_force_and_hasse() {
        for p in PrimeTable::global()
            .primes()
            .iter()
            .map(|&p| p as u64)
            .take_while(|&p| p < 400)
        {
            let t = elliptic_ap(p).unwrap();
            assert_eq!(t.a_p, p as i64 - affine_points_brute(p) as i64, "p = {p}");
            assert!(t.within_hasse_bound(), "p = {p}");
        }
        assert_eq!(elliptic_ap(3).unwrap().a_p, -1);
        assert_eq!(elliptic_ap(7).unwrap().a_p, -2);
        assert_eq!(elliptic_ap(11).unwrap().a_p, -3);
        assert_eq!(elliptic_ap(2).unwrap().a_p, 1);
        assert_eq!(elliptic_ap(5).unwrap().a_p, 0);
        assert!(elliptic_ap(9).is_err());
    }

    #[test]
    fn shimura_displayed_coefficients() {
        let a = shimura_coeffs(11, Execution::Sequential).unwrap();
        assert_eq!(a.coeffs, vec![0, 1, 1, -1, 1, 0, -1, -2, 1, -2, 0, -3]);
        let big = shimura_coeffs(2000, Execution::Parallel).unwrap();
        for m in 1..=40usize {
            for n in 1..=40usize {
                if num_integer::gcd(m, n) == 1 {
                    assert_eq!(big.coeff(m * n), big.coeff(m) * big.coeff(n));
                }
            }
        }
        assert!(shimura_coeffs(MAX_SHIMURA_TERMS + 1, Execution::Parallel).is_err());
    }

    #[test]
    fn square_classes() {
        for m in SQUARE_CLASS_REPS {
            assert_eq!(square_class_rep(m).unwrap(), m);
        }
        assert_eq!(square_class_rep(37).unwrap(), 13);
        assert_eq!(square_class_rep(163).unwrap(), 3);
        assert_eq!(square_class_rep(142).unwrap(), 62);
        assert!(square_class_rep(7).is_err());
        let mut seen = std::collections::HashSet::new();
        for n in (1..=5000).filter(|&n| is_genus_eligible(n)) {
            seen.insert(square_class_rep(n).unwrap());
        }
        assert_eq!(seen.len(), 7);
    }
}
