//! Positive-definite ternary lattices given by integral Gram matrices:
//! representation numbers by bounded lattice-point enumeration, theta series,
//! isometries between lattices and their orbit decomposition.
//!
//! Enumeration completes the square along the last two coordinates in floating
//! point (with widened bounds) and then solves for the first coordinate
//! exactly, so every reported vector is verified in integer arithmetic.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, is_prime, isqrt};
use crate::bitset::BitSet;
use crate::error::{invalid, Error, Result};
use crate::exec::{chunk_ranges, fold_reduce, map_ordered, Execution};
use crate::sieve::{ChunkedSieve, SieveReport};

pub type Gram = [[i64; 3]; 3];
pub type Vector = [i64; 3];

/// Largest coefficient index accepted by [`theta_coeffs`].
pub const MAX_THETA_TERMS: u64 = 100_000_000;

const WIDEN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Completion {
    d: [f64; 3],
    m12: f64,
    m13: f64,
    m23: f64,
}

/// A positive-definite integral ternary lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryLattice {
    gram: Gram,
    det: i64,
    cholesky: [[f64; 3]; 3],
    completion: Completion,
}

fn det3(g: &Gram) -> i64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

impl TernaryLattice {
    pub fn new(gram: Gram) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if gram[i][j] != gram[j][i] {
                    return invalid("Gram matrix is not symmetric");
                }
            }
        }
        let minor2 = gram[0][0] * gram[1][1] - gram[0][1] * gram[0][1];
        let det = det3(&gram);
        if gram[0][0] <= 0 || minor2 <= 0 || det <= 0 {
            return invalid("Gram matrix is not positive definite");
        }
        let g = |i: usize, j: usize| gram[i][j] as f64;
        let d1 = g(0, 0);
        let m12 = g(0, 1) / d1;
        let m13 = g(0, 2) / d1;
        let d2 = minor2 as f64 / d1;
        let m23 = (g(1, 2) - g(0, 1) * g(0, 2) / d1) / d2;
        let d3 = det as f64 / minor2 as f64;
        let completion = Completion {
            d: [d1, d2, d3],
            m12,
            m13,
            m23,
        };

        let mut l = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    l[i][i] = (g(i, i) - s).sqrt();
                } else {
                    l[i][j] = (g(i, j) - s) / l[j][j];
                }
            }
        }
        Ok(TernaryLattice {
            gram,
            det,
            cholesky: l,
            completion,
        })
    }

    /// The sum of three squares.
    pub fn identity() -> Self {
        Self::diagonal(1, 1, 1).unwrap()
    }

    pub fn diagonal(a: i64, b: i64, c: i64) -> Result<Self> {
        Self::new([[a, 0, 0], [0, b, 0], [0, 0, c]])
    }

    pub fn gram(&self) -> &Gram {
        &self.gram
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    /// Lower-triangular `L` with `L Lᵀ = gram`.
    pub fn cholesky(&self) -> &[[f64; 3]; 3] {
        &self.cholesky
    }

    pub fn bilinear(&self, u: &Vector, v: &Vector) -> i64 {
        let mut s = 0;
        for i in 0..3 {
            for j in 0..3 {
                s += u[i] * self.gram[i][j] * v[j];
            }
        }
        s
    }

    pub fn eval(&self, v: &Vector) -> i64 {
        self.bilinear(v, v)
    }

    fn x3_bound(&self, n: u64) -> i64 {
        ((n as f64 / self.completion.d[2]).sqrt() * (1.0 + WIDEN) + WIDEN) as i64
    }

    /// Range of `x2` for fixed `x3` such that some `x1` may reach norm `≤ n`.
    fn x2_range(&self, n: u64, x3: i64) -> Option<(i64, i64)> {
        let c = &self.completion;
        let rem = n as f64 - c.d[2] * (x3 * x3) as f64;
        if rem < -WIDEN * (n as f64 + 1.0) {
            return None;
        }
        let r = (rem.max(0.0) / c.d[1]).sqrt() * (1.0 + WIDEN) + WIDEN;
        let center = -c.m23 * x3 as f64;
        Some(((center - r).ceil() as i64, (center + r).floor() as i64))
    }

    /// Integer solutions `x1` of `Q(x1, x2, x3) = n`.
    fn solve_first(&self, n: u64, x2: i64, x3: i64) -> [Option<i64>; 2] {
        let g = &self.gram;
        let b = g[0][1] * x2 + g[0][2] * x3;
        let c = g[1][1] * x2 * x2 + 2 * g[1][2] * x2 * x3 + g[2][2] * x3 * x3;
        let disc = (b as i128) * (b as i128) - (g[0][0] as i128) * (c as i128 - n as i128);
        if disc < 0 {
            return [None, None];
        }
        let Some(s) = u64::try_from(disc).ok().and_then(exact_sqrt) else {
            return [None, None];
        };
        let s = s as i64;
        let root = |num: i64| (num % g[0][0] == 0).then(|| num / g[0][0]);
        if s == 0 {
            [root(-b), None]
        } else {
            [root(-b - s), root(-b + s)]
        }
    }

    fn for_each_solution(&self, n: u64, mut f: impl FnMut(Vector) -> bool) {
        let t = self.x3_bound(n);
        for x3 in (0..=t).flat_map(|v| if v == 0 { vec![0] } else { vec![v, -v] }) {
            let Some((lo, hi)) = self.x2_range(n, x3) else {
                continue;
            };
            for x2 in lo..=hi {
                for x1 in self.solve_first(n, x2, x3).into_iter().flatten() {
                    if !f([x1, x2, x3]) {
                        return;
                    }
                }
            }
        }
    }

    /// Some vector of norm `n`, if one exists.
    pub fn represents(&self, n: u64) -> Option<Vector> {
        let mut found = None;
        self.for_each_solution(n, |v| {
            found = Some(v);
            false
        });
        found
    }

    pub fn rep_count(&self, n: u64) -> u64 {
        let mut c = 0;
        self.for_each_solution(n, |_| {
            c += 1;
            true
        });
        c
    }

    /// All vectors of norm exactly `n`, sorted.
    pub fn vectors_of_norm(&self, n: u64) -> Vec<Vector> {
        let mut out = Vec::new();
        self.for_each_solution(n, |v| {
            out.push(v);
            true
        });
        out.sort_unstable();
        out
    }

    /// Visit every vector with `x3` in `x3s` and norm `≤ bound`.
    fn sweep(
        &self,
        bound: u64,
        x3s: std::ops::RangeInclusive<i64>,
        mut f: impl FnMut(Vector, u64),
    ) {
        let c = self.completion;
        let g = &self.gram;
        for x3 in x3s {
            let Some((lo, hi)) = self.x2_range(bound, x3) else {
                continue;
            };
            for x2 in lo..=hi {
                let rem = bound as f64
                    - c.d[2] * (x3 * x3) as f64
                    - c.d[1] * (x2 as f64 + c.m23 * x3 as f64).powi(2);
                if rem < -WIDEN * (bound as f64 + 1.0) {
                    continue;
                }
                let r = (rem.max(0.0) / c.d[0]).sqrt() * (1.0 + WIDEN) + WIDEN;
                let center = -(c.m12 * x2 as f64 + c.m13 * x3 as f64);
                let (a, b) = ((center - r).ceil() as i64, (center + r).floor() as i64);
                let lin = g[0][1] * x2 + g[0][2] * x3;
                let tail = g[1][1] * x2 * x2 + 2 * g[1][2] * x2 * x3 + g[2][2] * x3 * x3;
                for x1 in a..=b {
                    let q = g[0][0] * x1 * x1 + 2 * lin * x1 + tail;
                    if q >= 0 && q as u64 <= bound {
                        f([x1, x2, x3], q as u64);
                    }
                }
            }
        }
    }

    /// All vectors of norm `≤ bound` grouped by norm.
    pub fn vectors_up_to(&self, bound: u64) -> Vec<(u64, Vector)> {
        let t = self.x3_bound(bound);
        let mut out = Vec::new();
        self.sweep(bound, -t..=t, |v, q| out.push((q, v)));
        out.sort_unstable();
        out
    }

    /// Evaluate the form at a vector written as `(x, y, z)`.
    pub fn value(&self, x: i64, y: i64, z: i64) -> i64 {
        self.eval(&[x, y, z])
    }
}

impl FromStr for TernaryLattice {
    type Err = Error;

    /// Nine comma-separated integers, row-major.
    fn from_str(s: &str) -> Result<Self> {
        let vals: Vec<i64> = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad Gram entry: {e}")))?;
        if vals.len() != 9 {
            return invalid(format!("expected 9 Gram entries, got {}", vals.len()));
        }
        let mut g = [[0; 3]; 3];
        for (i, v) in vals.into_iter().enumerate() {
            g[i / 3][i % 3] = v;
        }
        Self::new(g)
    }
}

impl fmt::Display for TernaryLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.gram;
        write!(
            f,
            "[[{},{},{}],[{},{},{}],[{},{},{}]]",
            g[0][0], g[0][1], g[0][2], g[1][0], g[1][1], g[1][2], g[2][0], g[2][1], g[2][2]
        )
    }
}

/// `ℤ(e1 + a e2 + b e3) + ℤ(p e2) + ℤ(p e3) ⊂ I₃`, an index-`p²` sublattice.
pub fn ell_ab(p: u64, a: i64, b: i64) -> Result<TernaryLattice> {
    if p % 2 == 0 || !is_prime(p) {
        return invalid(format!("{p} is not an odd prime"));
    }
    let p = p as i64;
    TernaryLattice::new([
        [a * a + b * b + 1, a * p, b * p],
        [a * p, p * p, 0],
        [b * p, 0, p * p],
    ])
}

/// `3x² + 25y² + 25z² − 10xy − 10xz`.
pub fn form_f() -> TernaryLattice {
    TernaryLattice::new([[3, -5, -5], [-5, 25, 0], [-5, 0, 25]]).unwrap()
}

/// `2x² + 25y² + 25z² − 10xy`.
pub fn form_g() -> TernaryLattice {
    TernaryLattice::new([[2, -5, 0], [-5, 25, 0], [0, 0, 25]]).unwrap()
}

pub fn rep_count(lattice: &TernaryLattice, n: u64) -> u64 {
    lattice.rep_count(n)
}

/// Truncated power series `Σ c(n) qⁿ`, `0 ≤ n ≤ N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeries {
    pub coeffs: Vec<i64>,
}

impl QSeries {
    pub fn new(coeffs: Vec<i64>) -> Self {
        QSeries { coeffs }
    }

    /// Coefficient of `qⁿ`; zero beyond the truncation.
    pub fn coeff(&self, n: usize) -> i64 {
        self.coeffs.get(n).copied().unwrap_or(0)
    }

    /// Index of the last stored coefficient.
    pub fn precision(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Nonzero terms `(n, c(n))` in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, c)| c != 0)
    }
}

/// Representation numbers `r(n, L)` for `0 ≤ n ≤ terms` in one sweep over
/// all vectors of norm `≤ terms`, partitioned by the last coordinate.
pub fn theta_coeffs(lattice: &TernaryLattice, terms: u64, exec: Execution) -> Result<QSeries> {
    if terms > MAX_THETA_TERMS {
        return Err(Error::ResourceLimit(format!(
            "theta series to {terms} exceeds the limit {MAX_THETA_TERMS}"
        )));
    }
    let t = lattice.x3_bound(terms);
    let width = ((2 * t + 1) / 64).max(1) as u64;
    let slabs: Vec<(i64, i64)> = chunk_ranges(0, (2 * t) as u64, width)
        .into_iter()
        .map(|r| (r.start as i64 - t, r.end as i64 - 1 - t))
        .collect();
    let len = terms as usize + 1;
    let counts = fold_reduce(
        exec,
        &slabs,
        || vec![0i64; len],
        |mut acc, &(a, b)| {
            lattice.sweep(terms, a..=b, |_, q| acc[q as usize] += 1);
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    Ok(QSeries::new(counts))
}

/// Columns are the images of the source basis in target coordinates, so
/// `Mᵀ · G_target · M = G_source`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Isometry {
    pub matrix: [[i64; 3]; 3],
}

impl Isometry {
    pub fn from_columns(cols: [Vector; 3]) -> Self {
        let mut m = [[0; 3]; 3];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..3 {
                m[r][c] = col[r];
            }
        }
        Isometry { matrix: m }
    }

    pub fn column(&self, c: usize) -> Vector {
        [self.matrix[0][c], self.matrix[1][c], self.matrix[2][c]]
    }

    pub fn compose(&self, rhs: &Isometry) -> Isometry {
        let mut m = [[0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.matrix[i][k] * rhs.matrix[k][j]).sum();
            }
        }
        Isometry { matrix: m }
    }

    pub fn preserves(&self, source: &TernaryLattice, target: &TernaryLattice) -> bool {
        (0..3).all(|i| {
            (0..3).all(|j| target.bilinear(&self.column(i), &self.column(j)) == source.gram[i][j])
        })
    }
}

/// The set `R(source, target)` of isometric embeddings, sorted.
pub fn isometries(
    source: &TernaryLattice,
    target: &TernaryLattice,
    exec: Execution,
) -> Vec<Isometry> {
    let g = source.gram;
    let images: Vec<Vec<Vector>> = (0..3)
        .map(|i| target.vectors_of_norm(g[i][i] as u64))
        .collect();
    let per_first = map_ordered(exec, &images[0], |v1| {
        let mut found = Vec::new();
        for v2 in images[1]
            .iter()
            .filter(|v2| target.bilinear(v1, v2) == g[0][1])
        {
            for v3 in &images[2] {
                if target.bilinear(v1, v3) == g[0][2] && target.bilinear(v2, v3) == g[1][2] {
                    found.push(Isometry::from_columns([*v1, *v2, *v3]));
                }
            }
        }
        found
    });
    let mut all: Vec<Isometry> = per_first.into_iter().flatten().collect();
    all.sort_unstable();
    all
}

pub fn isometry_count(source: &TernaryLattice, target: &TernaryLattice) -> u64 {
    isometries(source, target, Execution::Parallel).len() as u64
}

/// `|O(L)|`.
pub fn automorphism_count(lattice: &TernaryLattice) -> u64 {
    isometry_count(lattice, lattice)
}

/// One representative per orbit of `O(target)` acting on `R(source, target)`
/// by left multiplication, with the orbit size. Representatives are the
/// least matrix of each orbit.
pub fn orbits(source: &TernaryLattice, target: &TernaryLattice) -> Vec<(Isometry, usize)> {
    let group = isometries(target, target, Execution::Parallel);
    let embeddings = isometries(source, target, Execution::Parallel);
    let mut seen: HashSet<Isometry> = HashSet::new();
    let mut out = Vec::new();
    for m in &embeddings {
        if seen.contains(m) {
            continue;
        }
        let orbit: HashSet<Isometry> = group.iter().map(|u| u.compose(m)).collect();
        out.push((*m, orbit.len()));
        seen.extend(orbit);
    }
    out
}

pub fn orbit_representatives(source: &TernaryLattice, target: &TernaryLattice) -> Vec<Isometry> {
    orbits(source, target).into_iter().map(|(m, _)| m).collect()
}

/// `r(ℓ_{a,b}, I₃) / r(I₃, I₃)`.
pub fn embedding_ratio(p: u64, a: i64, b: i64) -> Result<u64> {
    let l = ell_ab(p, a, b)?;
    let i3 = TernaryLattice::identity();
    Ok(isometry_count(&l, &i3) / automorphism_count(&i3))
}

/// The two forms of the genus whose exceptions are sieved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormId {
    F,
    G,
}

impl FormId {
    pub fn lattice(self) -> TernaryLattice {
        match self {
            FormId::F => form_f(),
            FormId::G => form_g(),
        }
    }

    /// Residue class mod 5 in which the form's exceptions are sought.
    pub fn residue(self) -> u64 {
        match self {
            FormId::F => 2,
            FormId::G => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FormId::F => "form-f",
            FormId::G => "form-g",
        }
    }
}

impl FromStr for FormId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" | "form-f" => Ok(FormId::F),
            "g" | "form-g" => Ok(FormId::G),
            _ => invalid(format!("unknown form {s:?} (expected f or g)")),
        }
    }
}

/// Square-free flags for `0..=hi` via marking multiples of prime squares.
#[derive(Debug, Clone)]
pub struct SquarefreeTable {
    non_squarefree: BitSet,
}

impl SquarefreeTable {
    pub fn new(hi: u64) -> Self {
        let mut bits = BitSet::new(hi as usize + 1);
        bits.set(0);
        let top = isqrt(hi) as usize;
        let mut composite = vec![false; top + 1];
        for p in 2..=top {
            if composite[p] {
                continue;
            }
            for q in (p * p..=top).step_by(p) {
                composite[q] = true;
            }
            let sq = p * p;
            for m in (sq..=hi as usize).step_by(sq) {
                bits.set(m);
            }
        }
        SquarefreeTable {
            non_squarefree: bits,
        }
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        !self.non_squarefree.get(n as usize)
    }
}

/// Square-free `n` in the form's residue class mod 5 with `n ≢ 7 (mod 8)`,
/// i.e. the square-free integers represented by the genus in that class.
pub fn is_eligible(form: FormId, n: u64, squarefree: &SquarefreeTable) -> bool {
    n % 5 == form.residue() && n % 8 != 7 && squarefree.is_squarefree(n)
}

/// Eligible square-free `n ≤ hi` not represented by the chosen form.
pub fn genus_exception_sieve(form: FormId, hi: u64, exec: Execution) -> Result<SieveReport> {
    let pred = GenusSieve::new(form, hi);
    let mut report = ChunkedSieve::new(form.name(), 1, hi.max(1))
        .filter(Some(pred.filter_label()))
        .exec(exec)
        .run(|n| pred.is_exception(n))?;
    report.grh_conditional = true;
    Ok(report)
}

/// Exception predicate behind [`genus_exception_sieve`].
#[derive(Debug, Clone)]
pub struct GenusSieve {
    pub form: FormId,
    lattice: TernaryLattice,
    squarefree: SquarefreeTable,
}

impl GenusSieve {
    pub fn new(form: FormId, hi: u64) -> Self {
        GenusSieve {
            form,
            lattice: form.lattice(),
            squarefree: SquarefreeTable::new(hi),
        }
    }

    pub fn filter_label(&self) -> String {
        format!(
            "square-free, n mod 5 = {}, n mod 8 != 7",
            self.form.residue()
        )
    }

    pub fn is_exception(&self, n: u64) -> bool {
        is_eligible(self.form, n, &self.squarefree) && self.lattice.represents(n).is_none()
    }
}

/// Theorem-list of square-free exceptions of `f` (class 2 mod 5).
pub const S_F: [u64; 16] = [
    2, 37, 42, 97, 142, 262, 277, 427, 562, 667, 982, 1642, 3067, 3502, 4537, 12307,
];
/// Square-free exceptions of `g` (class 3 mod 5).
pub const S_G: [u64; 5] = [3, 133, 163, 478, 883];
