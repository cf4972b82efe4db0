//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon global pool; without it every strategy degrades to a plain loop.
//! Results never depend on the strategy or on the number of threads.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Split `[lo, hi]` (inclusive) into consecutive ranges of at most `chunk` values.
pub fn chunk_ranges(lo: u64, hi: u64, chunk: u64) -> Vec<Range<u64>> {
    assert!(chunk > 0);
    let mut out = Vec::new();
    if lo > hi {
        return out;
    }
    let mut start = lo;
    loop {
        let end = start.saturating_add(chunk - 1).min(hi);
        out.push(start..end + 1);
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

/// Map `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Fold `f` over `items` into per-worker accumulators created by `init`,
/// then combine them with `merge`. `merge` must be associative and
/// commutative for the result to be independent of the partitioning.
pub fn fold_reduce<T, A, I, F, M>(exec: Execution, items: &[T], init: I, f: F, merge: M) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, &T) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().fold(&init, &f).reduce(&init, &merge);
    }
    let _ = (exec, &merge);
    items.iter().fold(init(), f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_exactly() {
        let r = chunk_ranges(3, 25, 10);
        assert_eq!(r, vec![3..13, 13..23, 23..26]);
        assert_eq!(chunk_ranges(5, 5, 100), vec![5..6]);
        assert!(chunk_ranges(6, 5, 1).is_empty());
        assert_eq!(chunk_ranges(0, u64::MAX - 1, u64::MAX).len(), 1);
    }

    #[test]
    fn strategies_agree() {
        let items: Vec<u64> = (0..1000).collect();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let sq = map_ordered(exec, &items, |x| x * x);
            assert_eq!(sq[999], 998001);
            let s = fold_reduce(exec, &items, || 0u64, |a, x| a + x, |a, b| a + b);
            assert_eq!(s, 499500);
        }
    }
}
