//! Deterministic maps and reductions.
//!
//! With the `parallel` feature the maps run on the rayon pool. Reductions
//! always sum fixed-size blocks and then combine the block sums in a fixed
//! pairwise tree, so results do not depend on the number of workers.

use alloc::vec::Vec;

const BLOCK: usize = 1024;

/// `(0..n).map(f)`, possibly in parallel, in index order.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Applies `f` to every element of `xs` in place.
pub fn for_each_mut<T, F>(xs: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xs.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, x) in xs.iter_mut().enumerate() {
            f(i, x);
        }
    }
}

/// Pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σ_i f(i)` over `0..n` with a worker-independent summation order.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partial = map(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        let mut buf = [0.0; BLOCK];
        for i in lo..hi {
            buf[i - lo] = f(i);
        }
        pairwise_sum(&buf[..hi - lo])
    });
    pairwise_sum(&partial)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum(a.len(), |i| a[i] * b[i])
}

/// Maximum of `f` over `0..n`; `-inf` when empty. NaN entries are ignored.
pub fn max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    map(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        (lo..hi).map(&f).fold(f64::NEG_INFINITY, f64::max)
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_sum_of_integers() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 49_995_000.0);
        assert_eq!(sum(10_000, |i| i as f64), 49_995_000.0);
    }

    #[test]
    fn sum_is_reproducible() {
        let f = |i: usize| 1.0 / (1.0 + i as f64).powi(2);
        let a = sum(123_457, f);
        let b = sum(123_457, f);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - core::f64::consts::PI.powi(2) / 6.0).abs() < 1e-5);
    }

    #[test]
    fn max_handles_empty_and_nan() {
        assert_eq!(max(0, |_| 1.0), f64::NEG_INFINITY);
        assert_eq!(max(5, |i| if i == 2 { f64::NAN } else { i as f64 }), 4.0);
    }
}
