//! Data-parallel maps with a sequential fallback.
//!
//! With the `parallel` feature (default) the maps below fan out through
//! rayon; without it they run sequentially. Every caller reduces the
//! mapped values with order-independent arithmetic (exactly rounded sums,
//! integer folds, or `f64::max`), so feature selection and thread count
//! never change a result bit.

#[cfg(feature = "parallel")]
pub(crate) fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Maximum over a mapped slice; `f64::max` is exact, so any reduction
/// order gives the same result.
#[cfg(feature = "parallel")]
pub(crate) fn max_mapped<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    items
        .par_iter()
        .map(f)
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn max_mapped<T, F>(items: &[T], f: F) -> f64
where
    F: Fn(&T) -> f64,
{
    items.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}
