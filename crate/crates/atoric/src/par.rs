//! Fan-out strategy for bulk work.
//!
//! With the default `parallel` feature the functions here run on rayon;
//! without it they fall back to plain iterators.  Either way the results are
//! deterministic: reductions use total orders, never first-to-finish races.
//! The `_seq` twins always run sequentially and exist so benchmarks can
//! measure the two paths against each other in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over all items.
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

#[doc(hidden)]
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Smallest `f(item)` over all items; `None` results are skipped.
pub fn filter_min<T, K, F>(items: Vec<T>, f: F) -> Option<K>
where
    T: Send,
    K: Ord + Send,
    F: Fn(T) -> Option<K> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().filter_map(f).min()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().filter_map(f).min()
    }
}

#[doc(hidden)]
pub fn filter_min_seq<T, K, F>(items: Vec<T>, f: F) -> Option<K>
where
    K: Ord,
    F: Fn(T) -> Option<K>,
{
    items.into_iter().filter_map(f).min()
}
