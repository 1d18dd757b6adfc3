//! Data-parallel execution with a sequential fallback.
//!
//! With the default `parallel` feature, [`map_indexed`] fans out over the
//! rayon pool; without it, the same call runs the sequential loop. The
//! sequential variant is always exported so the two code paths can be
//! benchmarked against each other.
//!
//! Both variants return results in index order, so any fold over the output
//! is schedule-independent.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to `0..count`, collecting results in index order.
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_sequential(count, f)
    }
}

/// Sequential twin of [`map_indexed`].
pub fn map_indexed_sequential<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Caps the rayon pool at `n` threads. Returns false if the global pool was
/// already initialised (or the crate was built without `parallel`).
#[cfg(feature = "parallel")]
pub fn init_threads(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn init_threads(_n: usize) -> bool {
    false
}
