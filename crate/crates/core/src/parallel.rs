//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature enabled, [`map`] runs on the rayon global
//! pool. Without it, it is an ordinary iterator map. [`map_sequential`] is
//! always single-threaded and exists so benchmarks and determinism checks
//! can compare both paths from one build.

/// Whether [`map`] actually fans out to worker threads.
pub const ENABLED: bool = cfg!(feature = "parallel");

/// Number of workers [`map`] will use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
