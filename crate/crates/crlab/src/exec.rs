//! Execution-strategy shim: one map-collect entry point that fans out over
//! rayon when the `parallel` feature is enabled and the caller asked for it,
//! and degrades to a plain sequential map otherwise.
//!
//! Output order always matches input order, so results are deterministic
//! regardless of strategy.

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    if parallel {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, _parallel: bool, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
