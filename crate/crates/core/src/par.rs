//! Data-parallel building blocks with a sequential fallback.
//!
//! With the `parallel` feature (enabled by default) the functions here fan out
//! over the rayon thread pool; without it they degrade to plain sequential
//! iteration with identical results. The `_seq` variants are always
//! sequential and serve as the single-thread baseline in the criterion
//! benches.
//!
//! All functions preserve input order, and [`chunked_map`] uses fixed chunk
//! boundaries, so reductions that combine chunk results in order are
//! bit-identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential counterpart of [`map`].
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Maps `f` over the index range `0..n`, preserving order.
pub fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential counterpart of [`map_indices`].
pub fn map_indices_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Applies `f` to fixed-size chunks of `items` and returns the per-chunk
/// results in chunk order.
///
/// Chunk boundaries depend only on `chunk`, never on the thread count, so a
/// caller that folds the returned vector sequentially gets a deterministic
/// reduction.
pub fn chunked_map<T, U, F>(items: &[T], chunk: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&[T]) -> U + Sync + Send,
{
    assert!(chunk > 0, "chunk size must be positive");
    #[cfg(feature = "parallel")]
    {
        items.par_chunks(chunk).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.chunks(chunk).map(f).collect()
    }
}

/// Sequential counterpart of [`chunked_map`].
pub fn chunked_map_seq<T, U, F>(items: &[T], chunk: usize, f: F) -> Vec<U>
where
    F: Fn(&[T]) -> U,
{
    assert!(chunk > 0, "chunk size must be positive");
    items.chunks(chunk).map(f).collect()
}
