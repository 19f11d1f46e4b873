use rayon::prelude::*;
use yorlab_core::RngStream;

/// Runs `f(i, stream_i)` for `i < n` in parallel and returns results in index
/// order. Stream `i` is `RngStream::new(seed, i)`.
pub fn par_replicas<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, RngStream) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(|i| f(i, RngStream::new(seed, i as u64))).collect()
}

/// Fallible variant of [`par_replicas`]; the first error by index wins.
pub fn try_par_replicas<T, E, F>(n: usize, seed: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, RngStream) -> Result<T, E> + Sync + Send,
{
    par_replicas(n, seed, f).into_iter().collect()
}
