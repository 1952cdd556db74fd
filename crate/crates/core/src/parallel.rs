//! Indexed parallel map with a sequential fallback.
//!
//! With the `parallel` feature the work runs on rayon; `threads == 0`
//! means the global pool, `threads == 1` forces the sequential path.
//! Results always come back in index order.

/// Runs `f(0..n)` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match threads {
            1 => (0..n).map(f).collect(),
            0 => (0..n).into_par_iter().map(f).collect(),
            t => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                Err(_) => (0..n).map(f).collect(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        (0..n).map(f).collect()
    }
}

/// Whether this build can run work on more than one thread.
pub fn is_parallel_build() -> bool {
    cfg!(feature = "parallel")
}
