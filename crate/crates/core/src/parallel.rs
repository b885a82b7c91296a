//! Deterministic fan-out over sentence indices.
//!
//! `TEXEVAL_THREADS` caps worker threads; unset (or unparsable) means
//! single-threaded. Workers fill an index-ordered vector and all reductions
//! happen sequentially afterwards, so the thread count never changes any
//! output bit.

pub const THREADS_ENV: &str = "TEXEVAL_THREADS";

/// Worker-thread cap from the environment. Absent or invalid values mean 1.
pub fn thread_count() -> usize {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().ok().filter(|&n| n >= 1).unwrap_or(1),
        Err(_) => 1,
    }
}

/// Maps `f` over `0..n` into an index-ordered vector, using up to
/// [`thread_count`] scoped threads.
pub fn par_map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    par_map_with(thread_count(), n, f)
}

pub fn par_map_with<R, F>(threads: usize, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut parts: Vec<Vec<R>> = Vec::with_capacity(threads);
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(n);
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<R>>())
            })
            .collect();
        for handle in handles {
            parts.push(handle.join().expect("worker thread panicked"));
        }
    });
    parts.into_iter().flatten().collect()
}
