//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) large per-item maps run on rayon;
//! without it, or inside [`sequential`], they run on the calling thread.
//! Every map returns results in input order, and reductions are done by the
//! caller in that order, so outputs are bit-identical across worker counts.

use std::cell::Cell;

/// Inputs shorter than this are mapped sequentially.
pub const PAR_CUTOFF: usize = 256;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with data-parallel maps disabled on this thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let _reset = Reset(FORCE_SEQUENTIAL.with(|c| c.replace(true)));
    f()
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(Cell::get)
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if items.len() >= PAR_CUTOFF && parallel_enabled() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Order-preserving map over an index range `0..n`.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if n >= PAR_CUTOFF && parallel_enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Like [`map_range`] but parallel from two items up; for maps where each
/// item is itself expensive (whole solves).
pub fn map_heavy<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if n >= 2 && parallel_enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Caps the global worker pool. Returns `false` if the pool was already
/// initialised or the build is sequential.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}
