//! Per-node and per-sample work dispatch.
//!
//! With the `parallel` feature the closures run on the rayon pool; without it
//! they run in a plain loop. Results always come back in index order and every
//! reduction downstream is done sequentially in that order, so both builds
//! produce bit-identical numbers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the parallel build also stays sequential.
pub const MIN_PARALLEL_LEN: usize = 8;

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if len < MIN_PARALLEL_LEN {
        (0..len).map(f).collect()
    } else {
        (0..len).into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Name of the active backend, for bench labels and reports.
pub fn backend() -> &'static str {
    if cfg!(feature = "parallel") {
        "rayon"
    } else {
        "sequential"
    }
}
