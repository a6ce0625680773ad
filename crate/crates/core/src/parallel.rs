//! Element-parallel map, sequential without the `parallel` feature.

#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Configures the global worker pool; `None` leaves the default.
#[cfg(feature = "parallel")]
pub fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a second initialisation is harmless and only reports an error
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn init_threads(_threads: Option<usize>) {}
