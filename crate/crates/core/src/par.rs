//! Ordered map over Monte-Carlo runs, parallel when the `parallel` feature
//! is enabled and more than one worker is requested.

/// `(0..n).map(f)` with results in index order. `workers == 0` uses every
/// available core.
pub fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != 1 && n > 1 {
        use rayon::prelude::*;
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => return pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(e) => log::warn!("falling back to sequential runs: {e}"),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    (0..n).map(f).collect()
}

/// Whether this build can run more than one worker.
pub const PARALLEL: bool = cfg!(feature = "parallel");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for workers in [0, 1, 3] {
            let v = map_indexed(100, workers, |i| i * i);
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(map_indexed(0, 4, |i| i).is_empty());
    }
}
