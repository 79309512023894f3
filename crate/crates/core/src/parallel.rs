use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "MTAUG_WORKERS";

/// Bounded worker pool for per-item stages.
///
/// Results are always returned in item order, so callers see the same
/// output for any worker count.
pub struct Workers {
    pool: ThreadPool,
}

impl Workers {
    pub fn new(workers: usize) -> Result<Self, ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(Self { pool })
    }

    pub fn count(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Applies `f` to every index in `0..n` and collects the results in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

impl Default for Workers {
    fn default() -> Self {
        Self::new(1).expect("single-thread pool")
    }
}
