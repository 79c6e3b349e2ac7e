//! Fixed-width worker pool with order-preserving maps.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};

/// Runs independent evaluations on `jobs` worker threads. Results always come
/// back in input order, so output is identical to serial execution.
pub struct Executor {
    pool: ThreadPool,
    jobs: usize,
}

impl Executor {
    pub fn new(jobs: usize) -> Result<Self> {
        if jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool, jobs })
    }

    pub fn serial() -> Self {
        Self::new(1).expect("single-thread pool")
    }

    /// One worker per available core.
    pub fn available() -> Self {
        let n = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self::new(n).expect("pool sized by available parallelism")
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        if self.jobs == 1 {
            return items.iter().map(f).collect();
        }
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("jobs", &self.jobs)
            .finish()
    }
}
