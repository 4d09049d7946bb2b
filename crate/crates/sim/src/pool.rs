use cbdenoise_core::exec::Executor;
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// A rayon thread pool behind the core [`Executor`] interface. Results come
/// back in index order whatever the number of threads.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `threads == 0` lets rayon pick the number of threads.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
