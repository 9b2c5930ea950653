use nls_gibbs_core::exec::Executor;
use num_complex::Complex64;
use rayon::prelude::*;

/// Runs index maps on a rayon pool. Results come back in index order, and
/// every reduction in the core happens in that order, so the output does
/// not depend on the thread count.
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// `threads = 0` lets rayon choose.
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl Executor for Parallel {
    fn map_complex(&self, n: usize, f: &(dyn Fn(usize) -> Complex64 + Sync)) -> Vec<Complex64> {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    fn map_vec(&self, n: usize, f: &(dyn Fn(usize) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
