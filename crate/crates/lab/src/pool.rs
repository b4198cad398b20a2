use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::Result;

/// Fixed-size worker pool. Results land in index order whatever the
/// scheduling, so aggregation downstream is deterministic.
pub struct Pool {
    inner: ThreadPool,
}

impl Pool {
    pub fn new(workers: usize) -> Result<Self> {
        let inner = ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(Pool { inner })
    }

    pub fn workers(&self) -> usize {
        self.inner.current_num_threads()
    }

    pub fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.inner.install(|| (0..count as u64).into_par_iter().map(&f).collect())
    }

    pub fn try_map_indexed<T, E, F>(&self, count: usize, f: F) -> std::result::Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(u64) -> std::result::Result<T, E> + Sync + Send,
    {
        self.inner.install(|| (0..count as u64).into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for w in [1, 3] {
            let pool = Pool::new(w).unwrap();
            let v = pool.map_indexed(1000, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == (i * i) as u64));
        }
    }
}
