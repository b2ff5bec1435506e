//! Replica-parallel execution with schedule-independent results.

use rayon::prelude::*;

use crate::error::Result;
use crate::seeding;

/// Run `job` for replicas `start..end`, each with its own derived seed, and
/// return the outputs in replica order.
pub fn map_range<T, F>(seed: u64, start: usize, end: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    (start..end)
        .into_par_iter()
        .map(|r| job(r, seeding::replica_seed(seed, r as u64)))
        .collect()
}

pub fn map<T, F>(seed: u64, replicas: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    map_range(seed, 0, replicas, job)
}

/// Size the global worker pool. Only the first call takes effect; results
/// do not depend on the worker count.
pub fn set_workers(workers: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| crate::error::Error::InvalidArgument(format!("worker pool: {e}")))
}
