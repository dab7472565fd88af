//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Schedule::Parallel`] maps on
//! the rayon pool; without it every schedule runs sequentially. Output order
//! never depends on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schedule {
    Sequential,
    Parallel,
}

impl Default for Schedule {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Schedule::Parallel
        } else {
            Schedule::Sequential
        }
    }
}

/// `f` applied to `0..n`, in index order.
pub fn map_range<R, F>(schedule: Schedule, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match schedule {
        #[cfg(feature = "parallel")]
        Schedule::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// `f` applied to every item, in slice order.
pub fn map_slice<T, R, F>(schedule: Schedule, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match schedule {
        #[cfg(feature = "parallel")]
        Schedule::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `f` with parallel work capped at `jobs` threads. A cap of 0 keeps the
/// global pool.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if jobs > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}
