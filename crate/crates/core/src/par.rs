//! Trial execution: the same per-trial closure runs either on the rayon pool
//! or sequentially. Per-trial seeds are derived from `(seed, trial)` by the
//! caller, so results do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent trials are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Sequential,
    /// Runs on the global rayon pool. Falls back to sequential execution when
    /// the crate is built without the `parallel` feature.
    Parallel,
}

impl Execution {
    /// `Parallel` when the `parallel` feature is compiled in, else `Sequential`.
    pub fn best_available() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    /// Maps `f` over `0..trials`, preserving trial order in the output.
    pub fn map_trials<T, F>(self, trials: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..trials).into_par_iter().map(f).collect(),
            _ => (0..trials).map(f).collect(),
        }
    }

    /// Counts the trials for which `f` returns true.
    pub fn count_trials<F>(self, trials: u64, f: F) -> u64
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..trials).into_par_iter().filter(|&t| f(t)).count() as u64,
            _ => (0..trials).filter(|&t| f(t)).count() as u64,
        }
    }
}
