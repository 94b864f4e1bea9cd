//! Thread-pool control. `KB_THREADS` fixes the worker count; every reduction
//! in the crate has a fixed order, so results do not depend on it.

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "KB_THREADS";

/// Worker count requested through `KB_THREADS`, if set.
pub fn requested_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} = {v:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Runs `op` inside a pool of `threads` workers (the global pool when `None`).
pub fn run_with_threads<R: Send>(threads: Option<usize>, op: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(op()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(op))
        }
    }
}

/// [`run_with_threads`] with the count taken from `KB_THREADS`.
pub fn run_configured<R: Send>(op: impl FnOnce() -> R + Send) -> Result<R> {
    run_with_threads(requested_threads()?, op)
}
