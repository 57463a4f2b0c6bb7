//! Thread pool selection and order-preserving parallel maps.

use rayon::prelude::*;

/// Environment variable holding the worker count. Unset or `0` means one
/// worker per core.
pub const THREADS_ENV: &str = "TYPEB_THREADS";

pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// Applies `f` to every item on a pool sized by [`THREADS_ENV`] and returns
/// the results in input order, so output does not depend on scheduling.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let run = || items.par_iter().map(&f).collect::<Vec<R>>();
    match rayon::ThreadPoolBuilder::new().num_threads(configured_threads()).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("falling back to the global pool: {e}");
            run()
        }
    }
}
