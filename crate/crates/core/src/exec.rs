//! Ordered batch execution with an optional rayon backend.

/// Environment variable selecting the number of worker threads.
pub const WORKERS_ENV: &str = "PAC_WORKERS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Executor {
    Sequential,
    /// Rayon's global pool; sequential when built without `parallel`.
    #[default]
    Parallel,
}

impl Executor {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            Executor::Sequential => items.iter().map(f).collect(),
            Executor::Parallel => par_map(items, f),
        }
    }

    /// Maps `f` over `0..count`, preserving order.
    pub fn map_range<U, F>(&self, start: u64, count: u64, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(u64) -> U + Sync + Send,
    {
        match self {
            Executor::Sequential => (start..start + count).map(f).collect(),
            Executor::Parallel => par_map_range(start, count, f),
        }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && *self == Executor::Parallel
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn par_map_range<U, F>(start: u64, count: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (start..start + count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map_range<U, F>(start: u64, count: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Sync + Send,
{
    (start..start + count).map(f).collect()
}

/// Sizes the global pool from [`WORKERS_ENV`] if set. Safe to call more than once.
pub fn init_workers_from_env() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
