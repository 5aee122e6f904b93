//! Point sweeps. With the `parallel` feature (on by default) sweeps run on the
//! rayon pool; without it they run on the calling thread. Results always come
//! back in input order, so every reduction downstream is order-independent of
//! the scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a sweep distributes work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Sequential,
    /// Falls back to [`Strategy::Sequential`] when built without `parallel`.
    #[default]
    Parallel,
}

impl Strategy {
    /// The default for this build.
    pub fn auto() -> Self {
        if is_parallel_available() {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

pub fn is_parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `items` with the build's default strategy.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_with(Strategy::auto(), items, f)
}

pub fn map_with<T, U, F>(strategy: Strategy, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match strategy {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}
