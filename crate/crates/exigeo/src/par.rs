//! Data-parallel helpers. With the default `parallel` feature these fan out
//! over rayon; without it they run sequentially with identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sum `f` over an index range.
#[cfg(feature = "parallel")]
pub fn par_sum<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..count).into_par_iter().map(f).sum()
}

#[cfg(not(feature = "parallel"))]
pub fn par_sum<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..count).map(f).sum()
}

/// Sequential reference implementations, kept callable under either feature
/// so benchmarks can compare the two paths directly.
pub mod seq {
    pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
    where
        F: Fn(&T) -> U,
    {
        items.iter().map(f).collect()
    }

    pub fn sum<F>(count: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        (0..count).map(f).sum()
    }
}
