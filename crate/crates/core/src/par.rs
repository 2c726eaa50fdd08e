//! Data-parallel helpers. With the `parallel` feature the maps fan out over
//! rayon; without it they are plain iterator loops. Results are returned in
//! input order either way, so both builds compute identical values.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter_mut().for_each(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter_mut().for_each(f)
    }
}

/// True when the crate was built with the `parallel` feature.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
