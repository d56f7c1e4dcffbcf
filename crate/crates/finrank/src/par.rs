//! Internal fan-out helpers. With the `parallel` feature the sweeps run on
//! rayon; without it they run sequentially. Both lanes visit indices in the
//! same order-sensitive way (ordered collects, first-match searches), so
//! results are identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// First `Some` produced over the index range, in index order.
pub(crate) fn find_map_first_indexed<U, F>(n: usize, f: F) -> Option<U>
where
    U: Send,
    F: Fn(usize) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().filter_map(f).find_first(|_| true)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).filter_map(f).next()
    }
}
