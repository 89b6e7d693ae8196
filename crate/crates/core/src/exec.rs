//! Page-parallel execution helpers.
//!
//! Every batched kernel in the crate is a map over independent pages whose
//! results are gathered by index, so switching between the sequential and
//! the rayon-backed path never changes a result bit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batched kernel walks its pages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to [`Exec::Sequential`] when the `parallel` feature is off.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Apply `f(page, chunk)` to consecutive `width`-sized chunks of `out`.
    pub(crate) fn for_each_chunk<T, F>(self, out: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if width == 0 {
            return;
        }
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(p, chunk)| f(p, chunk)),
            _ => out
                .chunks_mut(width)
                .enumerate()
                .for_each(|(p, chunk)| f(p, chunk)),
        }
    }

    /// Apply `f` to every element of `items` in place.
    pub(crate) fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, item)| f(i, item)),
            _ => items.iter_mut().enumerate().for_each(|(i, item)| f(i, item)),
        }
    }
}
