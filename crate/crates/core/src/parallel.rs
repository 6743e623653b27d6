//! Data-parallel helpers with a sequential fallback.
//!
//! Every hot loop in the crate goes through [`Execution`]. With the
//! `parallel` feature (on by default) `Execution::Parallel` dispatches to
//! rayon; without it both variants run the same sequential loop. The results
//! are identical either way because every reduction is done in a fixed order
//! after the parallel map.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a data-parallel kernel is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work is actually spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `(0..n).map(f).collect()`, in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Calls `f(offset, chunk)` for consecutive chunks of `out`.
    pub fn chunks_mut<T, F>(self, out: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i * chunk, c));
            return;
        }
        for (i, c) in out.chunks_mut(chunk).enumerate() {
            f(i * chunk, c);
        }
    }

    /// Chunk length that gives each worker a few blocks of `n` items.
    pub fn chunk_len(self, n: usize) -> usize {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            let workers = rayon::current_num_threads().max(1);
            return n.div_ceil(4 * workers).max(8);
        }
        n.max(1)
    }
}
