//! Execution switch for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Exec::map`], which keeps
//! output order equal to input order. Reductions over the results are always
//! done sequentially by the caller, so results are bit-identical between
//! [`Exec::Sequential`] and [`Exec::Parallel`] and independent of the thread
//! count. Without the `parallel` feature, `Parallel` runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `true` when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Exec::Parallel {
                use rayon::prelude::*;
                return items.into_par_iter().map(f).collect();
            }
        }
        items.into_iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Send + Sync,
    {
        self.map((0..n).collect(), f)
    }
}
