//! Execution strategy for element loops.
//!
//! Assembly-style loops map an independent closure over element indices
//! and reduce the results in element order. The map may run on the rayon
//! pool or on the calling thread; because the reduction order is fixed,
//! both modes produce bitwise identical numbers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How element maps are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Run on the calling thread.
    Sequential,
    /// Fan out over the rayon thread pool.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub(crate) fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_map_preserves_order() {
        let out = map_indexed(ExecMode::Sequential, 5, |i| 2 * i);
        assert_eq!(out, vec![0, 2, 4, 6, 8]);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_map_matches_sequential() {
        let seq = map_indexed(ExecMode::Sequential, 1000, |i| (i as f64).sin());
        let par = map_indexed(ExecMode::Parallel, 1000, |i| (i as f64).sin());
        assert_eq!(seq, par);
    }
}
