//! Hook for parallel per-node evaluation.
//!
//! Integration itself reduces values in a fixed pairwise tree, so any
//! implementation that fills the index-ordered value vector — sequentially or
//! with a thread pool — produces bit-identical integrals.

use alloc::vec::Vec;

/// Evaluate `f(0..len)` into an index-ordered vector.
pub trait ParallelMap: Sync {
    fn map_indexed(&self, len: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>;
}

/// Single-threaded evaluator; the default everywhere in this crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ParallelMap for Sequential {
    fn map_indexed(&self, len: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        (0..len).map(f).collect()
    }
}
