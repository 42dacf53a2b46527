//! Pluggable execution of index-parallel work.

use alloc::vec::Vec;

/// Maps `f` over `0..n`, returning results in index order.
///
/// Implementations may evaluate in parallel but must preserve ordering so
/// that results do not depend on scheduling.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
