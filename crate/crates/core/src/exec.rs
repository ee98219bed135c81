//! Execution strategy for the data-parallel loops (per group element, per
//! instance, per restart).
//!
//! With the `parallel` feature the [`Execution::Parallel`] strategy runs on the
//! rayon global pool. Without it, every strategy runs sequentially. Results are
//! always collected in index order, and reductions use a fixed pairwise tree,
//! so both strategies produce bit-identical output.

use crate::matcore::ComplexMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this strategy actually fans out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0), ..., f(n - 1)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), exec, |i| f(&items[i]))
}

/// Pairwise tree sum in index order: ((t0 + t1) + (t2 + t3)) + ...
///
/// Panics on an empty input.
pub fn tree_sum(mut terms: Vec<ComplexMatrix>) -> ComplexMatrix {
    assert!(!terms.is_empty(), "tree_sum of no terms");
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(&a + &b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}
