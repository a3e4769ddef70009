//! Evaluation parallelism. The core optimizers evaluate batches through
//! the objective trait; wrapping an objective here fans one batch out over
//! the rayon pool. `PIPESIZER_THREADS` caps the pool (set once, process
//! wide).

use pipesizer_core::cost::CostBreakdown;
use pipesizer_core::Objective;
use rayon::prelude::*;

use std::sync::Once;

static POOL_INIT: Once = Once::new();

/// Builds the global rayon pool honoring `PIPESIZER_THREADS`. Safe to call
/// more than once; only the first call configures anything.
pub fn init_thread_pool() {
    POOL_INIT.call_once(|| {
        if let Ok(v) = std::env::var("PIPESIZER_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    });
}

/// Fans `evaluate_batch` out over rayon; single evaluations and counting
/// stay with the inner objective, so results and indices are identical to
/// the sequential path.
#[derive(Debug)]
pub struct ParallelObjective<O> {
    inner: O,
}

impl<O: Objective> ParallelObjective<O> {
    pub fn new(inner: O) -> Self {
        init_thread_pool();
        ParallelObjective { inner }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for ParallelObjective<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn lower(&self) -> &[f64] {
        self.inner.lower()
    }

    fn upper(&self) -> &[f64] {
        self.inner.upper()
    }

    fn evaluate(&self, x: &[f64]) -> CostBreakdown {
        self.inner.evaluate(x)
    }

    fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Vec<CostBreakdown> {
        xs.par_iter().map(|x| self.inner.evaluate(x)).collect()
    }

    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}
