//! The black-box objective shared by every searcher: a box-bounded vector
//! in, a [`CostBreakdown`] out, with a monotone evaluation counter.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::cost::{CostBreakdown, Evaluator, PenaltyConfig};
use crate::network::{DesignVector, Flavor, PipeNetwork};

pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];

    /// Evaluates one point, incrementing the counter exactly once.
    fn evaluate(&self, x: &[f64]) -> CostBreakdown;

    /// Evaluates a batch. The default is sequential; wrappers may run the
    /// evaluations concurrently (the objective is pure), in which case the
    /// returned order must still match `xs`.
    fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Vec<CostBreakdown> {
        xs.iter().map(|x| self.evaluate(x)).collect()
    }

    /// Total evaluations so far.
    fn evaluations(&self) -> u64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn lower(&self) -> &[f64] {
        (**self).lower()
    }
    fn upper(&self) -> &[f64] {
        (**self).upper()
    }
    fn evaluate(&self, x: &[f64]) -> CostBreakdown {
        (**self).evaluate(x)
    }
    fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Vec<CostBreakdown> {
        (**self).evaluate_batch(xs)
    }
    fn evaluations(&self) -> u64 {
        (**self).evaluations()
    }
}

/// Network objective over a fixed design flavor. Solver failures other than
/// disconnection are folded into the disconnection cost as well (both mean
/// "unrankable except as terrible"), counted for diagnostics.
#[derive(Debug)]
pub struct NetworkObjective<'a> {
    eval: Evaluator<'a>,
    flavor: Flavor,
    lower: Vec<f64>,
    upper: Vec<f64>,
    counter: AtomicU64,
    failures: AtomicU64,
}

impl<'a> NetworkObjective<'a> {
    pub fn new(net: &'a PipeNetwork, penalty: PenaltyConfig, flavor: Flavor) -> Self {
        let (lower, upper) = net.bounds();
        NetworkObjective {
            eval: Evaluator::new(net, penalty),
            flavor,
            lower,
            upper,
            counter: AtomicU64::new(0),
            failures: AtomicU64::new(0),
        }
    }

    pub fn continuous(net: &'a PipeNetwork, penalty: PenaltyConfig) -> Self {
        Self::new(net, penalty, Flavor::Continuous)
    }

    pub fn network(&self) -> &'a PipeNetwork {
        self.eval.net
    }

    pub fn penalty(&self) -> &PenaltyConfig {
        &self.eval.penalty
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Evaluations that failed to converge and were scored as disconnected.
    pub fn failures(&self) -> u64 {
        self.failures.load(Ordering::Relaxed)
    }
}

impl Objective for NetworkObjective<'_> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn evaluate(&self, x: &[f64]) -> CostBreakdown {
        self.counter.fetch_add(1, Ordering::Relaxed);
        let design = DesignVector { diameters: x.to_vec(), flavor: self.flavor };
        match self.eval.evaluate(&design) {
            Ok(cb) => cb,
            Err(e) => {
                self.failures.fetch_add(1, Ordering::Relaxed);
                log::warn!("evaluation failed, scoring as disconnected: {e}");
                CostBreakdown {
                    pipe_cost: f64::INFINITY,
                    sum_pv: f64::INFINITY,
                    sum_dv: 0.0,
                    total: self.eval.penalty.disconnection_cost,
                    head_margin: 0.0,
                }
            }
        }
    }

    fn evaluations(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

/// Plain-function objective for tests and benchmark functions. The value
/// fills both `pipe_cost` and `total`; violations are zero.
pub struct FnObjective<F: Fn(&[f64]) -> f64 + Sync> {
    f: F,
    lower: Vec<f64>,
    upper: Vec<f64>,
    counter: AtomicU64,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(f: F, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        FnObjective { f, lower, upper, counter: AtomicU64::new(0) }
    }

    pub fn cube(f: F, dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(f, alloc::vec![lo; dim], alloc::vec![hi; dim])
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> core::fmt::Debug for FnObjective<F> {
    fn fmt(&self, fm: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        fm.debug_struct("FnObjective").field("dim", &self.lower.len()).finish()
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn evaluate(&self, x: &[f64]) -> CostBreakdown {
        self.counter.fetch_add(1, Ordering::Relaxed);
        let v = (self.f)(x);
        CostBreakdown { pipe_cost: v, sum_pv: 0.0, sum_dv: 0.0, total: v, head_margin: 0.0 }
    }

    fn evaluations(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}
