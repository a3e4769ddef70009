//! Per-run bookkeeping: best-so-far tracking and the serializable record a
//! searcher returns. Records contain no wall-clock data, so a run with the
//! same seed and configuration reproduces its record exactly.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    /// Evaluation index (1-based) at which `best_cost` was first attained.
    pub evaluation: u64,
    pub best_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    BudgetExhausted,
    /// Relative improvement over the stagnation window fell below the
    /// function tolerance.
    FunctionTolerance,
    /// A deterministic pass (greedy repair or trim) ran to completion.
    Completed,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub seed: u64,
    /// Best point of the raw (penalized) objective.
    pub best_design: Vec<f64>,
    pub best_cost: f64,
    /// Best commercial design with zero pressure violation, when one was
    /// established, and its pipe cost.
    pub best_feasible_design: Option<Vec<f64>>,
    pub best_feasible_cost: Option<f64>,
    /// Total objective evaluations consumed.
    pub evaluations: u64,
    /// Evaluation index at which the reported best was first reached.
    pub evaluations_to_best: u64,
    /// Improvement events of the raw objective; nonincreasing in cost.
    pub curve: Vec<CurvePoint>,
    pub termination: Termination,
}

impl RunRecord {
    /// The headline cost: the feasible commercial cost when the run
    /// produced one, otherwise the raw best.
    pub fn reported_cost(&self) -> f64 {
        self.best_feasible_cost.unwrap_or(self.best_cost)
    }

    pub fn feasible(&self) -> bool {
        self.best_feasible_cost.is_some()
    }
}

/// Monotone best tracker shared by the searchers.
#[derive(Debug, Clone)]
pub(crate) struct BestTracker {
    pub best_cost: f64,
    pub best_x: Vec<f64>,
    pub evals_at_best: u64,
    pub curve: Vec<CurvePoint>,
}

impl BestTracker {
    pub fn new() -> Self {
        BestTracker {
            best_cost: f64::INFINITY,
            best_x: Vec::new(),
            evals_at_best: 0,
            curve: Vec::new(),
        }
    }

    /// Records `x` if it strictly improves. `evaluation` is the 1-based
    /// index of the evaluation that produced it.
    pub fn observe(&mut self, evaluation: u64, x: &[f64], cost: f64) -> bool {
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_x = x.to_vec();
            self.evals_at_best = evaluation;
            self.curve.push(CurvePoint { evaluation, best_cost: cost });
            true
        } else {
            false
        }
    }
}
