//! The three-phase driver: CMA-ES global search on the continuous
//! objective, with every new best-ever solution rounded to commercial sizes
//! and, when the rounded cost clears the repair threshold, pushed to
//! feasibility by the upward greedy pass; after the search stops, one
//! downward greedy trim of the best feasible design. All phases charge the
//! same evaluation budget.

use alloc::vec::Vec;

use alloc::collections::BTreeSet;

use crate::cmaes::{BoundsMode, CmaConfig, CmaesRun, StagnationWindow};
use crate::greedy::{downward_greedy_bounded, upward_greedy_bounded, GreedyError};
use crate::network::{round_to_commercial, DesignVector, PipeNetwork};
use crate::objective::Objective;
use crate::record::{RunRecord, Termination};

/// Which phases run. The toggles form a prefix chain: repair implies the
/// CMA phase, trimming implies repair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Phases {
    CmaOnly,
    CmaGsu,
    CmaGsuGsd,
}

#[derive(Debug, Clone)]
pub struct HybridConfig {
    pub lambda: usize,
    /// Shared evaluation budget; greedy evaluations count against it. The
    /// final trim may overshoot by at most one sweep.
    pub budget: u64,
    /// Relative function tolerance for CMA-ES stagnation.
    pub xi: f64,
    /// Repair trigger: a rounded solution is only worth repairing when its
    /// pipe cost is below this. `None` falls back to the network's fixture
    /// value, then to 1.2x the target cost, then to +infinity.
    pub phi: Option<f64>,
    pub phases: Phases,
    pub sigma0: Option<f64>,
    pub bounds: BoundsMode,
    /// Also harvest rounding candidates from every sample of each
    /// generation (deduplicated, dominance-pruned), not only the best-ever.
    pub harvest_generation: bool,
}

impl HybridConfig {
    pub fn new(lambda: usize, budget: u64) -> Self {
        HybridConfig {
            lambda,
            budget,
            xi: 1e-5,
            phi: None,
            phases: Phases::CmaGsuGsd,
            sigma0: None,
            bounds: BoundsMode::default(),
            harvest_generation: true,
        }
    }

    pub fn with_phases(mut self, phases: Phases) -> Self {
        self.phases = phases;
        self
    }

    pub fn resolve_phi(&self, net: &PipeNetwork) -> f64 {
        self.phi
            .or(net.defaults.phi)
            .or(net.defaults.target_cost.map(|t| 1.2 * t))
            .unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Default)]
struct FeasibleBest {
    design: Option<Vec<f64>>,
    cost: f64,
    at_evaluation: u64,
}

impl FeasibleBest {
    fn offer(&mut self, design: &[f64], cost: f64, at: u64) {
        if self.design.is_none() || cost < self.cost {
            self.design = Some(design.to_vec());
            self.cost = cost;
            self.at_evaluation = at;
        }
    }
}

/// Runs the hybrid on a continuous-flavor objective over `net`'s bounds.
/// The objective must be fresh (its counter at zero) so budget accounting
/// and recorded indices line up.
///
/// Repair failures (a rounded design the greedy cannot fix, or a budget
/// that dies mid-repair) only cost their evaluations; the search continues.
/// When no feasible commercial design was established by the end, the
/// upward pass is applied once to the rounded best as a last resort, and
/// the record's feasible fields stay empty if that fails too.
pub fn run_hybrid(
    net: &PipeNetwork,
    obj: &dyn Objective,
    cfg: &HybridConfig,
    seed: u64,
) -> RunRecord {
    assert!(cfg.lambda >= 2);
    assert!(cfg.budget >= cfg.lambda as u64, "budget must cover one generation");
    assert_eq!(obj.dim(), net.decision_count);
    debug_assert_eq!(obj.evaluations(), 0, "hybrid expects a fresh objective");

    let phi = cfg.resolve_phi(net);
    let cma_cfg = CmaConfig {
        lambda: cfg.lambda,
        budget: cfg.budget,
        xi: cfg.xi,
        sigma0: cfg.sigma0,
        bounds: cfg.bounds,
    };
    let mut run = CmaesRun::new(obj, &cma_cfg, seed);
    let mut window = StagnationWindow::new(obj.dim(), cfg.lambda, cfg.xi);
    let mut seen: BTreeSet<Vec<u16>> = BTreeSet::new();
    let mut feasible = FeasibleBest::default();

    let termination;
    loop {
        if obj.evaluations() + cfg.lambda as u64 > cfg.budget {
            termination = Termination::BudgetExhausted;
            break;
        }
        let summary = run.step(obj);
        if summary.improved {
            let best_x = run.best().0.to_vec();
            consider_rounded(
                net, obj, cfg, phi, &best_x, &mut seen, &mut feasible, false,
            );
        }
        // Harvest rounding candidates from the whole generation, cheapest
        // first. Pipe cost needs no hydraulic solve, and a candidate at or
        // above the feasible incumbent cannot repair to anything better, so
        // nearly all of these are rejected for free; the few survivors are
        // exactly the lattice points worth repairing.
        let mut harvest: Vec<(f64, DesignVector)> = Vec::new();
        let sample_pool: &[Vec<f64>] =
            if cfg.harvest_generation { &summary.samples } else { &[] };
        for x in sample_pool {
            let Ok(rounded) =
                round_to_commercial(&DesignVector::continuous(x.clone()), &net.table)
            else {
                continue;
            };
            if seen.contains(&rounding_key(net, &rounded)) {
                continue;
            }
            let Ok(cost) = crate::cost::pipe_cost(net, &rounded) else { continue };
            harvest.push((cost, rounded));
        }
        harvest.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, rounded) in harvest {
            consider_rounded(
                net, obj, cfg, phi, &rounded.diameters, &mut seen, &mut feasible, false,
            );
        }
        let (_, best_cost) = run.best();
        if window.push(summary.generation_best, best_cost) {
            termination = Termination::FunctionTolerance;
            break;
        }
    }

    if feasible.design.is_none() && cfg.phases >= Phases::CmaGsu {
        // last resort: one uncapped repair of the rounded best
        let (best_x, _) = run.best();
        if !best_x.is_empty() {
            consider_rounded(net, obj, cfg, f64::INFINITY, best_x, &mut seen, &mut feasible, true);
        }
    }

    if cfg.phases >= Phases::CmaGsuGsd {
        if let Some(design) = feasible.design.clone() {
            match downward_greedy_bounded(
                obj,
                &net.table,
                &DesignVector::commercial(design),
                Some(cfg.budget),
            ) {
                Ok(out) => {
                    feasible.offer(&out.design.diameters, out.cost.pipe_cost, obj.evaluations());
                }
                Err(e) => log::warn!("downward trim failed: {e}"),
            }
        }
    }

    let evaluations = obj.evaluations();
    let evaluations_to_best = if feasible.design.is_some() {
        feasible.at_evaluation
    } else {
        run.tracker.evals_at_best
    };
    RunRecord {
        seed,
        best_design: run.tracker.best_x.clone(),
        best_cost: run.tracker.best_cost,
        best_feasible_cost: feasible.design_cost(),
        best_feasible_design: feasible.design,
        evaluations,
        evaluations_to_best,
        curve: run.tracker.curve.clone(),
        termination,
    }
}

impl FeasibleBest {
    fn design_cost(&self) -> Option<f64> {
        self.design.as_ref().map(|_| self.cost)
    }
}

fn rounding_key(net: &PipeNetwork, rounded: &DesignVector) -> Vec<u16> {
    rounded
        .diameters
        .iter()
        .map(|&d| net.table.index_of(d).unwrap_or(u16::MAX as usize) as u16)
        .collect()
}

/// Rounds a candidate and, when it is new, cheap enough and close enough
/// to feasibility, checks and repairs it. The repair trigger compares the
/// rounded design's penalized total against phi, which is what keeps wild
/// early designs (cheap pipes, huge violations) from draining the budget
/// on hopeless repairs: only near-feasible roundings are worth greedy
/// work. Everything here is charged to the shared budget.
#[allow(clippy::too_many_arguments)]
fn consider_rounded(
    net: &PipeNetwork,
    obj: &dyn Objective,
    cfg: &HybridConfig,
    phi: f64,
    best_x: &[f64],
    seen: &mut BTreeSet<Vec<u16>>,
    feasible: &mut FeasibleBest,
    uncapped: bool,
) {
    let Ok(rounded) = round_to_commercial(&DesignVector::continuous(best_x.to_vec()), &net.table)
    else {
        return; // clamped samples are always in range; defensive only
    };
    if !seen.insert(rounding_key(net, &rounded)) {
        return;
    }
    let Ok(rounded_cost) = crate::cost::pipe_cost(net, &rounded) else {
        return;
    };
    // pipe cost is a free lower bound on the penalized total
    if rounded_cost >= phi {
        return;
    }
    // repairing only adds cost, so a candidate already costlier than the
    // feasible incumbent cannot win; the small slack keeps candidates whose
    // trim might still undercut the incumbent
    if let Some(cost) = feasible.design_cost() {
        if rounded_cost >= cost * 1.02 {
            return;
        }
    }
    let cb = obj.evaluate(&rounded.diameters);
    if cb.feasible() {
        feasible.offer(&rounded.diameters, cb.pipe_cost, obj.evaluations());
        trim(net, obj, cfg, &rounded, feasible);
        return;
    }
    if cfg.phases < Phases::CmaGsu || cb.total >= phi {
        return;
    }
    let cap = if uncapped { None } else { Some(cfg.budget) };
    match upward_greedy_bounded(obj, &net.table, &rounded, cap) {
        Ok(Some(out)) => {
            feasible.offer(&out.design.diameters, out.cost.pipe_cost, obj.evaluations());
            trim(net, obj, cfg, &out.design, feasible);
        }
        Ok(None) => log::debug!("repair abandoned: budget exhausted"),
        Err(GreedyError::InfeasibleNetwork(pv)) => {
            log::warn!("network is infeasible even at maximum sizes (Sum_PV = {pv})");
        }
        Err(e) => log::debug!("repair failed: {e}"),
    }
}

/// Trims one feasible design and folds the result into the running best.
/// The repair pass leaves some pipes a step larger than feasibility needs,
/// so every repaired design is worth one trimming pass, not only the final
/// winner.
fn trim(
    net: &PipeNetwork,
    obj: &dyn Objective,
    cfg: &HybridConfig,
    design: &DesignVector,
    feasible: &mut FeasibleBest,
) {
    if cfg.phases < Phases::CmaGsuGsd {
        return;
    }
    match downward_greedy_bounded(obj, &net.table, design, Some(cfg.budget)) {
        Ok(out) => {
            feasible.offer(&out.design.diameters, out.cost.pipe_cost, obj.evaluations());
        }
        Err(e) => log::debug!("trim failed: {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::PenaltyConfig;
    use crate::testutil::three_pipe_net;
    use crate::objective::NetworkObjective;
    use crate::FEASIBLE_PV_EPS;

    fn check_run(phases: Phases) -> RunRecord {
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let obj = NetworkObjective::continuous(&net, PenaltyConfig::default());
        let cfg = HybridConfig {
            phi: Some(f64::INFINITY),
            phases,
            ..HybridConfig::new(10, 2_000)
        };
        let rec = run_hybrid(&net, &obj, &cfg, 3);
        // total evaluations within budget plus one trailing sweep
        assert!(
            rec.evaluations <= cfg.budget + net.decision_count as u64,
            "evals = {}",
            rec.evaluations
        );
        if let Some(d) = &rec.best_feasible_design {
            let cb = obj.evaluate(d);
            assert!(cb.sum_pv <= FEASIBLE_PV_EPS);
            assert!(net.table.index_of(d[0]).is_some(), "feasible design is commercial");
            assert!((cb.pipe_cost - rec.best_feasible_cost.unwrap()).abs() < 1e-9);
        }
        rec
    }

    #[test]
    fn all_phase_combinations_produce_consistent_records() {
        let full = check_run(Phases::CmaGsuGsd);
        assert!(full.feasible(), "full hybrid must land feasible on the synthetic net");
        let gsu = check_run(Phases::CmaGsu);
        if let (Some(a), Some(b)) = (full.best_feasible_cost, gsu.best_feasible_cost) {
            assert!(a <= b + 1e-9, "trim never hurts: {a} vs {b}");
        }
        check_run(Phases::CmaOnly);
    }

    #[test]
    fn same_seed_reproduces_the_record() {
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let cfg = HybridConfig::new(8, 1_000);
        let a = {
            let obj = NetworkObjective::continuous(&net, PenaltyConfig::default());
            run_hybrid(&net, &obj, &cfg, 11)
        };
        let b = {
            let obj = NetworkObjective::continuous(&net, PenaltyConfig::default());
            run_hybrid(&net, &obj, &cfg, 11)
        };
        assert_eq!(a, b);
    }
}
