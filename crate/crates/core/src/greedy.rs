//! Greedy repair and trimming over commercial designs.
//!
//! Both passes sweep the decision pipes, evaluate the single-step candidate
//! for each (one adjacent commercial size up or down), and apply the best
//! move by ratio:
//!
//! * upward: violation reduction per unit of extra cost, applied while any
//!   pressure violation remains; guaranteed to end feasible because the
//!   all-maximum design is checked first,
//! * downward: cost saving per unit of head margin consumed, applied while
//!   some move preserves feasibility.
//!
//! A zero denominator ranks as +infinity, ahead of every finite ratio;
//! among those the larger numerator wins, then the lower pipe index. The
//! chosen candidate's evaluation is reused as the new state, so one sweep
//! costs at most N evaluations.

use alloc::vec::Vec;

use crate::cost::CostBreakdown;
use crate::network::{DesignVector, DiameterTable, NetworkError};
use crate::objective::Objective;
use crate::FEASIBLE_PV_EPS;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreedyError {
    #[error("even the all-maximum design violates pressure constraints (Sum_PV = {0})")]
    InfeasibleNetwork(f64),
    #[error("downward greedy requires a pressure-feasible start (Sum_PV = {0})")]
    InfeasibleInput(f64),
    #[error("no single-step upsizing reduces the violation (Sum_PV = {0})")]
    NoImprovingMove(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// One applied move.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GreedyMove {
    /// Decision index of the resized pipe.
    pub pipe: usize,
    /// Sizes in metres; `new_size` is adjacent to `old_size` in the table.
    pub old_size: f64,
    pub new_size: f64,
    /// Violation reduction (upward) or head margin consumed (downward), in
    /// the native head unit.
    pub delta_pv: f64,
    /// Cost increase (upward) or saving (downward).
    pub delta_cost: f64,
    /// The ranking ratio; `f64::INFINITY` marks a zero denominator.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub design: DesignVector,
    pub cost: CostBreakdown,
    pub moves: Vec<GreedyMove>,
    /// Objective evaluations consumed by this pass.
    pub evaluations: u64,
}

fn to_indices(design: &DesignVector, table: &DiameterTable) -> Result<Vec<usize>, GreedyError> {
    design
        .diameters
        .iter()
        .map(|&d| {
            table
                .index_of(d)
                .ok_or(GreedyError::Network(NetworkError::NotCommercial(d)))
        })
        .collect()
}

fn values(idx: &[usize], table: &DiameterTable) -> Vec<f64> {
    idx.iter().map(|&i| table.sizes()[i]).collect()
}

/// Lexicographic move ranking: ratio, then numerator, then low index.
fn better(
    (ratio_a, num_a, pipe_a): (f64, f64, usize),
    (ratio_b, num_b, pipe_b): (f64, f64, usize),
) -> bool {
    match ratio_a.total_cmp(&ratio_b) {
        core::cmp::Ordering::Greater => true,
        core::cmp::Ordering::Less => false,
        core::cmp::Ordering::Equal => match num_a.total_cmp(&num_b) {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => pipe_a < pipe_b,
        },
    }
}

/// Upsizes one pipe at a time until no pressure violation remains.
///
/// Checks the all-maximum design first (one evaluation): when even that
/// violates, no amount of upsizing can repair the network and the pass
/// fails instead of looping. An already-feasible input returns unchanged
/// with zero moves.
pub fn upward_greedy(
    obj: &dyn Objective,
    table: &DiameterTable,
    start: &DesignVector,
) -> Result<GreedyOutcome, GreedyError> {
    Ok(upward_greedy_bounded(obj, table, start, None)?
        .expect("uncapped repair cannot run out of budget"))
}

/// [`upward_greedy`] that abandons the repair when the shared evaluation
/// counter passes `eval_cap` (the hybrid charges repairs to its budget).
/// `Ok(None)` means the budget ran out before feasibility was restored.
pub fn upward_greedy_bounded(
    obj: &dyn Objective,
    table: &DiameterTable,
    start: &DesignVector,
    eval_cap: Option<u64>,
) -> Result<Option<GreedyOutcome>, GreedyError> {
    let started = obj.evaluations();
    let mut idx = to_indices(start, table)?;
    let top = table.len() - 1;

    let mut current = obj.evaluate(&values(&idx, table));
    let mut moves = Vec::new();
    if current.sum_pv <= FEASIBLE_PV_EPS {
        return Ok(Some(GreedyOutcome {
            design: DesignVector::commercial(values(&idx, table)),
            cost: current,
            moves,
            evaluations: obj.evaluations() - started,
        }));
    }

    let all_max = obj.evaluate(&alloc::vec![table.max_size(); idx.len()]);
    if all_max.sum_pv > FEASIBLE_PV_EPS {
        return Err(GreedyError::InfeasibleNetwork(all_max.sum_pv));
    }

    while current.sum_pv > FEASIBLE_PV_EPS {
        if let Some(cap) = eval_cap {
            if obj.evaluations() >= cap {
                return Ok(None);
            }
        }
        let mut best: Option<((f64, f64, usize), usize, CostBreakdown)> = None;
        for p in 0..idx.len() {
            if idx[p] == top {
                continue;
            }
            idx[p] += 1;
            let cand = obj.evaluate(&values(&idx, table));
            idx[p] -= 1;
            let dpv = current.sum_pv - cand.sum_pv;
            let dcost = cand.pipe_cost - current.pipe_cost;
            if dpv <= 0.0 {
                continue; // moves that reduce nothing are not candidates
            }
            let ratio = if dcost > 0.0 { dpv / dcost } else { f64::INFINITY };
            let key = (ratio, dpv, p);
            if best.as_ref().map(|(k, _, _)| better(key, *k)).unwrap_or(true) {
                best = Some((key, p, cand));
            }
        }
        let Some(((ratio, dpv, _), p, cand)) = best else {
            return Err(GreedyError::NoImprovingMove(current.sum_pv));
        };
        moves.push(GreedyMove {
            pipe: p,
            old_size: table.sizes()[idx[p]],
            new_size: table.sizes()[idx[p] + 1],
            delta_pv: dpv,
            delta_cost: cand.pipe_cost - current.pipe_cost,
            ratio,
        });
        idx[p] += 1;
        current = cand;
    }

    Ok(Some(GreedyOutcome {
        design: DesignVector::commercial(values(&idx, table)),
        cost: current,
        moves,
        evaluations: obj.evaluations() - started,
    }))
}

/// Downsizes one pipe at a time while feasibility is preserved, preferring
/// the largest saving per unit of head margin consumed. Stops when no
/// single-step reduction keeps the violation sum at zero.
pub fn downward_greedy(
    obj: &dyn Objective,
    table: &DiameterTable,
    start: &DesignVector,
) -> Result<GreedyOutcome, GreedyError> {
    downward_greedy_bounded(obj, table, start, None)
}

/// [`downward_greedy`] that stops starting new sweeps once the evaluation
/// counter passes `eval_cap`. The first sweep always runs, so a driver that
/// arrives with an exhausted budget still gets one trimming pass; the total
/// overshoot is at most one sweep (N evaluations).
pub fn downward_greedy_bounded(
    obj: &dyn Objective,
    table: &DiameterTable,
    start: &DesignVector,
    eval_cap: Option<u64>,
) -> Result<GreedyOutcome, GreedyError> {
    let started = obj.evaluations();
    let mut idx = to_indices(start, table)?;

    let mut current = obj.evaluate(&values(&idx, table));
    if current.sum_pv > FEASIBLE_PV_EPS {
        return Err(GreedyError::InfeasibleInput(current.sum_pv));
    }
    let mut moves = Vec::new();

    let mut first_sweep = true;
    loop {
        if !first_sweep {
            if let Some(cap) = eval_cap {
                if obj.evaluations() >= cap {
                    break;
                }
            }
        }
        first_sweep = false;
        let mut best: Option<((f64, f64, usize), usize, CostBreakdown)> = None;
        for p in 0..idx.len() {
            if idx[p] == 0 {
                continue;
            }
            idx[p] -= 1;
            let cand = obj.evaluate(&values(&idx, table));
            idx[p] += 1;
            if cand.sum_pv > FEASIBLE_PV_EPS {
                continue;
            }
            let saving = current.pipe_cost - cand.pipe_cost;
            let margin = (current.head_margin - cand.head_margin).max(0.0);
            let ratio = if margin > 0.0 { saving / margin } else { f64::INFINITY };
            let key = (ratio, saving, p);
            if best.as_ref().map(|(k, _, _)| better(key, *k)).unwrap_or(true) {
                best = Some((key, p, cand));
            }
        }
        let Some(((ratio, _, _), p, cand)) = best else {
            break;
        };
        moves.push(GreedyMove {
            pipe: p,
            old_size: table.sizes()[idx[p]],
            new_size: table.sizes()[idx[p] - 1],
            delta_pv: (current.head_margin - cand.head_margin).max(0.0),
            delta_cost: current.pipe_cost - cand.pipe_cost,
            ratio,
        });
        idx[p] -= 1;
        current = cand;
    }

    Ok(GreedyOutcome {
        design: DesignVector::commercial(values(&idx, table)),
        cost: current,
        moves,
        evaluations: obj.evaluations() - started,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::PenaltyConfig;
    use crate::network::PipeNetwork;
    use crate::objective::{NetworkObjective, Objective};
    use crate::testutil::three_pipe_net;
    use alloc::vec;

    fn feasible(net: &PipeNetwork, sizes: &[f64]) -> bool {
        let obj = NetworkObjective::new(net, PenaltyConfig::default(), crate::Flavor::Commercial);
        obj.evaluate(sizes).sum_pv <= FEASIBLE_PV_EPS
    }

    #[test]
    fn upward_matches_enumeration_on_synthetic_tree() {
        // the frozen synthetic instance: enumerate all 27 designs, find the
        // cheapest feasible one dominating the all-min start, and check the
        // greedy climb reaches exactly it
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let sizes = net.table.sizes().to_vec();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let d = vec![sizes[a], sizes[b], sizes[c]];
                    if feasible(&net, &d) {
                        let cost =
                            crate::cost::pipe_cost(&net, &DesignVector::commercial(d.clone()))
                                .unwrap();
                        if best.as_ref().map(|(bc, _)| cost < *bc).unwrap_or(true) {
                            best = Some((cost, d));
                        }
                    }
                }
            }
        }
        let (oracle_cost, _oracle_design) = best.expect("all-max must be feasible");

        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let out = upward_greedy(&obj, &net.table, &net.design_at_min()).unwrap();
        assert!(out.cost.sum_pv <= FEASIBLE_PV_EPS);
        assert!(
            (out.cost.pipe_cost - oracle_cost).abs() < 1e-9,
            "greedy {} vs enumeration {}",
            out.cost.pipe_cost,
            oracle_cost
        );
    }

    #[test]
    fn downward_matches_enumeration_on_synthetic_tree() {
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let out = downward_greedy(&obj, &net.table, &net.design_at_max()).unwrap();
        assert!(out.cost.sum_pv <= FEASIBLE_PV_EPS);

        // cheapest feasible design overall (down-moves from all-max can
        // reach any design)
        let sizes = net.table.sizes().to_vec();
        let mut best = f64::INFINITY;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let d = vec![sizes[a], sizes[b], sizes[c]];
                    if feasible(&net, &d) {
                        let cost =
                            crate::cost::pipe_cost(&net, &DesignVector::commercial(d)).unwrap();
                        best = best.min(cost);
                    }
                }
            }
        }
        assert!(
            (out.cost.pipe_cost - best).abs() < 1e-9,
            "greedy {} vs enumeration {}",
            out.cost.pipe_cost,
            best
        );
    }

    #[test]
    fn already_feasible_input_is_returned_unchanged() {
        let net = three_pipe_net([40.0, 40.0, 40.0], [0.005, 0.005, 0.005]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let start = net.design_at_min();
        let out = upward_greedy(&obj, &net.table, &start).unwrap();
        assert_eq!(out.design.diameters, start.diameters);
        assert!(out.moves.is_empty());
    }

    #[test]
    fn all_min_design_cannot_move_down() {
        let net = three_pipe_net([40.0, 40.0, 40.0], [0.005, 0.005, 0.005]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let out = downward_greedy(&obj, &net.table, &net.design_at_min()).unwrap();
        assert!(out.moves.is_empty());
        assert_eq!(out.design.diameters, net.design_at_min().diameters);
    }

    #[test]
    fn impossible_repair_is_detected() {
        // minimum heads above the reservoir level can never be met
        let net = three_pipe_net([61.0, 40.0, 40.0], [0.02, 0.02, 0.02]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let err = upward_greedy(&obj, &net.table, &net.design_at_min()).unwrap_err();
        assert!(matches!(err, GreedyError::InfeasibleNetwork(_)));
    }

    #[test]
    fn downward_rejects_infeasible_start() {
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let err = downward_greedy(&obj, &net.table, &net.design_at_min()).unwrap_err();
        assert!(matches!(err, GreedyError::InfeasibleInput(_)));
    }

    #[test]
    fn composition_trims_without_breaking_feasibility() {
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let up = upward_greedy(&obj, &net.table, &net.design_at_min()).unwrap();
        let down = downward_greedy(&obj, &net.table, &up.design).unwrap();
        assert!(down.cost.sum_pv <= FEASIBLE_PV_EPS);
        assert!(down.cost.pipe_cost <= up.cost.pipe_cost);
    }

    #[test]
    fn sweep_evaluation_bound_holds() {
        let net = three_pipe_net([57.5, 55.0, 53.5], [0.03, 0.025, 0.02]);
        let obj = NetworkObjective::new(&net, PenaltyConfig::default(), crate::Flavor::Commercial);
        let out = upward_greedy(&obj, &net.table, &net.design_at_min()).unwrap();
        // initial + all-max check + at most N per applied move
        let n = net.decision_count as u64;
        assert!(out.evaluations <= 2 + n * out.moves.len() as u64);
    }
}
