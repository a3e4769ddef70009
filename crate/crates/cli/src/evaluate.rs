//! One-shot design evaluation: cost breakdown plus the per-node head
//! excess table, in the network's native units.

use pipesizer_core::cost::{total_cost_detailed, PenaltyConfig};
use pipesizer_core::network::{DesignVector, Flavor, PipeNetwork};

use crate::error::CliError;

#[derive(Debug, Clone, serde::Serialize)]
pub struct NodeExcess {
    pub node: String,
    /// Head above the minimum (native head unit); negative = violated.
    pub excess: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EvaluationReport {
    pub network: String,
    pub pipe_cost: f64,
    pub sum_pv: f64,
    pub sum_dv: f64,
    pub total: f64,
    pub feasible: bool,
    pub head_unit: &'static str,
    pub excesses: Vec<NodeExcess>,
    pub iterations: usize,
    pub residual: f64,
}

pub fn evaluate_design(
    net: &PipeNetwork,
    diameters: Vec<f64>,
) -> Result<EvaluationReport, CliError> {
    if diameters.len() != net.decision_count {
        return Err(CliError::Network(
            pipesizer_core::NetworkError::DimensionMismatch {
                got: diameters.len(),
                want: net.decision_count,
            },
        ));
    }
    // commercial when every value sits on the table, continuous otherwise
    let flavor = if diameters.iter().all(|&d| net.table.index_of(d).is_some()) {
        Flavor::Commercial
    } else {
        Flavor::Continuous
    };
    let design = DesignVector { diameters, flavor };
    let penalty = PenaltyConfig::for_network(net);
    let (cb, state) = total_cost_detailed(net, &design, &penalty)?;
    let mut excesses = Vec::new();
    let (mut iterations, mut residual) = (0usize, 0.0f64);
    if let Some(state) = state {
        iterations = state.iterations;
        residual = state.residual;
        for (i, n) in net.nodes.iter().enumerate() {
            if let Some(hmin) = n.min_head() {
                excesses.push(NodeExcess {
                    node: n.id.clone(),
                    excess: net.units.length.from_si(state.head[i] - hmin),
                });
            }
        }
    }
    Ok(EvaluationReport {
        network: net.name.clone(),
        pipe_cost: cb.pipe_cost,
        sum_pv: cb.sum_pv,
        sum_dv: cb.sum_dv,
        total: cb.total,
        feasible: cb.feasible(),
        head_unit: net.units.length.symbol(),
        excesses,
        iterations,
        residual,
    })
}

pub fn render_text(r: &EvaluationReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "network {}", r.network);
    let _ = writeln!(out, "pipe cost          {:.2}", r.pipe_cost);
    let _ = writeln!(out, "pressure violation {:.6} {}", r.sum_pv, r.head_unit);
    let _ = writeln!(out, "diameter violation {:.6}", r.sum_dv);
    let _ = writeln!(out, "penalized total    {:.2}", r.total);
    let _ = writeln!(out, "feasible           {}", if r.feasible { "yes" } else { "no" });
    for e in &r.excesses {
        let _ = writeln!(out, "node {} excess {:+.4} {}", e.node, e.excess, r.head_unit);
    }
    out
}
