//! Run orchestration: one named configuration per algorithm variant, fanned
//! out over seeds (in parallel; runs are independent), with per-run records,
//! convergence curves and per-configuration statistics written as CSV/JSON.

use std::time::Instant;

use rayon::prelude::*;

use pipesizer_core::cmaes::{run_cmaes, CmaConfig};
use pipesizer_core::cost::{PenaltyConfig, PenaltyMode};
use pipesizer_core::greedy::{downward_greedy, upward_greedy};
use pipesizer_core::hybrid::{run_hybrid, HybridConfig, Phases};
use pipesizer_core::local_search::{run_one_plus_one_ea, run_rls, SigmaSchedule};
use pipesizer_core::network::{DesignVector, Flavor, PipeNetwork};
use pipesizer_core::objective::NetworkObjective;
use pipesizer_core::units::METERS_PER_INCH;
use pipesizer_core::{CostBreakdown, CurvePoint, Objective, RunRecord, Termination};

use crate::error::CliError;
use crate::parallel::ParallelObjective;

/// A run counts as a success when its feasible cost is within this of the
/// network's declared target ($0.005 million in benchmark currency).
pub const SUCCESS_TOLERANCE: f64 = 5_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoKind {
    Cmaes,
    Rls,
    OnePlusOneEa,
    Hybrid,
    UpwardGreedy,
    DownwardGreedy,
}

impl AlgoKind {
    pub fn parse(s: &str) -> Option<AlgoKind> {
        Some(match s.to_ascii_lowercase().as_str() {
            "cmaes" | "cma-es" | "cma" => AlgoKind::Cmaes,
            "rls" => AlgoKind::Rls,
            "opo_ea" | "1+1ea" | "opo" | "one_plus_one" => AlgoKind::OnePlusOneEa,
            "hybrid" | "cmaes-gsu-gsd" => AlgoKind::Hybrid,
            "gsu" | "upward" => AlgoKind::UpwardGreedy,
            "gsd" | "downward" => AlgoKind::DownwardGreedy,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgoKind::Cmaes => "cmaes",
            AlgoKind::Rls => "rls",
            AlgoKind::OnePlusOneEa => "opo_ea",
            AlgoKind::Hybrid => "hybrid",
            AlgoKind::UpwardGreedy => "gsu",
            AlgoKind::DownwardGreedy => "gsd",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self, AlgoKind::UpwardGreedy | AlgoKind::DownwardGreedy)
    }
}

/// The three decision-variable scenarios: continuous sizes, whole-inch
/// discrete sizes (penalized off the commercial grid), or candidates
/// rounded to commercial sizes before evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Continuous,
    Discrete,
    Rounded,
}

/// Initial design for the greedy passes.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Zero,
    Min,
    Max,
    /// All pipes at one size (m).
    Uniform(f64),
    /// Explicit design (m).
    Design(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub id: String,
    pub algo: AlgoKind,
    pub lambda: usize,
    pub sigma: SigmaSchedule,
    pub budget: u64,
    pub xi: f64,
    pub phi: Option<f64>,
    pub penalty_mode: PenaltyMode,
    pub scenario: Scenario,
    pub init: Option<InitSpec>,
    pub phases: Phases,
    pub bounds: pipesizer_core::cmaes::BoundsMode,
    pub harvest_generation: bool,
}

impl RunConfig {
    pub fn new(algo: AlgoKind) -> Self {
        RunConfig {
            id: algo.name().to_string(),
            algo,
            lambda: 100,
            sigma: SigmaSchedule::Fixed(0.5),
            budget: 100_000,
            xi: 1e-5,
            phi: None,
            penalty_mode: PenaltyMode::Linear,
            scenario: Scenario::Continuous,
            init: None,
            phases: Phases::CmaGsuGsd,
            bounds: pipesizer_core::cmaes::BoundsMode::default(),
            harvest_generation: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRow {
    pub config_id: String,
    pub seed: u64,
    pub record: RunRecord,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct ConfigStats {
    pub config_id: String,
    pub runs: usize,
    pub best_cost: f64,
    pub mean_cost: f64,
    /// Fraction of runs within [`SUCCESS_TOLERANCE`] of the target; zero
    /// when the network declares no target.
    pub success_rate: f64,
    pub mean_evals_to_best: f64,
}

/// Snaps candidate values before evaluation; counting and batching stay
/// with the wrapped objective.
struct SnappedObjective<'a> {
    inner: ParallelObjective<NetworkObjective<'a>>,
    net: &'a PipeNetwork,
    scenario: Scenario,
}

impl SnappedObjective<'_> {
    fn snap(&self, x: &[f64]) -> Vec<f64> {
        match self.scenario {
            Scenario::Continuous => x.to_vec(),
            Scenario::Discrete => x
                .iter()
                .map(|&d| {
                    let inches = (d / METERS_PER_INCH).round();
                    (inches * METERS_PER_INCH)
                        .clamp(self.net.table.min_size(), self.net.table.max_size())
                })
                .collect(),
            Scenario::Rounded => {
                pipesizer_core::round_to_commercial(
                    &DesignVector::continuous(x.to_vec()),
                    &self.net.table,
                )
                .map(|d| d.diameters)
                .unwrap_or_else(|_| x.to_vec())
            }
        }
    }
}

impl Objective for SnappedObjective<'_> {
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
        self.inner.evaluate(&self.snap(x))
    }
    fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Vec<CostBreakdown> {
        let snapped: Vec<Vec<f64>> = xs.iter().map(|x| self.snap(x)).collect();
        self.inner.evaluate_batch(&snapped)
    }
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}

fn initial_design(net: &PipeNetwork, init: &InitSpec) -> Result<DesignVector, CliError> {
    let n = net.decision_count;
    let table = &net.table;
    let values = match init {
        InitSpec::Zero => {
            if table.index_of(0.0).is_none() {
                return Err(CliError::Usage(
                    "init `zero` needs a diameter table containing size 0".to_string(),
                ));
            }
            vec![0.0; n]
        }
        InitSpec::Min => vec![table.min_size(); n],
        InitSpec::Max => vec![table.max_size(); n],
        InitSpec::Uniform(v) => {
            if table.index_of(*v).is_none() {
                return Err(CliError::Usage(format!(
                    "init size {v} m is not a commercial size of this network"
                )));
            }
            vec![*v; n]
        }
        InitSpec::Design(d) => {
            if d.len() != n {
                return Err(CliError::Usage(format!(
                    "design has {} values but the network has {n} decision pipes",
                    d.len()
                )));
            }
            d.clone()
        }
    };
    Ok(DesignVector::commercial(values))
}

fn greedy_record(
    seed: u64,
    out: pipesizer_core::greedy::GreedyOutcome,
) -> RunRecord {
    let feasible = out.cost.feasible();
    RunRecord {
        seed,
        best_design: out.design.diameters.clone(),
        best_cost: out.cost.total,
        best_feasible_cost: feasible.then_some(out.cost.pipe_cost),
        best_feasible_design: feasible.then(|| out.design.diameters.clone()),
        evaluations: out.evaluations,
        evaluations_to_best: out.evaluations,
        curve: vec![CurvePoint { evaluation: out.evaluations, best_cost: out.cost.total }],
        termination: Termination::Completed,
    }
}

/// Runs one configuration with one seed on a fresh objective.
pub fn run_one(net: &PipeNetwork, cfg: &RunConfig, seed: u64) -> Result<RunRecord, CliError> {
    let mut penalty = PenaltyConfig::for_network(net);
    penalty.mode = cfg.penalty_mode;
    eprintln!("DEBUG run_one algo={:?} pf={:.1e} net={} phases={:?}", cfg.algo, penalty.pressure_factor, net.name, cfg.phases);
    let flavor = match cfg.scenario {
        Scenario::Continuous => Flavor::Continuous,
        Scenario::Discrete => Flavor::DiscreteStepped,
        Scenario::Rounded => Flavor::Commercial,
    };
    let obj = SnappedObjective {
        inner: ParallelObjective::new(NetworkObjective::new(net, penalty, flavor)),
        net,
        scenario: cfg.scenario,
    };

    match cfg.algo {
        AlgoKind::Cmaes => {
            let cma = CmaConfig {
                lambda: cfg.lambda,
                budget: cfg.budget,
                xi: cfg.xi,
                sigma0: None,
                bounds: cfg.bounds,
            };
            Ok(run_cmaes(&obj, &cma, seed).0)
        }
        AlgoKind::Rls => Ok(run_rls(&obj, cfg.sigma, seed, cfg.budget)),
        AlgoKind::OnePlusOneEa => Ok(run_one_plus_one_ea(&obj, cfg.sigma, seed, cfg.budget)),
        AlgoKind::Hybrid => {
            if cfg.scenario != Scenario::Continuous {
                return Err(CliError::Usage(
                    "the hybrid always searches the continuous scenario".to_string(),
                ));
            }
            let hc = HybridConfig {
                lambda: cfg.lambda,
                budget: cfg.budget,
                xi: cfg.xi,
                phi: cfg.phi,
                phases: cfg.phases,
                sigma0: None,
                bounds: cfg.bounds,
                harvest_generation: cfg.harvest_generation,
            };
            Ok(run_hybrid(net, &obj, &hc, seed))
        }
        AlgoKind::UpwardGreedy => {
            let init = cfg.init.clone().unwrap_or(if net.table.index_of(0.0).is_some() {
                InitSpec::Zero
            } else {
                InitSpec::Min
            });
            let start = initial_design(net, &init)?;
            let out = upward_greedy(&obj, &net.table, &start).map_err(CliError::Greedy)?;
            Ok(greedy_record(seed, out))
        }
        AlgoKind::DownwardGreedy => {
            let init = cfg.init.clone().unwrap_or(InitSpec::Max);
            let start = initial_design(net, &init)?;
            let out = downward_greedy(&obj, &net.table, &start).map_err(CliError::Greedy)?;
            Ok(greedy_record(seed, out))
        }
    }
}

/// Runs every (configuration, seed) pair, in parallel across pairs.
pub fn run_suite(
    net: &PipeNetwork,
    configs: &[RunConfig],
    seeds: &[u64],
) -> Result<Vec<RunRow>, CliError> {
    crate::parallel::init_thread_pool();
    let mut jobs: Vec<(usize, u64)> = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        if c.algo.is_stochastic() {
            for &s in seeds {
                jobs.push((i, s));
            }
        } else {
            jobs.push((i, seeds.first().copied().unwrap_or(0)));
        }
    }
    let results: Vec<Result<RunRow, CliError>> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let cfg = &configs[i];
            let t0 = Instant::now();
            let record = run_one(net, cfg, seed)?;
            Ok(RunRow {
                config_id: cfg.id.clone(),
                seed,
                record,
                runtime_s: t0.elapsed().as_secs_f64(),
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Per-configuration aggregates over the rows, using each run's reported
/// (feasible when available) cost.
pub fn aggregate(rows: &[RunRow], configs: &[RunConfig], target: Option<f64>) -> Vec<ConfigStats> {
    configs
        .iter()
        .map(|c| {
            let mine: Vec<&RunRow> = rows.iter().filter(|r| r.config_id == c.id).collect();
            let costs: Vec<f64> = mine.iter().map(|r| r.record.reported_cost()).collect();
            let n = mine.len().max(1);
            let successes = match target {
                Some(t) => costs
                    .iter()
                    .zip(mine.iter())
                    .filter(|(c, r)| r.record.feasible() && (**c - t).abs() <= SUCCESS_TOLERANCE)
                    .count(),
                None => 0,
            };
            ConfigStats {
                config_id: c.id.clone(),
                runs: mine.len(),
                best_cost: costs.iter().cloned().fold(f64::INFINITY, f64::min),
                mean_cost: costs.iter().sum::<f64>() / n as f64,
                success_rate: successes as f64 / n as f64,
                mean_evals_to_best: mine
                    .iter()
                    .map(|r| r.record.evaluations_to_best as f64)
                    .sum::<f64>()
                    / n as f64,
            }
        })
        .collect()
}
