//! Pipe-diameter optimization for gravity-fed water distribution networks.
//!
//! The crate provides:
//!
//! * domain types for networks, commercial diameter tables and candidate
//!   designs ([`network`]),
//! * a demand-driven steady-state hydraulic solver using the Hazen-Williams
//!   head-loss relation ([`hydraulics`]),
//! * the penalized cost objective: pipe cost plus pressure- and
//!   diameter-violation penalties ([`cost`]),
//! * three stochastic searchers over box-bounded design vectors: CMA-ES,
//!   randomized local search and a (1+1)-EA ([`cmaes`], [`local_search`]),
//! * greedy repair (upward) and trimming (downward) passes over commercial
//!   designs ([`greedy`]), and
//! * the three-phase hybrid driver that chains them ([`hybrid`]).
//!
//! The crate is `no_std` + `alloc`; IO, file formats and the CLI live in the
//! companion `pipesizer-cli` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod cmaes;
pub mod cost;
pub mod greedy;
pub mod hybrid;
pub mod hydraulics;
pub mod local_search;
pub mod network;
pub mod objective;
pub mod record;
#[cfg(test)]
pub(crate) mod testutil;
pub mod units;

pub use cost::{total_cost, CostBreakdown, Evaluator, PenaltyConfig, PenaltyMode};
pub use hydraulics::{head_loss, solve_steady_state, HydraulicError, HydraulicState};
pub use network::{
    replicate_network, round_to_commercial, search_space_size, DesignVector, DiameterTable,
    Flavor, NetworkError, Node, NodeKind, Pipe, PipeNetwork,
};
pub use objective::{FnObjective, NetworkObjective, Objective};
pub use record::{CurvePoint, RunRecord, Termination};

/// A design is pressure-feasible when its violation sum (in the network's
/// native head unit) does not exceed this bound. The solver resolves heads
/// far more tightly, so the bound only absorbs arithmetic dust.
pub const FEASIBLE_PV_EPS: f64 = 1e-6;

pub(crate) mod math {
    //! Thin wrappers over `libm` so the crate builds without `std` and all
    //! transcendental results are bit-identical across platforms.

    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }

    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }

    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
}
