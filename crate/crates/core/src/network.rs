//! Network domain types: nodes, pipes, commercial diameter tables, candidate
//! designs, and the structural operations on them (commercial rounding,
//! search-space size, benchmark replication).
//!
//! All physical quantities are stored in SI units (m, m³/s). Conversion from
//! source units happens at ingestion; [`crate::units::UnitSpec`] records what
//! the source used so reports can be emitted in the benchmark's own units.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::units::UnitSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate pipe id `{0}`")]
    DuplicatePipe(String),
    #[error("pipe `{0}` references both endpoints as node index {1}")]
    SelfLoop(String, usize),
    #[error("pipe `{id}` has non-positive {what}")]
    NonPositive { id: String, what: &'static str },
    #[error("junction `{0}` has negative demand")]
    NegativeDemand(String),
    #[error("network has no reservoir")]
    NoReservoir,
    #[error("decision indices are not a gapless 0..{expected} range")]
    BadDecisionIndices { expected: usize },
    #[error("junction `{0}` cannot reach a reservoir even with every pipe installed")]
    Unreachable(String),
    #[error("diameter table: {0}")]
    BadTable(String),
    #[error("design value {value} outside table range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("design has {got} values but the network has {want} decision pipes")]
    DimensionMismatch { got: usize, want: usize },
    #[error("value {0} is not a commercial size of the table")]
    NotCommercial(f64),
    #[error("replication count must be positive")]
    ZeroReplication,
    #[error("replication requires exactly one reservoir, found {0}")]
    MultipleReservoirs(usize),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NodeKind {
    /// Demand node. `min_head` is the total-head floor (m); use
    /// `f64::NEG_INFINITY` for an unconstrained junction.
    Junction { demand: f64, min_head: f64 },
    /// Fixed-grade node holding `head` (m) exactly.
    Reservoir { head: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Node {
    pub id: String,
    /// Ground elevation (m). Heads are total heads, so this is carried only
    /// for reporting; the benchmarks are specified directly in total head.
    pub elevation: f64,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_reservoir(&self) -> bool {
        matches!(self.kind, NodeKind::Reservoir { .. })
    }

    pub fn min_head(&self) -> Option<f64> {
        match self.kind {
            NodeKind::Junction { min_head, .. } if min_head.is_finite() => Some(min_head),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pipe {
    pub id: String,
    /// Node indices into [`PipeNetwork::nodes`].
    pub from: usize,
    pub to: usize,
    /// Length (m).
    pub length: f64,
    /// Hazen-Williams roughness coefficient C.
    pub roughness: f64,
    /// Diameter (m) of a pre-existing conduit in this corridor, if any.
    /// Duplication benchmarks keep the old tunnel in parallel with the new
    /// pipe; fixed (non-decision) pipes carry their diameter here.
    pub existing_diameter: Option<f64>,
    /// Position of this pipe's new diameter in the design vector, or `None`
    /// for pipes that are not sized by the optimizer.
    pub decision_index: Option<usize>,
}

/// How unit cost depends on diameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CostModel {
    /// One cost per commercial size, per metre of pipe. Continuous diameters
    /// are costed by linear interpolation between the bracketing sizes.
    PerSize(Vec<f64>),
    /// Closed form `coefficient * D^exponent` per metre, with D in inches
    /// (the Hanoi convention).
    PowerLaw { coefficient: f64, exponent: f64 },
}

/// The commercial diameter menu and its cost model.
///
/// `sizes` is strictly ascending and may start with 0, meaning "install no
/// pipe" (duplication problems).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiameterTable {
    sizes: Vec<f64>,
    cost: CostModel,
}

impl DiameterTable {
    pub fn new(sizes: Vec<f64>, cost: CostModel) -> Result<Self, NetworkError> {
        if sizes.is_empty() {
            return Err(NetworkError::BadTable("no sizes".to_string()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NetworkError::BadTable(
                "sizes must be strictly ascending".to_string(),
            ));
        }
        if sizes[0] < 0.0 {
            return Err(NetworkError::BadTable("negative size".to_string()));
        }
        match &cost {
            CostModel::PerSize(costs) => {
                if costs.len() != sizes.len() {
                    return Err(NetworkError::BadTable(format!(
                        "{} costs for {} sizes",
                        costs.len(),
                        sizes.len()
                    )));
                }
                if costs.windows(2).any(|w| w[0] > w[1]) {
                    return Err(NetworkError::BadTable(
                        "unit cost must be nondecreasing in diameter".to_string(),
                    ));
                }
                if sizes[0] == 0.0 && costs[0] != 0.0 {
                    return Err(NetworkError::BadTable(
                        "size 0 must cost 0".to_string(),
                    ));
                }
            }
            CostModel::PowerLaw { coefficient, exponent } => {
                if *coefficient <= 0.0 || *exponent <= 0.0 {
                    return Err(NetworkError::BadTable(
                        "power-law parameters must be positive".to_string(),
                    ));
                }
            }
        }
        Ok(DiameterTable { sizes, cost })
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn min_size(&self) -> f64 {
        self.sizes[0]
    }

    pub fn max_size(&self) -> f64 {
        *self.sizes.last().unwrap()
    }

    /// Index of a commercial value, tolerating float dust from unit
    /// conversions (1e-9 relative).
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.sizes.iter().position(|&s| {
            let tol = 1e-9 * s.abs().max(1e-3);
            (s - value).abs() <= tol
        })
    }

    /// Unit cost (per metre) of an arbitrary diameter within table bounds.
    /// Per-size tables interpolate linearly between bracketing sizes; the
    /// power law evaluates directly.
    pub fn unit_cost(&self, diameter: f64) -> Result<f64, NetworkError> {
        match &self.cost {
            CostModel::PowerLaw { coefficient, exponent } => {
                let inches = diameter / crate::units::METERS_PER_INCH;
                Ok(coefficient * crate::math::powf(inches, *exponent))
            }
            CostModel::PerSize(costs) => {
                let (lo, hi) = (self.min_size(), self.max_size());
                if diameter < lo - 1e-12 || diameter > hi + 1e-12 {
                    return Err(NetworkError::OutOfRange {
                        value: diameter,
                        min: lo,
                        max: hi,
                    });
                }
                let d = diameter.clamp(lo, hi);
                // find bracket [i, i+1] with sizes[i] <= d <= sizes[i+1]
                let i = match self.sizes.iter().rposition(|&s| s <= d) {
                    Some(i) => i.min(self.sizes.len() - 2),
                    None => 0,
                };
                let (a, b) = (self.sizes[i], self.sizes[i + 1]);
                let t = if b > a { (d - a) / (b - a) } else { 0.0 };
                Ok(costs[i] + t * (costs[i + 1] - costs[i]))
            }
        }
    }
}

/// Fixture-supplied objective settings parsed from a network file.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PenaltyDefaults {
    /// Cost per unit of pressure violation, in the native head unit.
    pub pressure_factor: f64,
    /// Cost per unit of diameter violation.
    pub diameter_factor: f64,
    /// Enables the special low-range diameter penalty used by the New York
    /// tunnels benchmark (triangular, peaking at 3 between size 0 and the
    /// first commercial size).
    pub nytp_special: bool,
    /// Best-known (target) cost, used for success-rate bookkeeping.
    pub target_cost: Option<f64>,
    /// Repair trigger threshold for the hybrid; defaults to 1.2x target.
    pub phi: Option<f64>,
}

impl Default for PenaltyDefaults {
    fn default() -> Self {
        PenaltyDefaults {
            pressure_factor: 1e7,
            diameter_factor: 1e7,
            nytp_special: false,
            target_cost: None,
            phi: None,
        }
    }
}

/// Immutable topology plus physical data for one benchmark network.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipeNetwork {
    pub name: String,
    pub nodes: Vec<Node>,
    pub pipes: Vec<Pipe>,
    pub table: DiameterTable,
    pub decision_count: usize,
    pub units: UnitSpec,
    pub defaults: PenaltyDefaults,
}

impl PipeNetwork {
    /// Validates every structural invariant:
    /// unique ids, positive lengths and roughness, nonnegative demands, at
    /// least one reservoir, gapless decision indices, and reachability of
    /// every junction from a reservoir when all decision pipes are at the
    /// largest size.
    pub fn new(
        name: String,
        nodes: Vec<Node>,
        pipes: Vec<Pipe>,
        table: DiameterTable,
        units: UnitSpec,
        defaults: PenaltyDefaults,
    ) -> Result<Self, NetworkError> {
        for (i, n) in nodes.iter().enumerate() {
            if nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(NetworkError::DuplicateNode(n.id.clone()));
            }
            if let NodeKind::Junction { demand, .. } = n.kind {
                if demand < 0.0 {
                    return Err(NetworkError::NegativeDemand(n.id.clone()));
                }
            }
        }
        if !nodes.iter().any(|n| n.is_reservoir()) {
            return Err(NetworkError::NoReservoir);
        }
        let mut decision_seen = Vec::new();
        for (i, p) in pipes.iter().enumerate() {
            if pipes[..i].iter().any(|q| q.id == p.id) {
                return Err(NetworkError::DuplicatePipe(p.id.clone()));
            }
            if p.from == p.to {
                return Err(NetworkError::SelfLoop(p.id.clone(), p.from));
            }
            debug_assert!(p.from < nodes.len() && p.to < nodes.len());
            if p.length <= 0.0 {
                return Err(NetworkError::NonPositive { id: p.id.clone(), what: "length" });
            }
            if p.roughness <= 0.0 {
                return Err(NetworkError::NonPositive { id: p.id.clone(), what: "roughness" });
            }
            if let Some(k) = p.decision_index {
                decision_seen.push(k);
            }
        }
        let n_dec = decision_seen.len();
        decision_seen.sort_unstable();
        decision_seen.dedup();
        if decision_seen.len() != n_dec
            || decision_seen.first().map(|&k| k != 0).unwrap_or(false)
            || decision_seen.last().map(|&k| k != n_dec - 1).unwrap_or(false)
        {
            return Err(NetworkError::BadDecisionIndices { expected: n_dec });
        }

        let net = PipeNetwork { name, nodes, pipes, table, decision_count: n_dec, units, defaults };

        // reachability with everything installed
        let mut reach = alloc::vec![false; net.nodes.len()];
        let mut stack: Vec<usize> = net
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_reservoir())
            .map(|(i, _)| i)
            .collect();
        for &s in &stack {
            reach[s] = true;
        }
        while let Some(u) = stack.pop() {
            for p in &net.pipes {
                let v = if p.from == u {
                    p.to
                } else if p.to == u {
                    p.from
                } else {
                    continue;
                };
                if !reach[v] {
                    reach[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some((i, _)) = net.nodes.iter().enumerate().find(|(i, _)| !reach[*i]) {
            return Err(NetworkError::Unreachable(net.nodes[i].id.clone()));
        }
        Ok(net)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Decision pipes ordered by decision index.
    pub fn decision_pipes(&self) -> Vec<usize> {
        let mut v = alloc::vec![0usize; self.decision_count];
        for (i, p) in self.pipes.iter().enumerate() {
            if let Some(k) = p.decision_index {
                v[k] = i;
            }
        }
        v
    }

    /// Per-coordinate lower/upper design bounds from the diameter table.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.table.min_size();
        let hi = self.table.max_size();
        (
            alloc::vec![lo; self.decision_count],
            alloc::vec![hi; self.decision_count],
        )
    }

    pub fn junction_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_reservoir()).count()
    }

    /// All-minimum and all-maximum commercial designs.
    pub fn design_at_min(&self) -> DesignVector {
        DesignVector::commercial(alloc::vec![self.table.min_size(); self.decision_count])
    }

    pub fn design_at_max(&self) -> DesignVector {
        DesignVector::commercial(alloc::vec![self.table.max_size(); self.decision_count])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Flavor {
    /// Any value within table bounds; costed by interpolation, no diameter
    /// penalty.
    Continuous,
    /// Values on a fixed grid (e.g. whole inches) that need not be
    /// commercial; the diameter-violation penalty applies.
    DiscreteStepped,
    /// Every value is a member of the diameter table.
    Commercial,
}

/// One diameter per decision pipe, in metres.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignVector {
    pub diameters: Vec<f64>,
    pub flavor: Flavor,
}

impl DesignVector {
    pub fn continuous(diameters: Vec<f64>) -> Self {
        DesignVector { diameters, flavor: Flavor::Continuous }
    }

    pub fn discrete(diameters: Vec<f64>) -> Self {
        DesignVector { diameters, flavor: Flavor::DiscreteStepped }
    }

    pub fn commercial(diameters: Vec<f64>) -> Self {
        DesignVector { diameters, flavor: Flavor::Commercial }
    }

    pub fn len(&self) -> usize {
        self.diameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diameters.is_empty()
    }
}

/// Snap every diameter to the nearer of its two bracketing commercial sizes.
/// A value exactly at the midpoint of a bracket rounds UP, which errs toward
/// feasibility; the choice is part of the contract so tests are
/// deterministic. The result always has [`Flavor::Commercial`].
pub fn round_to_commercial(
    design: &DesignVector,
    table: &DiameterTable,
) -> Result<DesignVector, NetworkError> {
    let sizes = table.sizes();
    let (lo, hi) = (table.min_size(), table.max_size());
    let mut out = Vec::with_capacity(design.len());
    for &d in &design.diameters {
        if d < lo - 1e-12 || d > hi + 1e-12 {
            return Err(NetworkError::OutOfRange { value: d, min: lo, max: hi });
        }
        let d = d.clamp(lo, hi);
        let i = match sizes.iter().rposition(|&s| s <= d) {
            Some(i) => i.min(sizes.len() - 2),
            None => 0,
        };
        let (a, b) = (sizes[i], sizes[i + 1]);
        let mid = 0.5 * (a + b);
        out.push(if d < mid { a } else { b });
    }
    Ok(DesignVector::commercial(out))
}

/// |sizes|^N, exactly.
pub fn search_space_size(net: &PipeNetwork) -> BigUint {
    BigUint::from(net.table.len()).pow(net.decision_count as u32)
}

/// Builds the k-fold replica of a single-reservoir network: k disjoint
/// copies of the junction/pipe structure all fed from the one shared
/// reservoir. Copy `c` has every id suffixed with `_c` and its decision
/// indices shifted by `c*N`. Demands, minimum heads and the diameter table
/// are cloned verbatim, so the copies are hydraulically independent and the
/// best-known replicated cost is k times the single-network optimum.
pub fn replicate_network(net: &PipeNetwork, k: usize) -> Result<PipeNetwork, NetworkError> {
    if k == 0 {
        return Err(NetworkError::ZeroReplication);
    }
    let reservoirs: Vec<usize> = net
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.is_reservoir())
        .map(|(i, _)| i)
        .collect();
    if reservoirs.len() != 1 {
        return Err(NetworkError::MultipleReservoirs(reservoirs.len()));
    }
    let res = reservoirs[0];
    let n_orig = net.nodes.len();
    let base_n = net.decision_count;

    let mut nodes = Vec::with_capacity(1 + k * (n_orig - 1));
    nodes.push(net.nodes[res].clone());
    // node index map per copy
    let mut index_map = alloc::vec![alloc::vec![0usize; n_orig]; k];
    for (c, map) in index_map.iter_mut().enumerate() {
        for (i, node) in net.nodes.iter().enumerate() {
            if i == res {
                map[i] = 0;
                continue;
            }
            map[i] = nodes.len();
            let mut cloned = node.clone();
            cloned.id = format!("{}_{}", node.id, c + 1);
            nodes.push(cloned);
        }
    }
    let mut pipes = Vec::with_capacity(k * net.pipes.len());
    for (c, map) in index_map.iter().enumerate() {
        for p in &net.pipes {
            let mut q = p.clone();
            q.id = format!("{}_{}", p.id, c + 1);
            q.from = map[p.from];
            q.to = map[p.to];
            q.decision_index = p.decision_index.map(|d| c * base_n + d);
            pipes.push(q);
        }
    }
    let mut defaults = net.defaults.clone();
    defaults.target_cost = defaults.target_cost.map(|t| t * k as f64);
    defaults.phi = defaults.phi.map(|t| t * k as f64);
    PipeNetwork::new(
        format!("{}x{}", net.name, k),
        nodes,
        pipes,
        net.table.clone(),
        net.units,
        defaults,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inches(v: f64) -> f64 {
        v * crate::units::METERS_PER_INCH
    }

    fn nytp_like_table() -> DiameterTable {
        let sizes: Vec<f64> = [
            0.0, 36.0, 48.0, 60.0, 72.0, 84.0, 96.0, 108.0, 120.0, 132.0, 144.0, 156.0, 168.0,
            180.0, 192.0, 204.0,
        ]
        .iter()
        .map(|&s| inches(s))
        .collect();
        let costs = alloc::vec![
            0.0, 93.5, 134.0, 176.0, 221.0, 267.0, 316.0, 365.0, 417.0, 469.0, 522.0, 577.0,
            632.0, 689.0, 746.0, 804.0
        ];
        DiameterTable::new(sizes, CostModel::PerSize(costs)).unwrap()
    }

    #[test]
    fn rounding_matches_published_examples() {
        let t = nytp_like_table();
        let d = DesignVector::continuous(alloc::vec![inches(99.97), inches(118.99), inches(84.0)]);
        let r = round_to_commercial(&d, &t).unwrap();
        assert_eq!(r.flavor, Flavor::Commercial);
        assert!((r.diameters[0] - inches(96.0)).abs() < 1e-12);
        assert!((r.diameters[1] - inches(120.0)).abs() < 1e-12);
        assert!((r.diameters[2] - inches(84.0)).abs() < 1e-12);
    }

    #[test]
    fn rounding_tie_goes_up() {
        // clean integer table so the midpoint is exactly representable
        let t = DiameterTable::new(
            alloc::vec![96.0, 108.0],
            CostModel::PerSize(alloc::vec![316.0, 365.0]),
        )
        .unwrap();
        // both outputs are reachable; the documented rule picks the upper
        let r = round_to_commercial(&DesignVector::continuous(alloc::vec![102.0]), &t).unwrap();
        assert_eq!(r.diameters[0], 108.0);
        let below = round_to_commercial(&DesignVector::continuous(alloc::vec![101.999]), &t)
            .unwrap();
        assert_eq!(below.diameters[0], 96.0);
    }

    #[test]
    fn rounding_rejects_out_of_range() {
        let t = nytp_like_table();
        let d = DesignVector::continuous(alloc::vec![inches(210.0)]);
        assert!(matches!(
            round_to_commercial(&d, &t),
            Err(NetworkError::OutOfRange { .. })
        ));
    }

    #[test]
    fn interpolated_unit_cost_hits_table_points_exactly() {
        let t = nytp_like_table();
        assert_eq!(t.unit_cost(inches(96.0)).unwrap(), 316.0);
        let mid = t.unit_cost(inches(102.0)).unwrap();
        assert!((mid - 340.5).abs() < 1e-9, "got {mid}");
    }

    #[test]
    fn table_rejects_disorder() {
        assert!(DiameterTable::new(
            alloc::vec![0.3, 0.2],
            CostModel::PerSize(alloc::vec![1.0, 2.0])
        )
        .is_err());
        assert!(DiameterTable::new(
            alloc::vec![0.0, 0.2],
            CostModel::PerSize(alloc::vec![5.0, 2.0])
        )
        .is_err());
        assert!(DiameterTable::new(
            alloc::vec![0.0, 0.2],
            CostModel::PerSize(alloc::vec![1.0, 2.0])
        )
        .is_err()); // size 0 must cost 0
    }
}
