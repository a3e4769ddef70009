//! Shared synthetic networks for unit tests.

use alloc::string::ToString;
use alloc::vec;

use crate::network::{
    CostModel, DiameterTable, Node, NodeKind, PenaltyDefaults, Pipe, PipeNetwork,
};
use crate::units::UnitSpec;

/// Reservoir feeding three junctions in series, one decision pipe per
/// segment, three sizes each: a 27-design space small enough to
/// enumerate exhaustively.
pub(crate) fn three_pipe_net(min_heads: [f64; 3], demands: [f64; 3]) -> PipeNetwork {
    let table = DiameterTable::new(
        vec![0.15, 0.25, 0.40],
        CostModel::PerSize(vec![40.0, 75.0, 150.0]),
    )
    .unwrap();
    PipeNetwork::new(
        "three".to_string(),
        vec![
            Node { id: "R".to_string(), elevation: 0.0, kind: NodeKind::Reservoir { head: 60.0 } },
            Node {
                id: "A".to_string(),
                elevation: 0.0,
                kind: NodeKind::Junction { demand: demands[0], min_head: min_heads[0] },
            },
            Node {
                id: "B".to_string(),
                elevation: 0.0,
                kind: NodeKind::Junction { demand: demands[1], min_head: min_heads[1] },
            },
            Node {
                id: "C".to_string(),
                elevation: 0.0,
                kind: NodeKind::Junction { demand: demands[2], min_head: min_heads[2] },
            },
        ],
        vec![
            Pipe {
                id: "p1".to_string(),
                from: 0,
                to: 1,
                length: 900.0,
                roughness: 120.0,
                existing_diameter: None,
                decision_index: Some(0),
            },
            Pipe {
                id: "p2".to_string(),
                from: 1,
                to: 2,
                length: 700.0,
                roughness: 120.0,
                existing_diameter: None,
                decision_index: Some(1),
            },
            Pipe {
                id: "p3".to_string(),
                from: 2,
                to: 3,
                length: 500.0,
                roughness: 120.0,
                existing_diameter: None,
                decision_index: Some(2),
            },
        ],
        table,
        UnitSpec::si(),
        PenaltyDefaults::default(),
    )
    .unwrap()
}
