//! IO companion to `pipesizer-core`: the network file format, bundled
//! benchmark fixtures, parallel evaluation, run orchestration and artifact
//! writing. The `pipesizer` binary is a thin shell over this library.

pub mod artifacts;
pub mod error;
pub mod evaluate;
pub mod fixtures;
pub mod format;
pub mod parallel;
pub mod suite;

pub use error::CliError;
pub use fixtures::load_network;
pub use format::{parse_design, parse_network, serialize_design, serialize_network};
