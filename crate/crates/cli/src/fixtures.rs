//! Bundled benchmark networks. The replicated variants (nytp2, nytp50) are
//! generated from the single network at load time rather than stored.

use pipesizer_core::network::{replicate_network, PipeNetwork};

use crate::error::CliError;
use crate::format::parse_network;

pub const NYTP: &str = include_str!("../fixtures/nytp.net");
pub const HANOI: &str = include_str!("../fixtures/hanoi.net");

pub const BUILTIN_NAMES: &[&str] = &["nytp", "nytp2", "nytp50", "hanoi"];

/// Loads a bundled network by name, or `None` when the name is unknown.
pub fn builtin(name: &str) -> Option<Result<PipeNetwork, CliError>> {
    let lower = name.to_ascii_lowercase();
    let load = |text: &str, label: &str| {
        parse_network(text, label).map_err(|e| CliError::Parse(label.to_string(), e))
    };
    match lower.as_str() {
        "nytp" => Some(load(NYTP, "nytp")),
        "hanoi" => Some(load(HANOI, "hanoi")),
        "nytp2" | "2nytp" => Some(load(NYTP, "nytp").and_then(|n| {
            replicate_network(&n, 2).map_err(CliError::Network)
        })),
        "nytp50" | "50nytp" => Some(load(NYTP, "nytp").and_then(|n| {
            replicate_network(&n, 50).map_err(CliError::Network)
        })),
        _ => None,
    }
}

/// Resolves `--network`: a bundled name first, otherwise a file path. A
/// `--design-file` sidecar (extra [DESIGN] text, e.g. next to a plain
/// EPANET export) is appended before parsing.
pub fn load_network(spec: &str, sidecar: Option<&str>) -> Result<PipeNetwork, CliError> {
    if sidecar.is_none() {
        if let Some(r) = builtin(spec) {
            return r;
        }
    }
    let mut text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Io(format!("cannot read network file `{spec}`: {e}")))?;
    if let Some(path) = sidecar {
        let extra = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read design file `{path}`: {e}")))?;
        text.push('\n');
        text.push_str(&extra);
    }
    let label = std::path::Path::new(spec)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(spec);
    parse_network(&text, label).map_err(|e| CliError::Parse(spec.to_string(), e))
}
