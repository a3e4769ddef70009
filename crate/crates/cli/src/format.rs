//! The network file format: EPANET-INP-style sections ([JUNCTIONS],
//! [RESERVOIRS], [PIPES]) plus a [DESIGN] extension block carrying the
//! decision pipes, the commercial diameter/cost table, minimum heads,
//! penalty factors and the benchmark target. Line oriented, whitespace
//! separated, `;` comments. Unknown sections are skipped so plain EPANET
//! exports work with a sidecar [DESIGN] file appended.
//!
//! Column units follow the `UNITS` keyword (CFS: ft/in/cfs, CMH: m/mm/m3h,
//! SI: m/m/m3s); everything is converted to SI at parse time. The
//! serializer always emits SI columns with a `REPORT_UNITS` line preserving
//! the source system, which makes parse -> serialize -> parse exact.

use std::collections::HashMap;
use std::fmt::Write as _;

use pipesizer_core::network::{
    CostModel, DiameterTable, Node, NodeKind, PenaltyDefaults, Pipe, PipeNetwork,
};
use pipesizer_core::units::{DiameterUnit, FlowUnit, LengthUnit, UnitSpec};
use pipesizer_core::NetworkError;

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("pipe references undeclared node `{0}`")]
    UnknownNode(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("missing [DESIGN] section")]
    MissingDesign,
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("`{0}` is not a number")]
    BadNumber(String),
    #[error("unknown keyword `{0}`")]
    BadKeyword(String),
    #[error("unknown value `{value}` for {key}")]
    BadValue { key: &'static str, value: String },
    #[error("DESIGN references unknown pipe `{0}`")]
    UnknownPipe(String),
    #[error("MIN_HEAD references unknown node `{0}`")]
    UnknownMinHeadNode(String),
    #[error("junction `{0}` has no minimum head (add MIN_HEAD or MIN_HEAD_ALL)")]
    MissingMinHead(String),
    #[error("missing {0} in [DESIGN]")]
    MissingDesignField(&'static str),
    #[error("{0}")]
    Structure(#[from] NetworkError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| err(line, ParseErrorKind::BadNumber(tok.to_string())))
}

/// Strip comment, split fields; `None` for blank lines.
fn fields(raw: &str) -> Option<Vec<&str>> {
    let body = match raw.find(';') {
        Some(i) => &raw[..i],
        None => raw,
    };
    let f: Vec<&str> = body.split_whitespace().collect();
    if f.is_empty() {
        None
    } else {
        Some(f)
    }
}

struct Section {
    name: String,
    /// (line number, fields) rows
    rows: Vec<(usize, Vec<String>)>,
}

fn split_sections(text: &str) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(f) = fields(raw) else { continue };
        if f[0].starts_with('[') {
            let name = f[0].trim_matches(['[', ']']).to_ascii_uppercase();
            sections.push(Section { name, rows: Vec::new() });
        } else if let Some(s) = sections.last_mut() {
            s.rows.push((line, f.into_iter().map(str::to_string).collect()));
        }
        // leading junk before any section header is ignored
    }
    sections
}

fn unit_spec(tag: &str, line: usize) -> Result<UnitSpec, ParseError> {
    match tag.to_ascii_uppercase().as_str() {
        "CFS" | "US" => Ok(UnitSpec::us_customary()),
        "CMH" | "METRIC" => Ok(UnitSpec::metric()),
        "SI" | "CMS" => Ok(UnitSpec::si()),
        other => Err(err(
            line,
            ParseErrorKind::BadValue { key: "UNITS", value: other.to_string() },
        )),
    }
}

#[derive(Default)]
struct DesignBlock {
    units: Option<UnitSpec>,
    report_units: Option<UnitSpec>,
    duplicate_mode: Option<bool>,
    decision_ids: Vec<String>,
    sizes: Vec<f64>,
    unit_costs: Option<Vec<f64>>,
    cost_power: Option<(f64, f64)>,
    min_head_all: Option<f64>,
    min_heads: Vec<(usize, String, f64)>,
    pf: Option<f64>,
    pd: Option<f64>,
    nytp_penalty: bool,
    target_cost: Option<f64>,
    phi: Option<f64>,
    name: Option<String>,
}

fn parse_design_block(rows: &[(usize, Vec<String>)]) -> Result<DesignBlock, ParseError> {
    let mut d = DesignBlock::default();
    for (line, f) in rows {
        let line = *line;
        let key = f[0].to_ascii_uppercase();
        let rest = &f[1..];
        let one = |what: &'static str| -> Result<&String, ParseError> {
            rest.first().ok_or(err(line, ParseErrorKind::MissingDesignField(what)))
        };
        match key.as_str() {
            "NAME" => d.name = Some(rest.join(" ")),
            "UNITS" => d.units = Some(unit_spec(one("UNITS")?, line)?),
            "REPORT_UNITS" => d.report_units = Some(unit_spec(one("REPORT_UNITS")?, line)?),
            "MODE" => {
                let v = one("MODE")?.to_ascii_uppercase();
                d.duplicate_mode = Some(match v.as_str() {
                    "DUPLICATE" => true,
                    "DIRECT" => false,
                    _ => {
                        return Err(err(
                            line,
                            ParseErrorKind::BadValue { key: "MODE", value: v },
                        ))
                    }
                });
            }
            "DECISION" => d.decision_ids.extend(rest.iter().cloned()),
            "SIZES" => {
                for t in rest {
                    d.sizes.push(parse_f64(t, line)?);
                }
            }
            "UNIT_COSTS" => {
                let mut v = Vec::new();
                for t in rest {
                    v.push(parse_f64(t, line)?);
                }
                d.unit_costs = Some(v);
            }
            "COST_POWER" => {
                if rest.len() != 2 {
                    return Err(err(
                        line,
                        ParseErrorKind::FieldCount { expected: 3, found: f.len() },
                    ));
                }
                d.cost_power = Some((parse_f64(&rest[0], line)?, parse_f64(&rest[1], line)?));
            }
            "MIN_HEAD_ALL" => d.min_head_all = Some(parse_f64(one("MIN_HEAD_ALL")?, line)?),
            "MIN_HEAD" => {
                if rest.len() != 2 {
                    return Err(err(
                        line,
                        ParseErrorKind::FieldCount { expected: 3, found: f.len() },
                    ));
                }
                d.min_heads.push((line, rest[0].clone(), parse_f64(&rest[1], line)?));
            }
            "PF" => d.pf = Some(parse_f64(one("PF")?, line)?),
            "PD" => d.pd = Some(parse_f64(one("PD")?, line)?),
            "NYTP_PENALTY" => {
                let v = one("NYTP_PENALTY")?.to_ascii_uppercase();
                d.nytp_penalty = matches!(v.as_str(), "TRUE" | "YES" | "1");
            }
            "TARGET_COST" => d.target_cost = Some(parse_f64(one("TARGET_COST")?, line)?),
            "PHI" => d.phi = Some(parse_f64(one("PHI")?, line)?),
            other => return Err(err(line, ParseErrorKind::BadKeyword(other.to_string()))),
        }
    }
    Ok(d)
}

/// Parses the unified native format (or EPANET INP text with the [DESIGN]
/// block appended). `name` labels the network in reports.
pub fn parse_network(text: &str, name: &str) -> Result<PipeNetwork, ParseError> {
    let sections = split_sections(text);
    let design_rows: Vec<(usize, Vec<String>)> = sections
        .iter()
        .filter(|s| s.name == "DESIGN")
        .flat_map(|s| s.rows.iter().cloned())
        .collect();
    if design_rows.is_empty() {
        return Err(err(0, ParseErrorKind::MissingDesign));
    }
    let block = parse_design_block(&design_rows)?;
    let units = block
        .units
        .ok_or(err(0, ParseErrorKind::MissingDesignField("UNITS")))?;
    let report_units = block.report_units.unwrap_or(units);
    let duplicate_mode = block.duplicate_mode.unwrap_or(false);

    // nodes: reservoirs first, then junctions, each in file order
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_lines: Vec<usize> = Vec::new();
    for s in sections.iter().filter(|s| s.name == "RESERVOIRS") {
        for (line, f) in &s.rows {
            if f.len() < 2 {
                return Err(err(
                    *line,
                    ParseErrorKind::FieldCount { expected: 2, found: f.len() },
                ));
            }
            let head = units.length.to_si(parse_f64(&f[1], *line)?);
            nodes.push(Node {
                id: f[0].clone(),
                elevation: head,
                kind: NodeKind::Reservoir { head },
            });
            node_lines.push(*line);
        }
    }
    for s in sections.iter().filter(|s| s.name == "JUNCTIONS") {
        for (line, f) in &s.rows {
            if f.len() < 3 {
                return Err(err(
                    *line,
                    ParseErrorKind::FieldCount { expected: 3, found: f.len() },
                ));
            }
            let elevation = units.length.to_si(parse_f64(&f[1], *line)?);
            let demand = units.flow.to_si(parse_f64(&f[2], *line)?);
            nodes.push(Node {
                id: f[0].clone(),
                elevation,
                kind: NodeKind::Junction { demand, min_head: f64::NEG_INFINITY },
            });
            node_lines.push(*line);
        }
    }
    let mut node_index: HashMap<String, usize> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if node_index.insert(n.id.clone(), i).is_some() {
            return Err(err(node_lines[i], ParseErrorKind::DuplicateId(n.id.clone())));
        }
    }

    // minimum heads
    let min_all = block.min_head_all.map(|v| units.length.to_si(v));
    for n in nodes.iter_mut() {
        if let NodeKind::Junction { min_head, .. } = &mut n.kind {
            if let Some(v) = min_all {
                *min_head = v;
            }
        }
    }
    for (line, id, v) in &block.min_heads {
        let i = *node_index
            .get(id.as_str())
            .ok_or(err(*line, ParseErrorKind::UnknownMinHeadNode(id.clone())))?;
        match &mut nodes[i].kind {
            NodeKind::Junction { min_head, .. } => *min_head = units.length.to_si(*v),
            NodeKind::Reservoir { .. } => {
                return Err(err(*line, ParseErrorKind::UnknownMinHeadNode(id.clone())))
            }
        }
    }
    if min_all.is_none() {
        for n in &nodes {
            if let NodeKind::Junction { min_head, .. } = n.kind {
                if min_head == f64::NEG_INFINITY {
                    return Err(err(0, ParseErrorKind::MissingMinHead(n.id.clone())));
                }
            }
        }
    }

    // pipes
    let mut pipes: Vec<Pipe> = Vec::new();
    let mut pipe_ids: HashMap<String, usize> = HashMap::new();
    for s in sections.iter().filter(|s| s.name == "PIPES") {
        for (line, f) in &s.rows {
            if f.len() < 6 {
                return Err(err(
                    *line,
                    ParseErrorKind::FieldCount { expected: 6, found: f.len() },
                ));
            }
            let from = *node_index
                .get(f[1].as_str())
                .ok_or(err(*line, ParseErrorKind::UnknownNode(f[1].clone())))?;
            let to = *node_index
                .get(f[2].as_str())
                .ok_or(err(*line, ParseErrorKind::UnknownNode(f[2].clone())))?;
            let length = units.length.to_si(parse_f64(&f[3], *line)?);
            let diameter = units.diameter.to_si(parse_f64(&f[4], *line)?);
            let roughness = parse_f64(&f[5], *line)?;
            if pipe_ids.insert(f[0].clone(), pipes.len()).is_some() {
                return Err(err(*line, ParseErrorKind::DuplicateId(f[0].clone())));
            }
            pipes.push(Pipe {
                id: f[0].clone(),
                from,
                to,
                length,
                roughness,
                existing_diameter: Some(diameter),
                decision_index: None,
            });
        }
    }

    // decision assignment
    for (k, id) in block.decision_ids.iter().enumerate() {
        let &i = pipe_ids
            .get(id.as_str())
            .ok_or(err(0, ParseErrorKind::UnknownPipe(id.clone())))?;
        pipes[i].decision_index = Some(k);
        if !duplicate_mode {
            pipes[i].existing_diameter = None;
        }
    }

    // diameter table
    if block.sizes.is_empty() {
        return Err(err(0, ParseErrorKind::MissingDesignField("SIZES")));
    }
    let sizes_si: Vec<f64> = block.sizes.iter().map(|&s| units.diameter.to_si(s)).collect();
    let cost = match (block.unit_costs, block.cost_power) {
        (Some(costs), None) => {
            // costs are per native length unit; convert to per metre
            let per_m: Vec<f64> = costs
                .iter()
                .map(|&c| c / units.length.to_si(1.0))
                .collect();
            CostModel::PerSize(per_m)
        }
        (None, Some((coefficient, exponent))) => CostModel::PowerLaw { coefficient, exponent },
        (None, None) => return Err(err(0, ParseErrorKind::MissingDesignField("UNIT_COSTS"))),
        (Some(_), Some(_)) => {
            return Err(err(
                0,
                ParseErrorKind::BadValue {
                    key: "UNIT_COSTS",
                    value: "both UNIT_COSTS and COST_POWER given".to_string(),
                },
            ))
        }
    };
    let table = DiameterTable::new(sizes_si, cost).map_err(|e| err(0, e.into()))?;

    let defaults = PenaltyDefaults {
        pressure_factor: block.pf.unwrap_or(1e7),
        diameter_factor: block.pd.unwrap_or(1e7),
        nytp_special: block.nytp_penalty,
        target_cost: block.target_cost,
        phi: block.phi,
    };

    PipeNetwork::new(
        block.name.unwrap_or_else(|| name.to_string()),
        nodes,
        pipes,
        table,
        report_units,
        defaults,
    )
    .map_err(|e| err(0, e.into()))
}

/// Emits the unified native format with SI columns (`UNITS SI`), keeping
/// the source unit system on a `REPORT_UNITS` line. SI output means no
/// conversion happens on the way out, so re-parsing reproduces the network
/// exactly.
pub fn serialize_network(net: &PipeNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; {}", net.name);
    let _ = writeln!(out, "[RESERVOIRS]");
    let _ = writeln!(out, "; id head");
    for n in &net.nodes {
        if let NodeKind::Reservoir { head } = n.kind {
            let _ = writeln!(out, "{} {}", n.id, head);
        }
    }
    let _ = writeln!(out, "\n[JUNCTIONS]");
    let _ = writeln!(out, "; id elev demand");
    for n in &net.nodes {
        if let NodeKind::Junction { demand, .. } = n.kind {
            let _ = writeln!(out, "{} {} {}", n.id, n.elevation, demand);
        }
    }
    let _ = writeln!(out, "\n[PIPES]");
    let _ = writeln!(out, "; id from to length diameter roughness");
    for p in &net.pipes {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            p.id,
            net.nodes[p.from].id,
            net.nodes[p.to].id,
            p.length,
            p.existing_diameter.unwrap_or(0.0),
            p.roughness
        );
    }
    let _ = writeln!(out, "\n[DESIGN]");
    let _ = writeln!(out, "NAME {}", net.name);
    let _ = writeln!(out, "UNITS SI");
    let report = match (net.units.length, net.units.flow) {
        (LengthUnit::Foot, _) => "CFS",
        (LengthUnit::Meter, FlowUnit::CubicMetersPerHour) => "CMH",
        (LengthUnit::Meter, _) => "SI",
    };
    let _ = writeln!(out, "REPORT_UNITS {report}");
    let duplicate = net
        .pipes
        .iter()
        .any(|p| p.decision_index.is_some() && p.existing_diameter.is_some());
    let _ = writeln!(out, "MODE {}", if duplicate { "DUPLICATE" } else { "DIRECT" });
    let mut decisions: Vec<(usize, &str)> = net
        .pipes
        .iter()
        .filter_map(|p| p.decision_index.map(|k| (k, p.id.as_str())))
        .collect();
    decisions.sort_unstable();
    let ids: Vec<&str> = decisions.iter().map(|&(_, id)| id).collect();
    let _ = writeln!(out, "DECISION {}", ids.join(" "));
    let sizes: Vec<String> = net.table.sizes().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "SIZES {}", sizes.join(" "));
    match net.table.cost_model() {
        CostModel::PerSize(costs) => {
            let cs: Vec<String> = costs.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "UNIT_COSTS {}", cs.join(" "));
        }
        CostModel::PowerLaw { coefficient, exponent } => {
            let _ = writeln!(out, "COST_POWER {coefficient} {exponent}");
        }
    }
    for n in &net.nodes {
        if let NodeKind::Junction { min_head, .. } = n.kind {
            if min_head.is_finite() {
                let _ = writeln!(out, "MIN_HEAD {} {}", n.id, min_head);
            }
        }
    }
    let d = &net.defaults;
    let _ = writeln!(out, "PF {}", d.pressure_factor);
    let _ = writeln!(out, "PD {}", d.diameter_factor);
    if d.nytp_special {
        let _ = writeln!(out, "NYTP_PENALTY TRUE");
    }
    if let Some(t) = d.target_cost {
        let _ = writeln!(out, "TARGET_COST {t}");
    }
    if let Some(p) = d.phi {
        let _ = writeln!(out, "PHI {p}");
    }
    out
}

/// Reads a design file: one diameter per line in the network's native
/// diameter unit; blank lines and `;` comments ignored.
pub fn parse_design(
    text: &str,
    unit: DiameterUnit,
) -> Result<Vec<f64>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let Some(f) = fields(raw) else { continue };
        if f.len() != 1 {
            return Err(err(i + 1, ParseErrorKind::FieldCount { expected: 1, found: f.len() }));
        }
        out.push(unit.to_si(parse_f64(f[0], i + 1)?));
    }
    Ok(out)
}

pub fn serialize_design(diameters: &[f64], unit: DiameterUnit) -> String {
    let mut out = String::new();
    for &d in diameters {
        let _ = writeln!(out, "{}", unit.from_si(d));
    }
    out
}
