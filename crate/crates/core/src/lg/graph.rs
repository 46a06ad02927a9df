use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node index of the common reference (ground) node. Nodes are numbered from 1.
pub const GROUND: usize = 1;

/// Element type codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    ASource = 1,
    AType = 2,
    Transformer = 3,
    Gyrator = 4,
    DType = 5,
    TType = 6,
    TSource = 7,
}

impl ElementKind {
    pub const ALL: [ElementKind; 7] = [
        ElementKind::ASource,
        ElementKind::AType,
        ElementKind::Transformer,
        ElementKind::Gyrator,
        ElementKind::DType,
        ElementKind::TType,
        ElementKind::TSource,
    ];

    pub fn from_code(code: i64) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() as i64 == code)
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn is_source(self) -> bool {
        matches!(self, ElementKind::ASource | ElementKind::TSource)
    }

    pub fn is_two_port(self) -> bool {
        matches!(self, ElementKind::Transformer | ElementKind::Gyrator)
    }

    pub fn is_storage(self) -> bool {
        matches!(self, ElementKind::AType | ElementKind::TType)
    }

    /// Short name used in netlists and diagnostics.
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::ASource => "A-source",
            ElementKind::AType => "A-type",
            ElementKind::Transformer => "transformer",
            ElementKind::Gyrator => "gyrator",
            ElementKind::DType => "D-type",
            ElementKind::TType => "T-type",
            ElementKind::TSource => "T-source",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Energy domain codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnergyDomain {
    Electrical = 1,
    MechTranslational = 2,
    MechRotational = 3,
    Hydraulic = 4,
    Thermal = 5,
}

impl EnergyDomain {
    pub const ALL: [EnergyDomain; 5] = [
        EnergyDomain::Electrical,
        EnergyDomain::MechTranslational,
        EnergyDomain::MechRotational,
        EnergyDomain::Hydraulic,
        EnergyDomain::Thermal,
    ];

    pub fn from_code(code: i64) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.code() as i64 == code)
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Unit of the generalized parameter carried by an element of `kind` in
    /// this domain (C_i, L_i, R_i, ratio, or source amplitude).
    pub fn param_unit(self, kind: ElementKind) -> &'static str {
        use ElementKind::*;
        use EnergyDomain::*;
        match (self, kind) {
            (_, Transformer) | (_, Gyrator) => "ratio",
            (Electrical, ASource) => "V",
            (Electrical, TSource) => "A",
            (Electrical, AType) => "F",
            (Electrical, TType) => "H",
            (Electrical, DType) => "Ohm",
            (MechTranslational, ASource) => "m/s",
            (MechTranslational, TSource) => "N",
            (MechTranslational, AType) => "kg",
            (MechTranslational, TType) => "m/N",
            (MechTranslational, DType) => "m/(N*s)",
            (MechRotational, ASource) => "rad/s",
            (MechRotational, TSource) => "N*m",
            (MechRotational, AType) => "kg*m^2",
            (MechRotational, TType) => "rad/(N*m)",
            (MechRotational, DType) => "rad/(N*m*s)",
            (Hydraulic, ASource) => "Pa",
            (Hydraulic, TSource) => "m^3/s",
            (Hydraulic, AType) => "m^3/Pa",
            (Hydraulic, TType) => "Pa*s^2/m^3",
            (Hydraulic, DType) => "Pa*s/m^3",
            (Thermal, ASource) => "K",
            (Thermal, TSource) => "W",
            (Thermal, AType) => "J/K",
            (Thermal, TType) => "-",
            (Thermal, DType) => "K/W",
        }
    }
}

/// Which of an element's two power variables is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Across,
    Through,
}

impl VariableKind {
    pub fn prefix(self) -> &'static str {
        match self {
            VariableKind::Across => "v",
            VariableKind::Through => "f",
        }
    }
}

/// A requested model output: the across or through variable of one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// 1-based element id.
    pub element: usize,
    pub variable: VariableKind,
}

/// One directed branch of the graph.
///
/// The across variable is `P(source_node) - P(target_node)` and the through
/// variable flows through the element from `source_node` to `target_node`.
/// `param_value` holds the generalized constitutive parameter: `C` for
/// A-types (`f = C dv/dt`), `L` for T-types (`v = L df/dt`), `R` for D-types
/// (`v = R f`), the ratio for two-ports, and the amplitude for sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// 1-based position in the graph's element list.
    pub id: usize,
    pub kind: ElementKind,
    pub domain: EnergyDomain,
    pub source_node: usize,
    pub target_node: usize,
    pub param_value: f64,
    pub param_label: String,
}

/// A problem found by [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    SelfLoop { element: usize },
    NodeOutOfRange { element: usize, node: usize },
    Disconnected { node: usize },
    UnpairedTwoPort { element: usize },
    NonPositiveParam { element: usize },
    BadOutput { element: usize },
    NoElements,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::SelfLoop { element } => {
                write!(f, "SelfLoop: element {element} starts and ends on the same node")
            }
            Diagnostic::NodeOutOfRange { element, node } => {
                write!(f, "NodeOutOfRange: element {element} references node {node}")
            }
            Diagnostic::Disconnected { node } => {
                write!(f, "Disconnected: node {node} is not connected to ground")
            }
            Diagnostic::UnpairedTwoPort { element } => {
                write!(f, "UnpairedTwoPort: element {element} has no consecutive partner")
            }
            Diagnostic::NonPositiveParam { element } => {
                write!(
                    f,
                    "NonPositiveParam: element {element} needs a positive finite parameter"
                )
            }
            Diagnostic::BadOutput { element } => {
                write!(f, "BadOutput: output refers to unknown element {element}")
            }
            Diagnostic::NoElements => write!(f, "NoElements: graph has no elements"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("LengthMismatch: `{field}` has {found} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("InvalidCode: element {element} has {field} code {code}")]
    InvalidCode {
        element: usize,
        field: &'static str,
        code: i64,
    },
    #[error("UnpairedTwoPort: element {element} has no consecutive partner of the same kind")]
    UnpairedTwoPort { element: usize },
    #[error("Disconnected: node {node} is not connected to ground")]
    Disconnected { node: usize },
    #[error("SelfLoop: element {element} starts and ends on the same node")]
    SelfLoop { element: usize },
    #[error("InvalidNode: element {element} references node {node}; nodes are numbered from 1")]
    InvalidNode { element: usize, node: usize },
    #[error("NonPositiveParam: element {element} has parameter {value}")]
    NonPositiveParam { element: usize, value: f64 },
    #[error("BadOutput: output refers to unknown element {element}")]
    BadOutput { element: usize },
    #[error("Empty: graph has no elements")]
    Empty,
}

impl From<&Diagnostic> for GraphError {
    fn from(d: &Diagnostic) -> Self {
        match *d {
            Diagnostic::SelfLoop { element } => GraphError::SelfLoop { element },
            Diagnostic::NodeOutOfRange { element, node } => GraphError::InvalidNode { element, node },
            Diagnostic::Disconnected { node } => GraphError::Disconnected { node },
            Diagnostic::UnpairedTwoPort { element } => GraphError::UnpairedTwoPort { element },
            Diagnostic::NonPositiveParam { element } => GraphError::NonPositiveParam {
                element,
                value: f64::NAN,
            },
            Diagnostic::BadOutput { element } => GraphError::BadOutput { element },
            Diagnostic::NoElements => GraphError::Empty,
        }
    }
}

/// System topology: numbered nodes joined by typed, directed element branches.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGraph {
    node_count: usize,
    elements: Vec<Element>,
    outputs: Vec<OutputSpec>,
}

impl LinearGraph {
    /// Assembles a graph without checking any invariant. Use
    /// [`validate_graph`] or [`build_graph`] for checked construction.
    pub fn from_parts(node_count: usize, elements: Vec<Element>, outputs: Vec<OutputSpec>) -> Self {
        Self {
            node_count,
            elements,
            outputs,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn ground_node(&self) -> usize {
        GROUND
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Element by 1-based id.
    pub fn element(&self, id: usize) -> Option<&Element> {
        id.checked_sub(1).and_then(|i| self.elements.get(i))
    }

    pub fn outputs(&self) -> &[OutputSpec] {
        &self.outputs
    }

    /// Element ids of the sources in id order; this is the model input order.
    pub fn source_ids(&self) -> Vec<usize> {
        self.elements
            .iter()
            .filter(|e| e.kind.is_source())
            .map(|e| e.id)
            .collect()
    }

    /// Consecutive two-port pairs `(side1, side2)` as element ids, or the id
    /// of the first two-port element that lacks a partner.
    pub fn two_port_pairs(&self) -> Result<Vec<(usize, usize)>, usize> {
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < self.elements.len() {
            let e = &self.elements[i];
            if e.kind.is_two_port() {
                match self.elements.get(i + 1) {
                    Some(next) if next.kind == e.kind => {
                        pairs.push((e.id, next.id));
                        i += 2;
                        continue;
                    }
                    _ => return Err(e.id),
                }
            }
            i += 1;
        }
        Ok(pairs)
    }
}

/// Builds a graph from the source/target vector convention: element `i`
/// leaves node `sources[i]` and enters node `targets[i]`.
pub fn build_graph(
    sources: &[usize],
    targets: &[usize],
    type_codes: &[i64],
    domain_codes: &[i64],
    params: &[f64],
    labels: &[String],
    outputs: &[OutputSpec],
) -> Result<LinearGraph, GraphError> {
    let n = sources.len();
    let lengths = [
        ("T", targets.len()),
        ("Type", type_codes.len()),
        ("Domain", domain_codes.len()),
        ("params", params.len()),
        ("labels", labels.len()),
    ];
    for (field, found) in lengths {
        if found != n {
            return Err(GraphError::LengthMismatch {
                field,
                expected: n,
                found,
            });
        }
    }
    if n == 0 {
        return Err(GraphError::Empty);
    }

    let mut elements = Vec::with_capacity(n);
    for i in 0..n {
        let id = i + 1;
        let kind = ElementKind::from_code(type_codes[i]).ok_or(GraphError::InvalidCode {
            element: id,
            field: "type",
            code: type_codes[i],
        })?;
        let domain = EnergyDomain::from_code(domain_codes[i]).ok_or(GraphError::InvalidCode {
            element: id,
            field: "domain",
            code: domain_codes[i],
        })?;
        for node in [sources[i], targets[i]] {
            if node == 0 {
                return Err(GraphError::InvalidNode { element: id, node });
            }
        }
        elements.push(Element {
            id,
            kind,
            domain,
            source_node: sources[i],
            target_node: targets[i],
            param_value: params[i],
            param_label: labels[i].clone(),
        });
    }
    let node_count = sources.iter().chain(targets).copied().max().unwrap_or(GROUND);
    let graph = LinearGraph::from_parts(node_count.max(GROUND), elements, outputs.to_vec());

    let diagnostics = validate_graph(&graph);
    match diagnostics.first() {
        None => Ok(graph),
        Some(Diagnostic::NonPositiveParam { element }) => Err(GraphError::NonPositiveParam {
            element: *element,
            value: graph.element(*element).map_or(f64::NAN, |e| e.param_value),
        }),
        Some(d) => Err(d.into()),
    }
}

fn requires_positive_param(kind: ElementKind) -> bool {
    !kind.is_source()
}

/// Checks every graph invariant and returns one diagnostic per violation.
pub fn validate_graph(g: &LinearGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if g.elements.is_empty() {
        out.push(Diagnostic::NoElements);
    }
    let in_range = |node: usize| (1..=g.node_count).contains(&node);

    for e in &g.elements {
        for node in [e.source_node, e.target_node] {
            if !in_range(node) {
                out.push(Diagnostic::NodeOutOfRange { element: e.id, node });
            }
        }
        if e.source_node == e.target_node {
            out.push(Diagnostic::SelfLoop { element: e.id });
        }
        let ok = e.param_value.is_finite() && (!requires_positive_param(e.kind) || e.param_value > 0.0);
        if !ok {
            out.push(Diagnostic::NonPositiveParam { element: e.id });
        }
    }
    if let Err(element) = g.two_port_pairs() {
        out.push(Diagnostic::UnpairedTwoPort { element });
    }
    for o in &g.outputs {
        if g.element(o.element).is_none() {
            out.push(Diagnostic::BadOutput { element: o.element });
        }
    }

    // Reachability from ground over the undirected multigraph.
    let mut adjacency = vec![Vec::new(); g.node_count + 1];
    for e in &g.elements {
        if in_range(e.source_node) && in_range(e.target_node) {
            adjacency[e.source_node].push(e.target_node);
            adjacency[e.target_node].push(e.source_node);
        }
    }
    let mut seen = vec![false; g.node_count + 1];
    if in_range(GROUND) {
        let mut queue = VecDeque::from([GROUND]);
        seen[GROUND] = true;
        while let Some(n) = queue.pop_front() {
            for &m in &adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
    }
    for (node, reached) in seen.iter().enumerate().skip(1) {
        if !reached {
            out.push(Diagnostic::Disconnected { node });
        }
    }
    out
}
