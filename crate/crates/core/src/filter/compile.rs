use std::collections::{BTreeMap, BTreeSet};

use super::spec::EmbryoSpec;
use crate::gp::{GpNode, GpTree, TerminalKind};
use crate::lg::{Element, ElementKind, EnergyDomain, LinearGraph, OutputSpec, VariableKind, GROUND};

/// Node where construction starts: the far side of the source resistance.
pub const START_NODE: usize = 3;

#[derive(Debug, Clone)]
struct Proto {
    kind: ElementKind,
    from: usize,
    to: usize,
    value: f64,
    label: String,
    tree_node: Option<usize>,
}

/// Circuit under construction: the embryo plus whatever the tree has added
/// so far, with original (pre-merge) node numbers.
#[derive(Debug, Clone)]
pub struct PartialCircuit {
    espec: EmbryoSpec,
    elements: Vec<Proto>,
    grounded: BTreeSet<usize>,
    next_node: usize,
    cursor: usize,
    counts: [usize; 3],
}

/// Embryo: `V_S` from node 2 to ground, `R_S` from 2 to 3, cursor at 3.
/// The load resistance is attached when compilation finishes.
pub fn build_embryo(espec: &EmbryoSpec) -> PartialCircuit {
    let proto = |kind, from, to, value, label: &str| Proto {
        kind,
        from,
        to,
        value,
        label: label.into(),
        tree_node: None,
    };
    PartialCircuit {
        espec: *espec,
        elements: vec![
            proto(ElementKind::ASource, 2, GROUND, espec.source_voltage, "V_S"),
            proto(ElementKind::DType, 2, START_NODE, espec.source_resistance, "R_S"),
        ],
        grounded: BTreeSet::new(),
        next_node: START_NODE + 1,
        cursor: START_NODE,
        counts: [0; 3],
    }
}

impl PartialCircuit {
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn node_count(&self) -> usize {
        self.next_node - 1 - self.grounded.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Current elements as an unchecked graph, nodes renumbered densely.
    pub fn graph(&self) -> LinearGraph {
        let (map, count) = self.renumbering();
        LinearGraph::from_parts(count, self.to_elements(&map), Vec::new())
    }

    fn add_terminal(&mut self, kind: TerminalKind, value: f64, at: usize, tree_node: usize) -> usize {
        let (ek, prefix, slot) = match kind {
            TerminalKind::AddA => (ElementKind::AType, "C", 0),
            TerminalKind::AddD => (ElementKind::DType, "R", 1),
            TerminalKind::AddT => (ElementKind::TType, "L", 2),
        };
        self.counts[slot] += 1;
        let to = self.next_node;
        self.next_node += 1;
        self.elements.push(Proto {
            kind: ek,
            from: at,
            to,
            value,
            label: format!("{prefix}{}", self.counts[slot]),
            tree_node: Some(tree_node),
        });
        to
    }

    /// Runs `node` with the cursor at `at` and returns the new cursor.
    /// `next_id` tracks the pre-order index of `node`.
    fn run(&mut self, node: &GpNode, at: usize, next_id: &mut usize) -> usize {
        let id = *next_id;
        *next_id += 1;
        match node {
            GpNode::Terminal { kind, value } => self.add_terminal(*kind, *value, at, id),
            GpNode::Function { op, children } => match op {
                crate::gp::Function::Series => {
                    let mid = self.run(&children[0], at, next_id);
                    self.run(&children[1], mid, next_id)
                }
                crate::gp::Function::Split => {
                    let end = self.run(&children[0], at, next_id);
                    self.grounded.insert(end);
                    self.run(&children[1], at, next_id)
                }
            },
        }
    }

    /// Maps original node numbers to dense ones; grounded nodes map to 1.
    fn renumbering(&self) -> (BTreeMap<usize, usize>, usize) {
        let mut map = BTreeMap::new();
        map.insert(GROUND, GROUND);
        let mut next = GROUND + 1;
        for n in 2..self.next_node {
            if self.grounded.contains(&n) {
                map.insert(n, GROUND);
            } else {
                map.insert(n, next);
                next += 1;
            }
        }
        (map, next - 1)
    }

    fn to_elements(&self, map: &BTreeMap<usize, usize>) -> Vec<Element> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, p)| Element {
                id: i + 1,
                kind: p.kind,
                domain: EnergyDomain::Electrical,
                source_node: map[&p.from],
                target_node: map[&p.to],
                param_value: p.value,
                param_label: p.label.clone(),
            })
            .collect()
    }

    /// Grounds the final cursor, attaches the load at the highest surviving
    /// node and renumbers.
    fn finish(mut self, end: Option<usize>) -> CompiledCircuit {
        if let Some(end) = end {
            self.grounded.insert(end);
        }
        let load_original = (2..self.next_node)
            .rev()
            .find(|n| !self.grounded.contains(n))
            .unwrap_or(START_NODE)
            .max(START_NODE);
        self.elements.push(Proto {
            kind: ElementKind::DType,
            from: load_original,
            to: GROUND,
            value: self.espec.load_resistance,
            label: "R_L".into(),
            tree_node: None,
        });
        let (map, node_count) = self.renumbering();
        let elements = self.to_elements(&map);
        let load_element = elements.len();
        let provenance = self.elements.iter().map(|p| p.tree_node).collect();
        let graph = LinearGraph::from_parts(
            node_count,
            elements,
            vec![OutputSpec {
                element: load_element,
                variable: VariableKind::Across,
            }],
        );
        CompiledCircuit {
            graph,
            load_node: map[&load_original],
            provenance,
        }
    }
}

/// A finished filter candidate.
///
/// Elements are ordered `V_S`, `R_S`, evolved elements in creation order,
/// then `R_L`. The single output is the load voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    pub graph: LinearGraph,
    pub load_node: usize,
    provenance: Vec<Option<usize>>,
}

impl CompiledCircuit {
    /// Pre-order index of the terminal that created element `id`, or `None`
    /// for embryo elements.
    pub fn tree_node(&self, element_id: usize) -> Option<usize> {
        element_id
            .checked_sub(1)
            .and_then(|i| self.provenance.get(i).copied().flatten())
    }

    /// Evolved element id to tree node.
    pub fn element_provenance(&self) -> BTreeMap<usize, usize> {
        self.provenance
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (i + 1, t)))
            .collect()
    }

    pub fn evolved_element_count(&self) -> usize {
        self.provenance.iter().filter(|t| t.is_some()).count()
    }

    pub fn load_element_id(&self) -> usize {
        self.graph.elements().len()
    }

    pub fn netlist(&self) -> Vec<NetlistRecord> {
        self.graph
            .elements()
            .iter()
            .map(|e| NetlistRecord {
                element_id: e.id,
                label: e.param_label.clone(),
                kind: e.kind,
                node_a: e.source_node,
                node_b: e.target_node,
                value: e.param_value,
                unit: e.domain.param_unit(e.kind),
                tree_node: self.tree_node(e.id),
            })
            .collect()
    }
}

/// One netlist row.
#[derive(Debug, Clone, PartialEq)]
pub struct NetlistRecord {
    pub element_id: usize,
    pub label: String,
    pub kind: ElementKind,
    pub node_a: usize,
    pub node_b: usize,
    pub value: f64,
    pub unit: &'static str,
    pub tree_node: Option<usize>,
}

/// Builds the circuit described by `tree` inside the embryo. Every tree
/// compiles; whether the result is analysable is decided downstream.
pub fn compile_tree(tree: &GpTree, espec: &EmbryoSpec) -> CompiledCircuit {
    let mut pc = build_embryo(espec);
    let mut next_id = 0;
    let start = pc.cursor;
    let end = pc.run(tree.root(), start, &mut next_id);
    pc.finish(Some(end))
}

/// The embryo with only the load attached: a resistive divider.
pub fn compile_embryo(espec: &EmbryoSpec) -> CompiledCircuit {
    build_embryo(espec).finish(None)
}
