use std::collections::VecDeque;

use nalgebra::DMatrix;
use thiserror::Error;

use super::graph::{validate_graph, Diagnostic, ElementKind, LinearGraph, VariableKind, GROUND};
use super::tree::{select_normal_tree, TreeError, TreePartition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateSpaceError {
    #[error("InvalidGraph: {0}")]
    InvalidGraph(Diagnostic),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("InvalidPartition: {0}")]
    InvalidPartition(String),
    #[error("DependentStorage: {kind} element {element} is algebraically dependent on other storage or sources")]
    DependentStorage { element: usize, kind: ElementKind },
    #[error("SingularReduction: the {equations} algebraic equations cannot be solved for the non-state variables")]
    SingularReduction { equations: usize },
}

/// A power variable of one element (1-based element id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    pub element: usize,
    pub kind: VariableKind,
}

impl Var {
    pub fn across(element: usize) -> Self {
        Self {
            element,
            kind: VariableKind::Across,
        }
    }

    pub fn through(element: usize) -> Self {
        Self {
            element,
            kind: VariableKind::Through,
        }
    }
}

/// One constitutive relation, written over element variables.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementalEquation {
    /// `var = u[input]`.
    Source { var: Var, input: usize },
    /// `d(state)/dt = gain * driver`.
    Storage { state: Var, driver: Var, gain: f64 },
    /// `sum(coeff * var) = 0`.
    Algebraic { terms: Vec<(Var, f64)> },
}

/// Numeric state-space model `x' = Ax + Bu`, `y = Cx + Du + F u'`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub state_labels: Vec<String>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
}

impl StateSpaceModel {
    pub fn state_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_count(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_count(&self) -> usize {
        self.c.nrows()
    }
}

/// Constitutive equations of every element, in element order. Two-port
/// pairs contribute both of their equations at the first side. Assumes the
/// two-port pairing is valid; unpaired two-ports are skipped.
pub fn elemental_equations(g: &LinearGraph) -> Vec<ElementalEquation> {
    let pairs = g.two_port_pairs().unwrap_or_default();
    let mut input = 0;
    let mut out = Vec::with_capacity(g.elements().len());
    for e in g.elements() {
        let (v, f) = (Var::across(e.id), Var::through(e.id));
        let p = e.param_value;
        match e.kind {
            ElementKind::ASource | ElementKind::TSource => {
                let var = if e.kind == ElementKind::ASource { v } else { f };
                out.push(ElementalEquation::Source { var, input });
                input += 1;
            }
            ElementKind::AType => out.push(ElementalEquation::Storage {
                state: v,
                driver: f,
                gain: 1.0 / p,
            }),
            ElementKind::TType => out.push(ElementalEquation::Storage {
                state: f,
                driver: v,
                gain: 1.0 / p,
            }),
            ElementKind::DType => out.push(ElementalEquation::Algebraic {
                terms: vec![(v, 1.0), (f, -p)],
            }),
            ElementKind::Transformer | ElementKind::Gyrator => {
                let Some(&(_, side2)) = pairs.iter().find(|(s1, _)| *s1 == e.id) else {
                    continue;
                };
                let (v2, f2) = (Var::across(side2), Var::through(side2));
                if e.kind == ElementKind::Transformer {
                    // v1 = TF v2, f1 = -(1/TF) f2
                    out.push(ElementalEquation::Algebraic {
                        terms: vec![(v, 1.0), (v2, -p)],
                    });
                    out.push(ElementalEquation::Algebraic {
                        terms: vec![(f, 1.0), (f2, 1.0 / p)],
                    });
                } else {
                    // v1 = GY f2, f1 = -(1/GY) v2
                    out.push(ElementalEquation::Algebraic {
                        terms: vec![(v, 1.0), (f2, -p)],
                    });
                    out.push(ElementalEquation::Algebraic {
                        terms: vec![(f, 1.0), (v2, 1.0 / p)],
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum Role {
    State(usize),
    Input(usize),
    Unknown(usize),
}

/// Selects the normal tree and derives the model in one step.
pub fn derive(g: &LinearGraph) -> Result<StateSpaceModel, StateSpaceError> {
    if let Some(d) = validate_graph(g).into_iter().next() {
        return Err(StateSpaceError::InvalidGraph(d));
    }
    let tp = select_normal_tree(g)?;
    derive_state_space(g, &tp)
}

/// Derives the numeric state-space model for `g` under partition `tp`.
///
/// Primary variables are the across variables of tree branches and the
/// through variables of links, one per element. Link across variables follow
/// from the fundamental loops (compatibility) and branch through variables
/// from the fundamental cutsets (continuity). States are the across variables
/// of A-type branches followed by the through variables of T-type links, in
/// element order; inputs are the sources in element order. The remaining
/// primaries are eliminated through the algebraic constitutive equations.
///
/// `F` is always zero: with storage elements placed as required, no
/// algebraic equation involves an input derivative.
pub fn derive_state_space(g: &LinearGraph, tp: &TreePartition) -> Result<StateSpaceModel, StateSpaceError> {
    if let Some(d) = validate_graph(g).into_iter().next() {
        return Err(StateSpaceError::InvalidGraph(d));
    }
    let elements = g.elements();
    let ne = elements.len();
    let is_branch: Vec<bool> = elements.iter().map(|e| tp.is_branch(e.id)).collect();
    check_partition(g, tp)?;

    for e in elements {
        let branch = is_branch[e.id - 1];
        match e.kind {
            ElementKind::AType if !branch => {
                return Err(StateSpaceError::DependentStorage {
                    element: e.id,
                    kind: e.kind,
                })
            }
            ElementKind::TType if branch => {
                return Err(StateSpaceError::DependentStorage {
                    element: e.id,
                    kind: e.kind,
                })
            }
            ElementKind::ASource if !branch => {
                return Err(StateSpaceError::InvalidPartition(format!(
                    "A-source {} is a link",
                    e.id
                )))
            }
            ElementKind::TSource if branch => {
                return Err(StateSpaceError::InvalidPartition(format!(
                    "T-source {} is a branch",
                    e.id
                )))
            }
            _ => {}
        }
    }

    // Node potentials as combinations of branch across variables.
    let node_count = g.node_count();
    let mut tree_adj: Vec<Vec<usize>> = vec![Vec::new(); node_count + 1];
    for e in elements.iter().filter(|e| is_branch[e.id - 1]) {
        tree_adj[e.source_node].push(e.id - 1);
        tree_adj[e.target_node].push(e.id - 1);
    }
    let mut potential: Vec<Option<Vec<f64>>> = vec![None; node_count + 1];
    potential[GROUND] = Some(vec![0.0; ne]);
    let mut queue = VecDeque::from([GROUND]);
    while let Some(x) = queue.pop_front() {
        for &bi in &tree_adj[x] {
            let b = &elements[bi];
            let y = if b.source_node == x {
                b.target_node
            } else {
                b.source_node
            };
            if potential[y].is_some() {
                continue;
            }
            let mut py = potential[x].clone().expect("visited node has a potential");
            // v_b = P(source) - P(target)
            py[bi] += if b.source_node == y { 1.0 } else { -1.0 };
            potential[y] = Some(py);
            queue.push_back(y);
        }
    }
    if potential.iter().skip(1).any(Option::is_none) {
        return Err(StateSpaceError::InvalidPartition(
            "branches do not span the graph".into(),
        ));
    }
    let pot = |n: usize| potential[n].as_ref().expect("spanning tree reaches every node");

    // Fundamental loop rows: v_link = sum_b loop[link][b] * v_b.
    let loop_rows: Vec<Option<Vec<f64>>> = elements
        .iter()
        .map(|e| {
            (!is_branch[e.id - 1]).then(|| {
                let (ps, pt) = (pot(e.source_node), pot(e.target_node));
                ps.iter().zip(pt).map(|(a, b)| a - b).collect()
            })
        })
        .collect();

    let expr = |var: Var| -> Vec<f64> {
        let i = var.element - 1;
        let mut row = vec![0.0; ne];
        match (var.kind, is_branch[i]) {
            (VariableKind::Across, true) | (VariableKind::Through, false) => row[i] = 1.0,
            (VariableKind::Across, false) => row.copy_from_slice(loop_rows[i].as_ref().expect("link has a loop")),
            (VariableKind::Through, true) => {
                // Tellegen: f_branches = -B^T f_links
                for (l, lr) in loop_rows.iter().enumerate() {
                    if let Some(lr) = lr {
                        row[l] = -lr[i];
                    }
                }
            }
        }
        row
    };

    // Classify primaries.
    let mut roles = vec![Role::Unknown(0); ne];
    let mut state_elems = Vec::new();
    for kind in [ElementKind::AType, ElementKind::TType] {
        state_elems.extend(elements.iter().filter(|e| e.kind == kind).map(|e| e.id - 1));
    }
    for (k, &i) in state_elems.iter().enumerate() {
        roles[i] = Role::State(k);
    }
    let source_elems: Vec<usize> = elements
        .iter()
        .filter(|e| e.kind.is_source())
        .map(|e| e.id - 1)
        .collect();
    for (j, &i) in source_elems.iter().enumerate() {
        roles[i] = Role::Input(j);
    }
    let mut n_unknown = 0;
    for (i, e) in elements.iter().enumerate() {
        if !(e.kind.is_source() || e.kind.is_storage()) {
            roles[i] = Role::Unknown(n_unknown);
            n_unknown += 1;
        }
    }
    let n = state_elems.len();
    let m = source_elems.len();
    let nz = n + m;

    let equations = elemental_equations(g);
    let algebraic: Vec<Vec<f64>> = equations
        .iter()
        .filter_map(|eq| match eq {
            ElementalEquation::Algebraic { terms } => {
                let mut row = vec![0.0; ne];
                for &(var, c) in terms {
                    for (r, x) in row.iter_mut().zip(expr(var)) {
                        *r += c * x;
                    }
                }
                Some(row)
            }
            _ => None,
        })
        .collect();
    if algebraic.len() != n_unknown {
        return Err(StateSpaceError::SingularReduction {
            equations: algebraic.len(),
        });
    }

    // M w + R z = 0, z = [x; u]  =>  w = W z with W = -M^{-1} R.
    let k = n_unknown;
    let mut mw = DMatrix::<f64>::zeros(k, k);
    let mut rz = DMatrix::<f64>::zeros(k, nz);
    for (r, row) in algebraic.iter().enumerate() {
        for (i, &c) in row.iter().enumerate() {
            match roles[i] {
                Role::Unknown(w) => mw[(r, w)] += c,
                Role::State(s) => rz[(r, s)] += c,
                Role::Input(j) => rz[(r, n + j)] += c,
            }
        }
        let scale = mw.row(r).amax();
        if scale == 0.0 || !scale.is_finite() {
            return Err(StateSpaceError::SingularReduction { equations: k });
        }
        mw.row_mut(r).scale_mut(1.0 / scale);
        rz.row_mut(r).scale_mut(1.0 / scale);
    }
    let w = if k == 0 {
        DMatrix::<f64>::zeros(0, nz)
    } else {
        let lu = mw.full_piv_lu();
        let pivots = lu.u().diagonal().map(f64::abs);
        let (lo, hi) = (pivots.min(), pivots.max());
        if lo.is_nan() || lo <= PIVOT_TOLERANCE * hi {
            return Err(StateSpaceError::SingularReduction { equations: k });
        }
        let sol = lu
            .solve(&rz)
            .ok_or(StateSpaceError::SingularReduction { equations: k })?;
        -sol
    };

    // Express a primary-variable row over z = [x; u].
    let reduce = |row: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; nz];
        for (i, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            match roles[i] {
                Role::State(s) => out[s] += c,
                Role::Input(j) => out[n + j] += c,
                Role::Unknown(u) => {
                    for (o, wv) in out.iter_mut().zip(w.row(u).iter()) {
                        *o += c * wv;
                    }
                }
            }
        }
        out
    };

    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, m);
    let mut state_labels = Vec::with_capacity(n);
    for (s, &i) in state_elems.iter().enumerate() {
        let eq = equations
            .iter()
            .find_map(|eq| match eq {
                ElementalEquation::Storage { state, driver, gain } if state.element == i + 1 => Some((*driver, *gain)),
                _ => None,
            })
            .expect("every storage element has a storage equation");
        let row = reduce(&expr(eq.0));
        for (col, v) in row.into_iter().enumerate() {
            if col < n {
                a[(s, col)] = eq.1 * v;
            } else {
                b[(s, col - n)] = eq.1 * v;
            }
        }
        let e = &elements[i];
        let kind = if e.kind == ElementKind::AType {
            VariableKind::Across
        } else {
            VariableKind::Through
        };
        state_labels.push(format!("{}_{}", kind.prefix(), e.param_label));
    }

    let p = g.outputs().len();
    let mut c = DMatrix::<f64>::zeros(p, n);
    let mut d = DMatrix::<f64>::zeros(p, m);
    let mut output_labels = Vec::with_capacity(p);
    for (o, spec) in g.outputs().iter().enumerate() {
        let row = reduce(&expr(Var {
            element: spec.element,
            kind: spec.variable,
        }));
        for (col, v) in row.into_iter().enumerate() {
            if col < n {
                c[(o, col)] = v;
            } else {
                d[(o, col - n)] = v;
            }
        }
        let e = &elements[spec.element - 1];
        output_labels.push(format!("{}_{}", spec.variable.prefix(), e.param_label));
    }

    Ok(StateSpaceModel {
        a,
        b,
        c,
        d,
        f: DMatrix::zeros(p, m),
        state_labels,
        input_labels: source_elems.iter().map(|&i| elements[i].param_label.clone()).collect(),
        output_labels,
    })
}

/// Relative pivot size below which the algebraic subsystem counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

fn check_partition(g: &LinearGraph, tp: &TreePartition) -> Result<(), StateSpaceError> {
    let ne = g.elements().len();
    let expected = g.node_count().saturating_sub(1);
    if tp.branch_ids.len() != expected {
        return Err(StateSpaceError::InvalidPartition(format!(
            "{} branches for {} nodes",
            tp.branch_ids.len(),
            g.node_count()
        )));
    }
    if tp.branch_ids.len() + tp.link_ids.len() != ne
        || tp.branch_ids.intersection(&tp.link_ids).next().is_some()
        || tp.branch_ids.iter().chain(&tp.link_ids).any(|&id| id == 0 || id > ne)
    {
        return Err(StateSpaceError::InvalidPartition(
            "branches and links must split the element set".into(),
        ));
    }
    Ok(())
}
