//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use lgsynth_core::lg::{build_graph, ElementKind, LinearGraph, OutputSpec, VariableKind};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub const PISTON_AREA: f64 = PI * 0.05 * 0.05;

/// Hydraulic ram pushing a mass against a spring and damper.
///
/// Elements: pressure source, line resistance, gyrator pair (1/A_p), damper
/// (1/b), spring (1/K), mass. Output: mass velocity.
pub fn hydraulic_graph() -> LinearGraph {
    let gy = 1.0 / PISTON_AREA;
    build_graph(
        &[2, 2, 3, 4, 4, 4, 4],
        &[1, 3, 1, 1, 1, 1, 1],
        &[1, 5, 4, 4, 5, 6, 2],
        &[4, 4, 4, 2, 2, 2, 2],
        &[1e5, 100.0, gy, gy, 1.0 / 50.0, 1.0 / 150.0, 100.0],
        &["P_s", "R", "GY", "GY", "b", "K", "m"].map(String::from),
        &[OutputSpec {
            element: 7,
            variable: VariableKind::Across,
        }],
    )
    .unwrap()
}

/// Hand-substituted hydraulic matrices: `a11 = -(R A_p^2 + b)/m`,
/// `a12 = -1/m`, `a21 = K`, `b1 = -A_p/m`.
pub fn hydraulic_expected() -> ([[f64; 2]; 2], [f64; 2]) {
    let (r, b, k, m) = (100.0, 50.0, 150.0, 100.0);
    let ap = PISTON_AREA;
    ([[-(r * ap * ap + b) / m, -1.0 / m], [k, 0.0]], [-ap / m, 0.0])
}

/// Admittance of a passive electrical element at angular frequency `w`.
fn admittance(kind: ElementKind, value: f64, w: f64) -> Complex64 {
    let jw = Complex64::new(0.0, w);
    match kind {
        ElementKind::DType => Complex64::new(1.0 / value, 0.0),
        ElementKind::AType => jw * value,
        ElementKind::TType => 1.0 / (jw * value),
        other => panic!("no admittance for {other:?}"),
    }
}

/// Across variable of `out` per volt of the single voltage source, by
/// modified nodal analysis at `w` rad/s.
pub fn nodal_gain(g: &LinearGraph, w: f64, out: usize) -> Complex64 {
    nodal_solution(g, w, out).0
}

/// As [`nodal_gain`], also returning the larger magnitude of the two node
/// potentials that were subtracted, which bounds the oracle's own rounding.
pub fn nodal_solution(g: &LinearGraph, w: f64, out: usize) -> (Complex64, f64) {
    let n = g.node_count();
    let size = (n - 1) + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut y = DMatrix::from_element(size, size, zero);
    let mut rhs = DMatrix::from_element(size, 1, zero);
    let idx = |node: usize| if node == 1 { None } else { Some(node - 2) };
    let mut sources = 0;
    for e in g.elements() {
        let (a, b) = (idx(e.source_node), idx(e.target_node));
        if e.kind == ElementKind::ASource {
            sources += 1;
            let row = n - 1;
            if let Some(a) = a {
                y[(a, row)] += 1.0;
                y[(row, a)] += 1.0;
            }
            if let Some(b) = b {
                y[(b, row)] -= 1.0;
                y[(row, b)] -= 1.0;
            }
            rhs[(row, 0)] = Complex64::new(1.0, 0.0);
            continue;
        }
        let adm = admittance(e.kind, e.param_value, w);
        if let Some(a) = a {
            y[(a, a)] += adm;
        }
        if let Some(b) = b {
            y[(b, b)] += adm;
        }
        if let (Some(a), Some(b)) = (a, b) {
            y[(a, b)] -= adm;
            y[(b, a)] -= adm;
        }
    }
    assert_eq!(sources, 1, "oracle handles exactly one voltage source");
    let v = y.full_piv_lu().solve(&rhs).expect("nodal system singular");
    let pot = |node: usize| idx(node).map_or(zero, |i| v[(i, 0)]);
    let e = g.element(out).unwrap();
    let (a, b) = (pot(e.source_node), pot(e.target_node));
    (a - b, a.norm().max(b.norm()))
}

fn priority(kind: ElementKind) -> u8 {
    match kind {
        ElementKind::ASource => 0,
        ElementKind::AType => 1,
        ElementKind::DType => 2,
        ElementKind::Transformer | ElementKind::Gyrator => 3,
        ElementKind::TType => 4,
        ElementKind::TSource => 5,
    }
}

fn is_spanning_tree(g: &LinearGraph, ids: &[usize]) -> bool {
    let mut parent: Vec<usize> = (0..=g.node_count()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for &id in ids {
        let e = g.element(id).unwrap();
        let (a, b) = (root(&mut parent, e.source_node), root(&mut parent, e.target_node));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    ids.len() + 1 == g.node_count()
}

fn combinations(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..=m {
        if m - i + 1 < k - cur.len() {
            break;
        }
        cur.push(i);
        combinations(m, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Enumerates every spanning tree that holds all across sources and no
/// through source, and returns the one whose sorted `(priority, id)` keys
/// are lexicographically smallest. `None` when no such tree exists.
pub fn brute_force_normal_tree(g: &LinearGraph) -> Option<BTreeSet<usize>> {
    let m = g.elements().len();
    let k = g.node_count() - 1;
    type Candidate = (Vec<(u8, usize)>, Vec<usize>);
    let mut best: Option<Candidate> = None;
    let mut cur = Vec::new();
    combinations(m, k, 1, &mut cur, &mut |ids| {
        let chosen: BTreeSet<usize> = ids.iter().copied().collect();
        let ok_sources = g.elements().iter().all(|e| match e.kind {
            ElementKind::ASource => chosen.contains(&e.id),
            ElementKind::TSource => !chosen.contains(&e.id),
            _ => true,
        });
        if !ok_sources || !is_spanning_tree(g, ids) {
            return;
        }
        let mut key: Vec<(u8, usize)> = ids.iter().map(|&i| (priority(g.element(i).unwrap().kind), i)).collect();
        key.sort();
        if best.as_ref().is_none_or(|(b, _)| key < *b) {
            best = Some((key, ids.to_vec()));
        }
    });
    best.map(|(_, ids)| ids.into_iter().collect())
}

/// Random connected graph with one across source (element 1, node 2 to
/// ground) and `extra` passive elements on top of a random spanning chain.
/// The output is the across variable of the last element.
pub fn random_passive_graph<R: Rng>(rng: &mut R, nodes: usize, extra: usize) -> LinearGraph {
    let kinds = [2i64, 5, 6];
    let (mut s, mut t, mut ty) = (vec![2usize], vec![1usize], vec![1i64]);
    for node in 3..=nodes {
        s.push(node);
        t.push(rng.random_range(1..node));
        ty.push(kinds[rng.random_range(0..3)]);
    }
    for _ in 0..extra {
        let a = rng.random_range(1..=nodes);
        let mut b = rng.random_range(1..=nodes);
        while b == a {
            b = rng.random_range(1..=nodes);
        }
        s.push(a);
        t.push(b);
        ty.push(kinds[rng.random_range(0..3)]);
    }
    let count = s.len();
    let params: Vec<f64> = (0..count)
        .map(|i| {
            if i == 0 {
                1.0
            } else {
                10f64.powf(rng.random_range(-3.0..3.0))
            }
        })
        .collect();
    let labels: Vec<String> = (1..=count).map(|i| format!("e{i}")).collect();
    let out = OutputSpec {
        element: count,
        variable: VariableKind::Across,
    };
    build_graph(&s, &t, &ty, &vec![1; count], &params, &labels, &[out]).unwrap()
}
