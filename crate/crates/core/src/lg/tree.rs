use std::collections::BTreeSet;

use thiserror::Error;

use super::graph::{ElementKind, LinearGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("SourceLoop: A-source element {element} closes a loop of across-sources")]
    SourceLoop { element: usize },
    #[error("SourceCutset: T-source element {element} is forced into the tree by a cutset of through-sources")]
    SourceCutset { element: usize },
    #[error("Disconnected: graph does not span all {node_count} nodes")]
    Disconnected { node_count: usize },
}

/// Split of the element set into normal-tree branches and co-tree links,
/// both as 1-based element ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePartition {
    pub branch_ids: BTreeSet<usize>,
    pub link_ids: BTreeSet<usize>,
}

impl TreePartition {
    pub fn is_branch(&self, id: usize) -> bool {
        self.branch_ids.contains(&id)
    }
}

/// Tree priority class; lower is preferred. `None` for elements that must be links.
pub fn tree_priority(kind: ElementKind) -> Option<u8> {
    match kind {
        ElementKind::ASource => Some(0),
        ElementKind::AType => Some(1),
        ElementKind::DType => Some(2),
        ElementKind::Transformer | ElementKind::Gyrator => Some(3),
        ElementKind::TType => Some(4),
        ElementKind::TSource => None,
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Greedy (Kruskal-style) normal tree: elements are offered in priority order
/// A-source, A-type, D-type, two-port, T-type, ties broken by lower id.
/// T-sources are always links. The graph must be valid and connected.
pub fn select_normal_tree(g: &LinearGraph) -> Result<TreePartition, TreeError> {
    let mut order: Vec<(u8, usize)> = g
        .elements()
        .iter()
        .filter_map(|e| tree_priority(e.kind).map(|p| (p, e.id)))
        .collect();
    order.sort_unstable();

    let mut uf = UnionFind::new(g.node_count() + 1);
    let mut branch_ids = BTreeSet::new();
    let mut link_ids = BTreeSet::new();
    for (_, id) in order {
        let e = &g.elements()[id - 1];
        if uf.union(e.source_node, e.target_node) {
            branch_ids.insert(id);
        } else {
            if e.kind == ElementKind::ASource {
                return Err(TreeError::SourceLoop { element: id });
            }
            link_ids.insert(id);
        }
    }

    let needed = g.node_count().saturating_sub(1);
    if branch_ids.len() < needed {
        // Only T-sources can still join components.
        for e in g.elements().iter().filter(|e| e.kind == ElementKind::TSource) {
            if uf.find(e.source_node) != uf.find(e.target_node) {
                return Err(TreeError::SourceCutset { element: e.id });
            }
        }
        return Err(TreeError::Disconnected {
            node_count: g.node_count(),
        });
    }
    for e in g.elements().iter().filter(|e| e.kind == ElementKind::TSource) {
        link_ids.insert(e.id);
    }
    Ok(TreePartition { branch_ids, link_ids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lg::graph::build_graph;

    fn graph(s: &[usize], t: &[usize], types: &[i64]) -> LinearGraph {
        let n = s.len();
        let labels: Vec<String> = (0..n).map(|i| format!("e{}", i + 1)).collect();
        build_graph(s, t, types, &vec![1; n], &vec![1.0; n], &labels, &[]).unwrap()
    }

    #[test]
    fn two_sources_in_a_loop() {
        let g = graph(&[2, 2], &[1, 1], &[1, 1]);
        assert_eq!(select_normal_tree(&g), Err(TreeError::SourceLoop { element: 2 }));
    }

    #[test]
    fn through_sources_in_a_cutset() {
        // Node 3 is reached only through the T-source.
        let g = graph(&[2, 2, 3], &[1, 3, 1], &[1, 7, 7]);
        assert!(matches!(select_normal_tree(&g), Err(TreeError::SourceCutset { .. })));
    }

    #[test]
    fn path_graph_is_all_branches() {
        let g = graph(&[2, 2], &[1, 3], &[1, 5]);
        let tp = select_normal_tree(&g).unwrap();
        assert_eq!(tp.branch_ids, BTreeSet::from([1, 2]));
        assert!(tp.link_ids.is_empty());

        let g = graph(&[2, 2], &[1, 1], &[1, 5]);
        let tp = select_normal_tree(&g).unwrap();
        assert_eq!(tp.branch_ids, BTreeSet::from([1]));
        assert_eq!(tp.link_ids, BTreeSet::from([2]));
    }

    #[test]
    fn lower_id_wins_ties() {
        let g = graph(&[2, 2, 2], &[1, 1, 1], &[1, 5, 5]);
        let g2 = graph(&[2, 3, 3, 2], &[1, 1, 1, 3], &[1, 5, 5, 5]);
        assert_eq!(select_normal_tree(&g).unwrap().branch_ids, BTreeSet::from([1]));
        assert_eq!(select_normal_tree(&g2).unwrap().branch_ids, BTreeSet::from([1, 2]));
    }
}
