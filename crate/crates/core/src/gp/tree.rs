use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Inner node operations. Both take exactly two construction actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Function {
    Series,
    Split,
}

/// Leaf construction actions: add one A-type, D-type or T-type element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TerminalKind {
    AddA,
    AddD,
    AddT,
}

impl TerminalKind {
    pub const ALL: [TerminalKind; 3] = [TerminalKind::AddA, TerminalKind::AddD, TerminalKind::AddT];

    pub fn name(self) -> &'static str {
        match self {
            TerminalKind::AddA => "Add_A",
            TerminalKind::AddD => "Add_D",
            TerminalKind::AddT => "Add_T",
        }
    }
}

/// A node of a constructor program. Function arity is fixed at two by the
/// type, so every tree satisfies closure.
#[derive(Debug, Clone, PartialEq)]
pub enum GpNode {
    Function { op: Function, children: Box<[GpNode; 2]> },
    Terminal { kind: TerminalKind, value: f64 },
}

impl GpNode {
    pub fn series(a: GpNode, b: GpNode) -> Self {
        GpNode::Function {
            op: Function::Series,
            children: Box::new([a, b]),
        }
    }

    pub fn split(a: GpNode, b: GpNode) -> Self {
        GpNode::Function {
            op: Function::Split,
            children: Box::new([a, b]),
        }
    }

    pub fn terminal(kind: TerminalKind, value: f64) -> Self {
        GpNode::Terminal { kind, value }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, GpNode::Terminal { .. })
    }

    pub fn size(&self) -> usize {
        match self {
            GpNode::Terminal { .. } => 1,
            GpNode::Function { children, .. } => 1 + children[0].size() + children[1].size(),
        }
    }

    /// Number of levels; a lone terminal has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            GpNode::Terminal { .. } => 1,
            GpNode::Function { children, .. } => 1 + children[0].depth().max(children[1].depth()),
        }
    }

    pub fn terminal_count(&self) -> usize {
        match self {
            GpNode::Terminal { .. } => 1,
            GpNode::Function { children, .. } => children[0].terminal_count() + children[1].terminal_count(),
        }
    }

    /// Pre-order traversal, yielding `(node, level)` with the root at level 1.
    pub fn preorder(&self) -> Vec<(&GpNode, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![(self, 1)];
        while let Some((node, level)) = stack.pop() {
            out.push((node, level));
            if let GpNode::Function { children, .. } = node {
                stack.push((&children[1], level + 1));
                stack.push((&children[0], level + 1));
            }
        }
        out
    }

    fn replaced(&self, target: usize, counter: &mut usize, replacement: &GpNode) -> GpNode {
        let here = *counter;
        *counter += 1;
        if here == target {
            // Skip the counter past the replaced subtree.
            *counter += self.size() - 1;
            return replacement.clone();
        }
        match self {
            GpNode::Terminal { .. } => self.clone(),
            GpNode::Function { op, children } => {
                let a = children[0].replaced(target, counter, replacement);
                let b = children[1].replaced(target, counter, replacement);
                GpNode::Function {
                    op: *op,
                    children: Box::new([a, b]),
                }
            }
        }
    }
}

impl fmt::Display for GpNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpNode::Terminal { kind, value } => write!(f, "{}({:e})", kind.name(), value),
            GpNode::Function { op, children } => {
                let name = match op {
                    Function::Series => "Series",
                    Function::Split => "Split",
                };
                write!(f, "{name}({}, {})", children[0], children[1])
            }
        }
    }
}

/// A constructor program with cached size and depth.
#[derive(Debug, Clone, PartialEq)]
pub struct GpTree {
    root: GpNode,
    size: usize,
    depth: usize,
}

impl GpTree {
    pub fn new(root: GpNode) -> Self {
        let size = root.size();
        let depth = root.depth();
        Self { root, size, depth }
    }

    pub fn root(&self) -> &GpNode {
        &self.root
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn terminal_count(&self) -> usize {
        self.root.terminal_count()
    }

    /// Subtree rooted at pre-order position `index`, with its level.
    pub fn node_at(&self, index: usize) -> Option<(&GpNode, usize)> {
        self.root.preorder().into_iter().nth(index)
    }

    /// Copy of this tree with the subtree at pre-order `index` replaced.
    pub fn with_subtree(&self, index: usize, replacement: &GpNode) -> GpTree {
        let mut counter = 0;
        GpTree::new(self.root.replaced(index, &mut counter, replacement))
    }

    /// True when the cached size and depth agree with a fresh traversal.
    pub fn caches_consistent(&self) -> bool {
        self.size == self.root.size() && self.depth == self.root.depth()
    }
}

impl fmt::Display for GpTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Draws the parameter carried by a new terminal.
pub trait TerminalSampler {
    fn sample_value<R: Rng + ?Sized>(&self, kind: TerminalKind, rng: &mut R) -> f64;
}

/// Sampler that gives every terminal the same value.
#[derive(Debug, Clone, Copy)]
pub struct FixedValue(pub f64);

impl TerminalSampler for FixedValue {
    fn sample_value<R: Rng + ?Sized>(&self, _: TerminalKind, _: &mut R) -> f64 {
        self.0
    }
}

fn random_terminal<S: TerminalSampler, R: Rng + ?Sized>(sampler: &S, rng: &mut R) -> GpNode {
    let kind = TerminalKind::ALL[rng.random_range(0..TerminalKind::ALL.len())];
    let value = sampler.sample_value(kind, rng);
    GpNode::Terminal { kind, value }
}

/// Complete tree: functions on every level above `depth`, terminals on it.
pub fn full_tree<S: TerminalSampler, R: Rng + ?Sized>(depth: usize, sampler: &S, rng: &mut R) -> GpNode {
    if depth <= 1 {
        return random_terminal(sampler, rng);
    }
    let op = if rng.random_bool(0.5) {
        Function::Series
    } else {
        Function::Split
    };
    let a = full_tree(depth - 1, sampler, rng);
    let b = full_tree(depth - 1, sampler, rng);
    GpNode::Function {
        op,
        children: Box::new([a, b]),
    }
}

/// Each node is a function or a terminal with equal odds, down to `depth`.
pub fn grow_tree<S: TerminalSampler, R: Rng + ?Sized>(depth: usize, sampler: &S, rng: &mut R) -> GpNode {
    if depth <= 1 || rng.random_bool(0.5) {
        return random_terminal(sampler, rng);
    }
    let op = if rng.random_bool(0.5) {
        Function::Series
    } else {
        Function::Split
    };
    let a = grow_tree(depth - 1, sampler, rng);
    let b = grow_tree(depth - 1, sampler, rng);
    GpNode::Function {
        op,
        children: Box::new([a, b]),
    }
}

/// Ramped half-and-half: target depth uniform in `1..=max_depth`, then the
/// full or grow method with equal probability.
pub fn random_tree<S: TerminalSampler, R: Rng + ?Sized>(max_depth: usize, sampler: &S, rng: &mut R) -> GpTree {
    let target = rng.random_range(1..=max_depth.max(1));
    let root = if rng.random_bool(0.5) {
        full_tree(target, sampler, rng)
    } else {
        grow_tree(target, sampler, rng)
    };
    GpTree::new(root)
}
