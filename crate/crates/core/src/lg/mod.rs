//! Linear graph models.
//!
//! A [`LinearGraph`] holds typed, directed element branches between numbered
//! nodes (node 1 is ground). [`select_normal_tree`] splits the elements into
//! normal-tree branches and links, and [`derive_state_space`] turns the
//! graph into a numeric [`StateSpaceModel`].

mod graph;
mod state_space;
mod tree;

pub use graph::{
    build_graph, validate_graph, Diagnostic, Element, ElementKind, EnergyDomain, GraphError, LinearGraph, OutputSpec,
    VariableKind, GROUND,
};
pub use state_space::{
    derive, derive_state_space, elemental_equations, ElementalEquation, StateSpaceError, StateSpaceModel, Var,
};
pub use tree::{select_normal_tree, tree_priority, TreeError, TreePartition};
