//! Tree-based genetic programming over constructor programs.
//!
//! Programs are binary trees of [`Function`]s (`Series`, `Split`) with
//! [`TerminalKind`] leaves that carry a sampled component value. Fitness is
//! minimized.

mod evolve;
mod ops;
mod tree;

pub use evolve::{evolve, evolve_seeded, EvolutionConfig, EvolutionResult, GenerationStats};
pub use ops::{argmin, crossover, crossover_at, mutate, roulette_weights, select_parent, Selection};
pub use tree::{
    full_tree, grow_tree, random_tree, FixedValue, Function, GpNode, GpTree, TerminalKind, TerminalSampler,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("EmptyPopulation: cannot select from an empty population")]
    EmptyPopulation,
    #[error("NonFiniteFitness: individual {index} has a non-finite fitness")]
    NonFiniteFitness { index: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
}
