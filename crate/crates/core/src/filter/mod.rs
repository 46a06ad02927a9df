//! Passive filter synthesis: constructor trees are grown inside a fixed
//! source/load embryo, compiled to linear graphs and scored against a
//! brick-wall magnitude target.

mod compile;
mod fitness;
mod sampling;
mod spec;

pub use compile::{
    build_embryo, compile_embryo, compile_tree, CompiledCircuit, NetlistRecord, PartialCircuit, START_NODE,
};
pub use fitness::{evaluate_fitness, EvaluationError, FitnessEvaluator, PENALTY};
pub use sampling::{sample_parameter, ParameterRanges};
pub use spec::{target_magnitude, EmbryoSpec, FilterKind, FilterSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
}
