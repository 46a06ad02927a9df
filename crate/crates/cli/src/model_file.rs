//! Model files: TOML documents holding the element vectors of a linear
//! graph.
//!
//! ```toml
//! source  = [2, 2, 3]          # node each element leaves
//! target  = [1, 3, 1]          # node each element enters
//! types   = [1, 5, 2]          # 1 A-source, 2 A-type, 3 transformer,
//!                              # 4 gyrator, 5 D-type, 6 T-type, 7 T-source
//! domains = [1, 1, 1]          # 1 electrical, 2 translational,
//!                              # 3 rotational, 4 hydraulic, 5 thermal
//! params  = [1.0, 1e3, 1e-6]   # amplitude, ratio, C, L or R per element
//! labels  = ["V", "R", "C"]    # optional, defaults to e1, e2, ...
//!
//! [[outputs]]
//! element = 3
//! variable = "across"          # or "through"
//!
//! [simulation]                 # optional defaults for `simulate`
//! dt = 1e-4
//! t_end = 0.01
//! inputs = [1.0]               # constant inputs; defaults to source params
//! initial_state = [0.0]        # defaults to zeros
//! integrate = ["v_C"]          # output labels or indices to integrate
//! ```

use std::path::Path;

use lgsynth_core::lg::{build_graph, LinearGraph, OutputSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub types: Vec<i64>,
    pub domains: Vec<i64>,
    pub params: Vec<f64>,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
    #[serde(default)]
    pub simulation: SimulationSettings,
}

/// Time-simulation options; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub integrate: Vec<String>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("invalid model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }

    /// Builds and validates the graph; construction errors are model errors.
    pub fn graph(&self) -> Result<LinearGraph, CliError> {
        let labels: Vec<String> = if self.labels.is_empty() {
            (1..=self.source.len()).map(|i| format!("e{i}")).collect()
        } else {
            self.labels.clone()
        };
        build_graph(
            &self.source,
            &self.target,
            &self.types,
            &self.domains,
            &self.params,
            &labels,
            &self.outputs,
        )
        .map_err(|e| CliError::Model(e.to_string()))
    }
}
