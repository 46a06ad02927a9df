use thiserror::Error;

use super::compile::{compile_tree, CompiledCircuit};
use super::spec::{target_magnitude, EmbryoSpec, FilterKind, FilterSpec};
use super::FilterError;
use crate::dynamics::{frequency_response, DynamicsError};
use crate::gp::GpTree;
use crate::lg::{derive, StateSpaceError};

/// Fitness assigned to any candidate that cannot be analysed.
pub const PENALTY: f64 = 1e12;

/// Why a compiled circuit could not be scored.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Scores trees against one filter target on a fixed grid. Cheap to share
/// across threads.
#[derive(Debug, Clone)]
pub struct FitnessEvaluator {
    espec: EmbryoSpec,
    fspec: FilterSpec,
    freqs: Vec<f64>,
    targets: Vec<f64>,
}

impl FitnessEvaluator {
    pub fn new(espec: EmbryoSpec, fspec: FilterSpec) -> Result<Self, FilterError> {
        espec.validate()?;
        fspec.validate()?;
        let freqs = fspec.grid();
        let targets = freqs.iter().map(|&f| target_magnitude(&fspec, &espec, f)).collect();
        Ok(Self {
            espec,
            fspec,
            freqs,
            targets,
        })
    }

    pub fn embryo(&self) -> &EmbryoSpec {
        &self.espec
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.fspec
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Load voltage magnitude `|V_S * gain|` at each grid frequency.
    pub fn load_voltage(&self, circuit: &CompiledCircuit) -> Result<Vec<f64>, EvaluationError> {
        let ss = derive(&circuit.graph)?;
        let resp = frequency_response(&ss, &self.freqs)?;
        Ok(resp
            .magnitude(0, 0)
            .into_iter()
            .map(|g| self.espec.source_voltage * g)
            .collect())
    }

    /// Summed per-point error; band-pass squares the passband terms.
    pub fn score(&self, magnitudes: &[f64]) -> f64 {
        let square_pass = matches!(self.fspec.kind, FilterKind::BandPass { .. });
        magnitudes
            .iter()
            .zip(&self.freqs)
            .zip(&self.targets)
            .map(|((v, &f), t)| {
                let e = (v - t).abs();
                if square_pass && self.fspec.kind.passes(f) {
                    e * e
                } else {
                    e
                }
            })
            .sum()
    }

    pub fn evaluate_circuit(&self, circuit: &CompiledCircuit) -> f64 {
        match self.load_voltage(circuit) {
            Ok(v) => {
                let f = self.score(&v);
                if f.is_finite() {
                    f
                } else {
                    PENALTY
                }
            }
            Err(_) => PENALTY,
        }
    }

    pub fn evaluate(&self, tree: &GpTree) -> f64 {
        self.evaluate_circuit(&compile_tree(tree, &self.espec))
    }

    /// Fitness of the bare divider, the reference any useful circuit beats.
    pub fn baseline(&self) -> f64 {
        self.evaluate_circuit(&super::compile::compile_embryo(&self.espec))
    }

    /// Mean passband magnitude over mean magnitude in each outer stopband
    /// decade of the grid: the top decade for low-pass, the bottom decade for
    /// high-pass, both for band-pass.
    pub fn contrast(&self, magnitudes: &[f64]) -> Vec<f64> {
        let mean = |pred: &dyn Fn(f64) -> bool| {
            let sel: Vec<f64> = self
                .freqs
                .iter()
                .zip(magnitudes)
                .filter(|(f, _)| pred(**f))
                .map(|(_, v)| *v)
                .collect();
            sel.iter().sum::<f64>() / sel.len().max(1) as f64
        };
        let pass = mean(&|f| self.fspec.kind.passes(f));
        let (lo, hi) = (self.fspec.grid_lo, self.fspec.grid_hi);
        let bottom = move |f: f64| f <= lo * 10.0 && !self.fspec.kind.passes(f);
        let top = move |f: f64| f >= hi / 10.0 && !self.fspec.kind.passes(f);
        let decades: Vec<&dyn Fn(f64) -> bool> = match self.fspec.kind {
            FilterKind::LowPass { .. } => vec![&top],
            FilterKind::HighPass { .. } => vec![&bottom],
            FilterKind::BandPass { .. } => vec![&bottom, &top],
        };
        decades.into_iter().map(|d| pass / mean(d)).collect()
    }
}

/// One-shot fitness; invalid specs score [`PENALTY`].
pub fn evaluate_fitness(tree: &GpTree, espec: &EmbryoSpec, fspec: &FilterSpec) -> f64 {
    match FitnessEvaluator::new(*espec, *fspec) {
        Ok(ev) => ev.evaluate(tree),
        Err(_) => PENALTY,
    }
}
