use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, GpTree, TerminalSampler};
use super::GpError;

/// Parent selection scheme. Fitness is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Fitness-proportionate wheel over `f_max - f_i + eps`.
    RouletteWheel,
    /// Best of `k` uniform draws with replacement; `k` at or above the
    /// population size compares every individual.
    Tournament(usize),
}

/// Roulette weights for a minimized fitness: `(f_max - f_i + eps)` with
/// `eps = 1e-9 * (1 + f_max)`.
pub fn roulette_weights(fitness: &[f64]) -> Vec<f64> {
    let f_max = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = 1e-9 * (1.0 + f_max.abs());
    fitness.iter().map(|f| f_max - f + eps).collect()
}

/// Picks a parent index.
pub fn select_parent<R: Rng + ?Sized>(fitness: &[f64], method: Selection, rng: &mut R) -> Result<usize, GpError> {
    if fitness.is_empty() {
        return Err(GpError::EmptyPopulation);
    }
    if let Some(index) = fitness.iter().position(|f| !f.is_finite()) {
        return Err(GpError::NonFiniteFitness { index });
    }
    match method {
        Selection::RouletteWheel => {
            let weights = roulette_weights(fitness);
            let total: f64 = weights.iter().sum();
            let mut spin = rng.random::<f64>() * total;
            for (i, w) in weights.iter().enumerate() {
                if spin < *w {
                    return Ok(i);
                }
                spin -= w;
            }
            Ok(fitness.len() - 1)
        }
        Selection::Tournament(k) if k >= fitness.len() => {
            // Full tournament: every individual competes.
            Ok(argmin(fitness))
        }
        Selection::Tournament(k) => {
            let mut best = rng.random_range(0..fitness.len());
            for _ in 1..k.max(1) {
                let c = rng.random_range(0..fitness.len());
                if fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best) {
                    best = c;
                }
            }
            Ok(best)
        }
    }
}

/// Index of the lowest fitness; ties go to the lower index.
pub fn argmin(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate() {
        if *f < fitness[best] {
            best = i;
        }
    }
    best
}

/// Subtree crossover. One node is picked uniformly in each parent and the
/// rooted subtrees are exchanged. A child deeper than `max_depth` is replaced
/// by a copy of the parent it was derived from.
pub fn crossover<R: Rng + ?Sized>(a: &GpTree, b: &GpTree, max_depth: usize, rng: &mut R) -> (GpTree, GpTree) {
    let i = rng.random_range(0..a.size());
    let j = rng.random_range(0..b.size());
    crossover_at(a, b, i, j, max_depth)
}

/// Crossover at fixed pre-order positions `i` in `a` and `j` in `b`.
pub fn crossover_at(a: &GpTree, b: &GpTree, i: usize, j: usize, max_depth: usize) -> (GpTree, GpTree) {
    let (sa, _) = a.node_at(i).expect("crossover point inside first parent");
    let (sb, _) = b.node_at(j).expect("crossover point inside second parent");
    let c1 = a.with_subtree(i, sb);
    let c2 = b.with_subtree(j, sa);
    let c1 = if c1.depth() > max_depth { a.clone() } else { c1 };
    let c2 = if c2.depth() > max_depth { b.clone() } else { c2 };
    (c1, c2)
}

/// Subtree mutation: a uniformly chosen node is replaced by a freshly grown
/// branch whose depth keeps the result within `max_depth`.
pub fn mutate<S: TerminalSampler, R: Rng + ?Sized>(a: &GpTree, max_depth: usize, sampler: &S, rng: &mut R) -> GpTree {
    let i = rng.random_range(0..a.size());
    let (_, level) = a.node_at(i).expect("mutation point inside tree");
    let room = (max_depth + 1).saturating_sub(level).max(1);
    let limit = rng.random_range(1..=room);
    let branch = grow_tree(limit, sampler, rng);
    a.with_subtree(i, &branch)
}
