use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ops::{crossover, mutate, select_parent, Selection};
use super::tree::{random_tree, GpTree, TerminalSampler};
use super::GpError;

/// Hyperparameters of a generational run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub max_depth: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub reproduction_rate: f64,
    pub selection: Selection,
    pub elitism_count: usize,
    pub rng_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            max_depth: 8,
            crossover_rate: 0.85,
            mutation_rate: 0.10,
            reproduction_rate: 0.05,
            selection: Selection::Tournament(4),
            elitism_count: 1,
            rng_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |msg: String| Err(GpError::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            ));
        }
        if self.generations == 0 {
            return bad("generations must be positive".into());
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive".into());
        }
        let rates = [self.crossover_rate, self.mutation_rate, self.reproduction_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("operator rates must lie in [0, 1]".into());
        }
        let sum: f64 = rates.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return bad(format!("operator rates must sum to 1, got {sum}"));
        }
        if self.elitism_count >= self.population_size {
            return bad("elitism_count must be smaller than population_size".into());
        }
        if let Selection::Tournament(0) = self.selection {
            return bad("tournament size must be positive".into());
        }
        Ok(())
    }
}

/// Per-generation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_so_far_fitness: f64,
    pub median_fitness: f64,
    pub mean_fitness: f64,
    pub fitness_stddev: f64,
    pub best_depth: usize,
    pub best_size: usize,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub best: GpTree,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs the generational loop and returns the lowest-fitness tree ever seen.
///
/// Each generation is evaluated (in parallel, merged in index order), its
/// statistics recorded, the `elitism_count` best copied over, and the rest of
/// the next population filled by crossover, mutation or reproduction drawn
/// per the configured rates. Every random choice comes from `rng` on the
/// calling thread, so results depend only on the rng state, the config and
/// `fitness`.
///
/// `fitness` must be pure and return finite values; invalid individuals
/// should receive a large finite penalty.
pub fn evolve<F, S, R>(cfg: &EvolutionConfig, fitness: F, sampler: &S, rng: &mut R) -> Result<EvolutionResult, GpError>
where
    F: Fn(&GpTree) -> f64 + Sync,
    S: TerminalSampler,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut population: Vec<GpTree> = (0..cfg.population_size)
        .map(|_| random_tree(cfg.max_depth, sampler, rng))
        .collect();
    let mut best: Option<(GpTree, f64)> = None;
    let mut history = Vec::with_capacity(cfg.generations);

    for generation in 0..cfg.generations {
        let scores: Vec<f64> = population.par_iter().map(&fitness).collect();
        if let Some(index) = scores.iter().position(|f| !f.is_finite()) {
            return Err(GpError::NonFiniteFitness { index });
        }

        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)));
        let champion = order[0];
        if best.as_ref().is_none_or(|(_, f)| scores[champion] < *f) {
            best = Some((population[champion].clone(), scores[champion]));
        }
        let (best_tree, best_fitness) = best.as_ref().expect("set above");

        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
        history.push(GenerationStats {
            generation,
            best_so_far_fitness: *best_fitness,
            median_fitness: median(&scores),
            mean_fitness: mean,
            fitness_stddev: var.sqrt(),
            best_depth: best_tree.depth(),
            best_size: best_tree.size(),
        });

        if generation + 1 == cfg.generations {
            break;
        }

        let mut next: Vec<GpTree> = order[..cfg.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let roll: f64 = rng.random();
            if roll < cfg.crossover_rate {
                let a = select_parent(&scores, cfg.selection, rng)?;
                let b = select_parent(&scores, cfg.selection, rng)?;
                let (c1, c2) = crossover(&population[a], &population[b], cfg.max_depth, rng);
                next.push(c1);
                if next.len() < cfg.population_size {
                    next.push(c2);
                }
            } else if roll < cfg.crossover_rate + cfg.mutation_rate {
                let a = select_parent(&scores, cfg.selection, rng)?;
                next.push(mutate(&population[a], cfg.max_depth, sampler, rng));
            } else {
                let a = select_parent(&scores, cfg.selection, rng)?;
                next.push(population[a].clone());
            }
        }
        population = next;
    }

    let (best, best_fitness) = best.expect("at least one generation ran");
    Ok(EvolutionResult {
        best,
        best_fitness,
        history,
    })
}

/// [`evolve`] on a ChaCha8 stream seeded from `cfg.rng_seed`.
pub fn evolve_seeded<F, S>(cfg: &EvolutionConfig, fitness: F, sampler: &S) -> Result<EvolutionResult, GpError>
where
    F: Fn(&GpTree) -> f64 + Sync,
    S: TerminalSampler,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    evolve(cfg, fitness, sampler, &mut rng)
}
