use lgsynth_core::gp::{
    crossover, crossover_at, evolve, evolve_seeded, mutate, random_tree, select_parent, EvolutionConfig, FixedValue,
    GpNode, GpTree, Selection, TerminalKind, TerminalSampler,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform payloads so operator tests see varied values.
struct Uniform;

impl TerminalSampler for Uniform {
    fn sample_value<R: Rng + ?Sized>(&self, _: TerminalKind, rng: &mut R) -> f64 {
        rng.random_range(1.0..100.0)
    }
}

/// Full binary arity: every function contributes exactly one extra leaf.
fn well_formed(t: &GpTree, max_depth: usize) -> bool {
    let leaves = t.terminal_count();
    t.caches_consistent() && t.size() == 2 * leaves - 1 && t.depth() <= max_depth && t.depth() >= 1
}

#[test]
fn closure_under_random_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let max_depth = 6;
    let mut pool: Vec<GpTree> = (0..10_000)
        .map(|_| random_tree(max_depth, &Uniform, &mut rng))
        .collect();
    assert!(pool.iter().all(|t| well_formed(t, max_depth)));
    for _ in 0..10_000 {
        let i = rng.random_range(0..pool.len());
        if rng.random_bool(0.5) {
            let j = rng.random_range(0..pool.len());
            let (a, b) = crossover(&pool[i], &pool[j], max_depth, &mut rng);
            assert!(well_formed(&a, max_depth) && well_formed(&b, max_depth));
            pool[i] = a;
            pool[j] = b;
        } else {
            let m = mutate(&pool[i], max_depth, &Uniform, &mut rng);
            assert!(well_formed(&m, max_depth));
            pool[i] = m;
        }
    }
}

fn small_trees() -> Vec<GpTree> {
    use TerminalKind::*;
    let t = |k| GpNode::terminal(k, 1.0);
    vec![
        GpTree::new(t(AddA)),
        GpTree::new(GpNode::series(t(AddD), t(AddT))),
        GpTree::new(GpNode::split(GpNode::series(t(AddA), t(AddD)), t(AddT))),
        GpTree::new(GpNode::series(t(AddT), GpNode::split(t(AddD), t(AddA)))),
        GpTree::new(GpNode::split(
            GpNode::series(t(AddA), t(AddD)),
            GpNode::series(t(AddT), t(AddA)),
        )),
    ]
}

#[test]
fn crossover_conserves_total_size() {
    let trees = small_trees();
    for a in &trees {
        for b in &trees {
            for i in 0..a.size() {
                for j in 0..b.size() {
                    let (c1, c2) = crossover_at(a, b, i, j, 64);
                    assert_eq!(c1.size() + c2.size(), a.size() + b.size());
                    // Crossing back restores the parents.
                    let (r1, r2) = crossover_at(&c1, &c2, i, j, 64);
                    assert_eq!((&r1, &r2), (a, b));
                }
            }
        }
    }
}

#[test]
fn crossover_respects_depth_limit() {
    let trees = small_trees();
    assert!(trees.iter().all(|t| t.depth() <= 3));
    for a in &trees {
        for b in &trees {
            for i in 0..a.size() {
                for j in 0..b.size() {
                    let (c1, c2) = crossover_at(a, b, i, j, 3);
                    assert!(c1.depth() <= 3 && c2.depth() <= 3);
                }
            }
        }
    }
}

#[test]
fn mutation_respects_depth_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tree = random_tree(5, &Uniform, &mut rng);
    for _ in 0..10_000 {
        tree = mutate(&tree, 5, &Uniform, &mut rng);
        assert!(well_formed(&tree, 5));
    }
    let single = GpTree::new(GpNode::terminal(TerminalKind::AddD, 1.0));
    for _ in 0..1_000 {
        assert!(mutate(&single, 4, &Uniform, &mut rng).depth() <= 4);
    }
}

#[test]
fn roulette_prefers_lower_fitness() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let fitness: Vec<f64> = (0..10).map(f64::from).collect();
    let mut counts = [0usize; 10];
    for _ in 0..100_000 {
        counts[select_parent(&fitness, Selection::RouletteWheel, &mut rng).unwrap()] += 1;
    }
    assert!(counts[0] > counts[9], "{counts:?}");
}

#[test]
fn tournament_ties_go_to_lower_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(
        select_parent(&[2.0, 1.0, 1.0, 3.0], Selection::Tournament(10), &mut rng).unwrap(),
        1
    );
}

fn small_config(seed: u64) -> EvolutionConfig {
    EvolutionConfig {
        population_size: 20,
        generations: 30,
        max_depth: 6,
        rng_seed: seed,
        ..EvolutionConfig::default()
    }
}

#[test]
fn size_fitness_never_gets_worse() {
    let cfg = small_config(3);
    let res = evolve_seeded(&cfg, |t| t.size() as f64, &Uniform).unwrap();
    assert_eq!(res.history.len(), 30);
    assert!(res.history.last().unwrap().best_so_far_fitness <= res.history[0].best_so_far_fitness);
    assert_eq!(res.best_fitness, res.best.size() as f64);
    assert_eq!(res.best_fitness, 1.0);
}

#[test]
fn roulette_runs_are_monotone_too() {
    let cfg = EvolutionConfig {
        selection: Selection::RouletteWheel,
        ..small_config(5)
    };
    let res = evolve_seeded(&cfg, |t| (t.size() as f64 - 9.0).abs(), &Uniform).unwrap();
    assert!(res
        .history
        .windows(2)
        .all(|w| w[1].best_so_far_fitness <= w[0].best_so_far_fitness));
}

#[test]
fn serial_and_parallel_runs_are_identical() {
    let cfg = small_config(11);
    let fitness = |t: &GpTree| {
        let mut acc = 0.0;
        for (n, level) in t.root().preorder() {
            if let GpNode::Terminal { value, .. } = n {
                acc += value.ln() * level as f64;
            }
        }
        (acc - 20.0).abs()
    };
    let parallel = evolve_seeded(&cfg, fitness, &Uniform).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| evolve_seeded(&cfg, fitness, &Uniform).unwrap());
    assert_eq!(parallel.best, serial.best);
    assert_eq!(format!("{:?}", parallel.history), format!("{:?}", serial.history));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn seeded_runs_repeat_exactly(seed in any::<u64>()) {
        let cfg = small_config(seed);
        let f = |t: &GpTree| (t.terminal_count() as f64 - 4.0).abs() + t.depth() as f64 * 0.1;
        let a = evolve_seeded(&cfg, f, &Uniform).unwrap();
        let b = evolve_seeded(&cfg, f, &Uniform).unwrap();
        prop_assert_eq!(&a.best, &b.best);
        prop_assert_eq!(format!("{:?}", a.history), format!("{:?}", b.history));
    }

    #[test]
    fn elitist_history_is_monotone(seed in any::<u64>(), elites in 1usize..4) {
        let cfg = EvolutionConfig { elitism_count: elites, ..small_config(seed) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let res = evolve(&cfg, |t| (t.size() as f64 - 7.0).powi(2), &FixedValue(1.0), &mut rng).unwrap();
        prop_assert!(res.history.windows(2).all(|w| w[1].best_so_far_fitness <= w[0].best_so_far_fitness));
        prop_assert!(res.history.iter().all(|s| s.best_depth <= cfg.max_depth));
        prop_assert_eq!(res.history.last().unwrap().best_so_far_fitness, res.best_fitness);
    }
}
