use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use lgsynth_core::dynamics::{integrate_signal, simulate, DynamicsError, Trajectory};
use lgsynth_core::filter::{compile_tree, CompiledCircuit, FitnessEvaluator, ParameterRanges, PENALTY};
use lgsynth_core::gp::{evolve_seeded, EvolutionResult};
use lgsynth_core::lg::{derive, select_normal_tree, ElementKind, StateSpaceModel};
use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::model_file::{ModelFile, SimulationSettings};
use crate::svg::{Plot, Scale, Series};

pub const STATE_SPACE_FILE: &str = "state_space.json";
pub const SIMULATION_CSV: &str = "simulation.csv";
pub const SIMULATION_SVG: &str = "simulation.svg";
pub const NETLIST_CSV: &str = "netlist.csv";
pub const BODE_CSV: &str = "bode.csv";
pub const STATS_CSV: &str = "stats.csv";
pub const FITNESS_SVG: &str = "fitness.svg";
pub const RESPONSE_SVG: &str = "response.svg";
pub const MANIFEST_JSON: &str = "manifest.json";

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Shortest round-trip text for a float, in exponent form when very small
/// or very large.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-3..1e6).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn format_matrix(name: &str, m: &DMatrix<f64>) -> String {
    let mut s = format!("{name} ({}x{})\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>16.8e}")).collect();
        s.push_str(&format!("  [{} ]\n", cells.join("")));
    }
    s
}

fn derive_model(model: &ModelFile) -> Result<StateSpaceModel, CliError> {
    let g = model.graph()?;
    derive(&g).map_err(|e| CliError::Model(e.to_string()))
}

#[derive(Serialize)]
struct StateSpaceReport<'a> {
    state_labels: &'a [String],
    input_labels: &'a [String],
    output_labels: &'a [String],
    tree_branches: Vec<usize>,
    tree_links: Vec<usize>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
}

/// Derives the state-space model of a model file. Returns the text report
/// and, when `out` is given, also writes it as JSON.
pub fn run_model(path: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let model = ModelFile::load(path)?;
    let g = model.graph()?;
    let ss = derive(&g).map_err(|e| CliError::Model(e.to_string()))?;
    let tree = select_normal_tree(&g).map_err(|e| CliError::Model(e.to_string()))?;

    let mut text = String::new();
    text.push_str(&format!("states:  {}\n", ss.state_labels.join(", ")));
    text.push_str(&format!("inputs:  {}\n", ss.input_labels.join(", ")));
    text.push_str(&format!("outputs: {}\n", ss.output_labels.join(", ")));
    let ids = |s: &std::collections::BTreeSet<usize>| s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    text.push_str(&format!("normal tree branches: {}\n", ids(&tree.branch_ids)));
    text.push_str(&format!("co-tree links:        {}\n", ids(&tree.link_ids)));
    for (name, m) in [("A", &ss.a), ("B", &ss.b), ("C", &ss.c), ("D", &ss.d), ("F", &ss.f)] {
        text.push_str(&format_matrix(name, m));
    }

    if let Some(dir) = out {
        create_dir(dir)?;
        let report = StateSpaceReport {
            state_labels: &ss.state_labels,
            input_labels: &ss.input_labels,
            output_labels: &ss.output_labels,
            tree_branches: tree.branch_ids.iter().copied().collect(),
            tree_links: tree.link_ids.iter().copied().collect(),
            a: rows_of(&ss.a),
            b: rows_of(&ss.b),
            c: rows_of(&ss.c),
            d: rows_of(&ss.d),
            f: rows_of(&ss.f),
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(&dir.join(STATE_SPACE_FILE), &(json + "\n"))?;
    }
    Ok(text)
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub integrate: Vec<String>,
    pub out: PathBuf,
    pub plot: bool,
}

/// Resolves an output channel given as a 0-based index or an output label.
fn resolve_channel(ss: &StateSpaceModel, name: &str) -> Result<usize, CliError> {
    if let Some(i) = ss.output_labels.iter().position(|l| l == name) {
        return Ok(i);
    }
    match name.parse::<usize>() {
        Ok(i) if i < ss.output_count() => Ok(i),
        _ => Err(CliError::Usage(format!(
            "unknown output channel `{name}`; outputs are [{}]",
            ss.output_labels.join(", ")
        ))),
    }
}

fn dynamics_error(e: DynamicsError) -> CliError {
    match e {
        DynamicsError::NonFiniteState { .. } => CliError::NonFinite(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

fn simulate_trajectory(
    ss: &StateSpaceModel,
    model: &ModelFile,
    settings: &SimulationSettings,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory, CliError> {
    let sources: Vec<f64> = model
        .graph()?
        .source_ids()
        .iter()
        .map(|&id| model.params[id - 1])
        .collect();
    let u = DVector::from_vec(settings.inputs.clone().unwrap_or(sources));
    let x0 = settings
        .initial_state
        .clone()
        .map(DVector::from_vec)
        .unwrap_or_else(|| DVector::zeros(ss.state_count()));
    simulate(ss, |_| u.clone(), t_end, dt, &x0).map_err(dynamics_error)
}

/// Simulates a constant-input step response and writes `simulation.csv`
/// (and `simulation.svg` when plotting). Returns the CSV path.
pub fn run_simulate(path: &Path, opts: &SimulateOptions) -> Result<PathBuf, CliError> {
    let model = ModelFile::load(path)?;
    run_simulate_model(&model, &model.simulation, opts)
}

fn run_simulate_model(
    model: &ModelFile,
    settings: &SimulationSettings,
    opts: &SimulateOptions,
) -> Result<PathBuf, CliError> {
    let t_end = opts
        .t_end
        .or(settings.t_end)
        .ok_or_else(|| CliError::Usage("no end time: pass --t-end or set simulation.t_end".into()))?;
    let dt = opts.dt.or(settings.dt).unwrap_or(t_end / 1000.0);
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(CliError::Usage(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite() && dt <= t_end) {
        return Err(CliError::Usage(format!("dt must satisfy 0 < dt <= t_end, got {dt}")));
    }

    let ss = derive_model(model)?;
    let channels = if opts.integrate.is_empty() {
        &settings.integrate
    } else {
        &opts.integrate
    };
    let channels: Vec<usize> = channels
        .iter()
        .map(|c| resolve_channel(&ss, c))
        .collect::<Result<_, _>>()?;
    info!(
        "simulating {} states to t = {t_end} s with dt = {dt} s",
        ss.state_count()
    );
    let tr = simulate_trajectory(&ss, model, settings, dt, t_end)?;

    let mut header = vec!["time".to_string()];
    header.extend(ss.output_labels.iter().map(|l| format!("out:{l}")));
    header.extend(ss.state_labels.iter().map(|l| format!("state:{l}")));
    header.extend(channels.iter().map(|&c| format!("int:{}", ss.output_labels[c])));
    let integrals: Vec<Vec<f64>> = channels
        .iter()
        .map(|&c| integrate_signal(&tr, c).map_err(dynamics_error))
        .collect::<Result<_, _>>()?;

    create_dir(&opts.out)?;
    let csv_path = opts.out.join(SIMULATION_CSV);
    let rows = (0..tr.times.len()).map(|k| {
        let mut row = vec![num(tr.times[k])];
        row.extend(tr.outputs[k].iter().map(|v| num(*v)));
        row.extend(tr.states[k].iter().map(|v| num(*v)));
        row.extend(integrals.iter().map(|col| num(col[k])));
        row
    });
    write_rows(&csv_path, &header, rows)?;

    if opts.plot {
        let mut series: Vec<Series> = (0..ss.output_count())
            .map(|c| {
                Series::new(
                    ss.output_labels[c].clone(),
                    &tr.times,
                    &tr.output(c).unwrap_or_default(),
                )
            })
            .collect();
        for (&c, col) in channels.iter().zip(&integrals) {
            series.push(Series::new(format!("int {}", ss.output_labels[c]), &tr.times, col));
        }
        let plot = Plot {
            title: "Step response".into(),
            x_label: "time [s]".into(),
            y_label: "value".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series,
        };
        write_file(&opts.out.join(SIMULATION_SVG), &plot.render())?;
    }
    Ok(csv_path)
}

#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSummary {
    pub seed: u64,
    pub generations: usize,
    pub best_fitness: f64,
    pub baseline_fitness: f64,
    pub best_tree: String,
    pub best_depth: usize,
    pub best_size: usize,
    pub evolved_elements: usize,
    pub load_node: usize,
    pub contrast: Vec<f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    summary: &'a EvolveSummary,
    artifacts: Vec<&'static str>,
    config: &'a RunConfig,
}

/// True when no individual of the run ever scored below the penalty.
pub fn all_penalised(result: &EvolutionResult, any_valid: bool) -> bool {
    !any_valid && result.best_fitness >= PENALTY
}

/// Evolves a filter for an evolve-mode config and writes all artifacts into
/// the output directory. Returns the run summary.
pub fn run_evolve(cfg: &RunConfig, opts: &EvolveOptions) -> Result<EvolveSummary, CliError> {
    if cfg.mode != Mode::Evolve {
        return Err(CliError::Usage(format!(
            "config mode is {:?}, expected evolve",
            cfg.mode
        )));
    }
    let filter = cfg
        .filter
        .as_ref()
        .ok_or_else(|| CliError::Parse("evolve mode needs a [filter] table".into()))?;
    let fspec = filter.spec()?;
    cfg.embryo.validate().map_err(|e| CliError::Parse(e.to_string()))?;

    let mut ecfg = cfg.evolution.clone();
    if let Some(seed) = opts.seed {
        ecfg.rng_seed = seed;
    }
    ecfg.validate().map_err(|e| CliError::Parse(e.to_string()))?;
    let out = opts.out.clone().unwrap_or_else(|| cfg.io.output_dir.clone());
    let plot = cfg.plot && !opts.no_plot;

    let ev = FitnessEvaluator::new(cfg.embryo, fspec).map_err(|e| CliError::Parse(e.to_string()))?;
    let ranges = ParameterRanges::new(&cfg.embryo, &fspec);
    let any_valid = AtomicBool::new(false);
    info!(
        "evolving {:?}: population {}, {} generations, seed {}",
        fspec.kind, ecfg.population_size, ecfg.generations, ecfg.rng_seed
    );
    let result = evolve_seeded(
        &ecfg,
        |t| {
            let f = ev.evaluate(t);
            if f < PENALTY {
                any_valid.store(true, Ordering::Relaxed);
            }
            f
        },
        &ranges,
    )
    .map_err(|e| CliError::Parse(e.to_string()))?;
    for s in &result.history {
        debug!(
            "generation {}: best {:.6} median {:.6}",
            s.generation, s.best_so_far_fitness, s.median_fitness
        );
    }

    let circuit = compile_tree(&result.best, &cfg.embryo);
    let voltages = ev.load_voltage(&circuit).ok();
    let summary = EvolveSummary {
        seed: ecfg.rng_seed,
        generations: result.history.len(),
        best_fitness: result.best_fitness,
        baseline_fitness: ev.baseline(),
        best_tree: result.best.to_string(),
        best_depth: result.best.depth(),
        best_size: result.best.size(),
        evolved_elements: circuit.evolved_element_count(),
        load_node: circuit.load_node,
        contrast: voltages.as_deref().map(|v| ev.contrast(v)).unwrap_or_default(),
    };
    info!(
        "best fitness {:.6} (baseline {:.6}), {} evolved elements",
        summary.best_fitness, summary.baseline_fitness, summary.evolved_elements
    );

    create_dir(&out)?;
    let mut artifacts = vec![NETLIST_CSV, STATS_CSV];
    write_netlist(&out.join(NETLIST_CSV), &circuit)?;
    write_stats(&out.join(STATS_CSV), &result)?;
    if let Some(v) = &voltages {
        write_bode(&out.join(BODE_CSV), &ev, v)?;
        artifacts.push(BODE_CSV);
    }
    if plot {
        write_file(&out.join(FITNESS_SVG), &fitness_plot(&result).render())?;
        artifacts.push(FITNESS_SVG);
        if let Some(v) = &voltages {
            write_file(&out.join(RESPONSE_SVG), &response_plot(&ev, v).render())?;
            artifacts.push(RESPONSE_SVG);
        }
    }
    artifacts.push(MANIFEST_JSON);

    let mut echo = cfg.clone();
    echo.evolution.rng_seed = ecfg.rng_seed;
    let manifest = Manifest {
        tool: "lgsynth",
        version: env!("CARGO_PKG_VERSION"),
        seed: ecfg.rng_seed,
        summary: &summary,
        artifacts,
        config: &echo,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out.join(MANIFEST_JSON), &(json + "\n"))?;

    if all_penalised(&result, any_valid.load(Ordering::Relaxed)) {
        return Err(CliError::AllPenalised);
    }
    Ok(summary)
}

fn write_netlist(path: &Path, circuit: &CompiledCircuit) -> Result<(), CliError> {
    let header: Vec<String> = [
        "element_id",
        "kind",
        "node_a",
        "node_b",
        "value",
        "unit",
        "tree_node",
        "label",
    ]
    .map(String::from)
    .to_vec();
    let rows = circuit.netlist().into_iter().map(|r| {
        vec![
            r.element_id.to_string(),
            component_name(r.kind).to_string(),
            r.node_a.to_string(),
            r.node_b.to_string(),
            num(r.value),
            r.unit.to_string(),
            r.tree_node.map(|n| n.to_string()).unwrap_or_default(),
            r.label,
        ]
    });
    write_rows(path, &header, rows)
}

/// Electrical name of a filter element kind.
fn component_name(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::ASource => "voltage_source",
        ElementKind::AType => "capacitor",
        ElementKind::DType => "resistor",
        ElementKind::TType => "inductor",
        ElementKind::TSource => "current_source",
        ElementKind::Transformer => "transformer",
        ElementKind::Gyrator => "gyrator",
    }
}

fn write_stats(path: &Path, result: &EvolutionResult) -> Result<(), CliError> {
    let header: Vec<String> = [
        "generation",
        "best_so_far",
        "median",
        "mean",
        "stddev",
        "best_depth",
        "best_size",
    ]
    .map(String::from)
    .to_vec();
    let rows = result.history.iter().map(|s| {
        vec![
            s.generation.to_string(),
            num(s.best_so_far_fitness),
            num(s.median_fitness),
            num(s.mean_fitness),
            num(s.fitness_stddev),
            s.best_depth.to_string(),
            s.best_size.to_string(),
        ]
    });
    write_rows(path, &header, rows)
}

fn write_bode(path: &Path, ev: &FitnessEvaluator, voltages: &[f64]) -> Result<(), CliError> {
    let vs = ev.embryo().source_voltage;
    let header: Vec<String> = ["freq_hz", "load_voltage", "target_voltage", "gain_db"]
        .map(String::from)
        .to_vec();
    let rows = ev
        .freqs()
        .iter()
        .zip(voltages)
        .zip(ev.targets())
        .map(|((f, v), t)| vec![num(*f), num(*v), num(*t), num(20.0 * (v / vs).log10())]);
    write_rows(path, &header, rows)
}

fn fitness_plot(result: &EvolutionResult) -> Plot {
    let gens: Vec<f64> = result.history.iter().map(|s| s.generation as f64).collect();
    let best: Vec<f64> = result.history.iter().map(|s| s.best_so_far_fitness).collect();
    let median: Vec<f64> = result.history.iter().map(|s| s.median_fitness).collect();
    Plot {
        title: "Fitness by generation".into(),
        x_label: "generation".into(),
        y_label: "fitness (lower is better)".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        series: vec![
            Series::new("best so far", &gens, &best),
            Series::new("median", &gens, &median),
        ],
    }
}

fn response_plot(ev: &FitnessEvaluator, voltages: &[f64]) -> Plot {
    Plot {
        title: "Load voltage magnitude".into(),
        x_label: "frequency [Hz]".into(),
        y_label: "|V_load| [V]".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Linear,
        series: vec![
            Series::new("evolved", ev.freqs(), voltages),
            Series::new("target", ev.freqs(), ev.targets()),
        ],
    }
}

/// Executes a config according to its `mode`.
pub fn run_config(cfg: &RunConfig, opts: &EvolveOptions) -> Result<String, CliError> {
    let out = opts.out.clone().unwrap_or_else(|| cfg.io.output_dir.clone());
    let input = || {
        cfg.io
            .input
            .clone()
            .ok_or_else(|| CliError::Parse(format!("{:?} mode needs io.input", cfg.mode)))
    };
    match cfg.mode {
        Mode::Model => run_model(&input()?, Some(&out)),
        Mode::Simulate => {
            let model = ModelFile::load(&input()?)?;
            let sim = SimulateOptions {
                dt: cfg.simulation.dt,
                t_end: cfg.simulation.t_end,
                integrate: cfg.simulation.integrate.clone(),
                out,
                plot: cfg.plot && !opts.no_plot,
            };
            let mut settings = model.simulation.clone();
            if cfg.simulation.inputs.is_some() {
                settings.inputs = cfg.simulation.inputs.clone();
            }
            if cfg.simulation.initial_state.is_some() {
                settings.initial_state = cfg.simulation.initial_state.clone();
            }
            let path = run_simulate_model(&model, &settings, &sim)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        Mode::Evolve => {
            let s = run_evolve(cfg, opts)?;
            Ok(format!(
                "best fitness {:.6} (baseline {:.6}), {} evolved elements\n{}\n",
                s.best_fitness, s.baseline_fitness, s.evolved_elements, s.best_tree
            ))
        }
    }
}
