use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lgsynth_cli::{
    run_config, run_evolve, run_model, run_simulate, CliError, EvolveOptions, Mode, RunConfig, SimulateOptions,
};

/// Linear graph system modeling and evolutionary filter synthesis.
///
/// Verbosity is set with LGSYNTH_LOG (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(name = "lgsynth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive and print the state-space model of a model file.
    Model {
        file: PathBuf,
        /// Also write state_space.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the constant-input step response of a model file.
    Simulate {
        file: PathBuf,
        /// Time step in seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// End time in seconds.
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Output channel (label or 0-based index) to integrate; repeatable.
        #[arg(long)]
        integrate: Vec<String>,
        #[arg(long, default_value = "lgsynth-out")]
        out: PathBuf,
        #[arg(long)]
        no_plot: bool,
    },
    /// Evolve a passive filter from an evolve-mode run config.
    Evolve {
        config: PathBuf,
        /// Overrides evolution.rng_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides io.output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plot: bool,
    },
    /// Execute a run config according to its mode.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plot: bool,
    },
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Model { file, out } => run_model(&file, out.as_deref()),
        Command::Simulate {
            file,
            dt,
            t_end,
            integrate,
            out,
            no_plot,
        } => {
            let opts = SimulateOptions {
                dt,
                t_end,
                integrate,
                out,
                plot: !no_plot,
            };
            run_simulate(&file, &opts).map(|p| format!("wrote {}\n", p.display()))
        }
        Command::Evolve {
            config,
            seed,
            out,
            no_plot,
        } => {
            let cfg = RunConfig::load(&config)?;
            if cfg.mode != Mode::Evolve {
                return Err(CliError::Usage(format!(
                    "{}: mode is {:?}; use `lgsynth run` for non-evolve configs",
                    config.display(),
                    cfg.mode
                )));
            }
            let s = run_evolve(&cfg, &EvolveOptions { seed, out, no_plot })?;
            Ok(format!(
                "best fitness {:.6} (baseline {:.6}), {} evolved elements\n{}\n",
                s.best_fitness, s.baseline_fitness, s.evolved_elements, s.best_tree
            ))
        }
        Command::Run {
            config,
            seed,
            out,
            no_plot,
        } => run_config(&RunConfig::load(&config)?, &EvolveOptions { seed, out, no_plot }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LGSYNTH_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
