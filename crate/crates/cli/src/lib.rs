//! Command-line front end for `relaycap`: configuration, sweeps and CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{parse_config_with, Config, ConfigError, Preset};
use crate::experiment::ExperimentError;
use crate::output::Table;

#[derive(Debug, Parser)]
#[command(name = "relaycap", version, about = "Outage rates of large relay networks under random attacks")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads (defaults to all cores). Never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut-set bound, AF and DF rates at one operating point.
    Rates(SystemArgs),
    /// Monte Carlo outage estimate at one operating point.
    Sim {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Optimal source/relay power split.
    Alpha(SystemArgs),
    /// Regenerate a figure's data as CSV.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=5))]
        figure: u8,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Parse and check a configuration file, then print the resolved values.
    ValidateConfig {
        /// Same as --config.
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
pub struct SystemArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma0_db: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SimArgs {
    /// MAC, AF or DF.
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub n_relays: Option<usize>,
    #[arg(long)]
    pub target_rate: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw one relay placement for the whole run.
    #[arg(long)]
    pub fixed_positions: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(#[from] ExperimentError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn push<T: ToString>(out: &mut Vec<(String, String)>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        out.push((key.to_string(), v.to_string()));
    }
}

impl SystemArgs {
    fn overrides(&self, out: &mut Vec<(String, String)>) {
        push(out, "system.gamma0_db", self.gamma0_db);
        push(out, "system.p", self.p);
        push(out, "system.alpha", self.alpha);
        push(out, "system.epsilon", self.epsilon);
    }
}

impl SimArgs {
    fn overrides(&self, out: &mut Vec<(String, String)>) {
        push(out, "sim.strategy", self.strategy.as_ref());
        push(out, "sim.n_relays", self.n_relays);
        push(out, "sim.target_rate", self.target_rate);
        push(out, "sim.trials", self.trials);
        push(out, "sim.seed", self.seed);
        if self.fixed_positions {
            push(out, "sim.resample_positions", Some(false));
        }
    }
}

impl Cli {
    /// Flag values as config-key overrides.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match &self.command {
            Command::Rates(s) | Command::Alpha(s) => s.overrides(&mut out),
            Command::Sim { system, sim } => {
                system.overrides(&mut out);
                sim.overrides(&mut out);
            }
            Command::Reproduce { figure, seed, trials } => {
                let preset = Preset::from_figure(*figure).expect("clap restricts the range");
                push(&mut out, "experiment.preset", Some(preset));
                push(&mut out, "sim.seed", *seed);
                push(&mut out, "sim.trials", *trials);
            }
            Command::ValidateConfig { .. } => {}
        }
        push(&mut out, "experiment.output", self.output.as_ref().map(|p| p.display()));
        out
    }

    fn config_path(&self) -> Option<&PathBuf> {
        match &self.command {
            Command::ValidateConfig { file: Some(f) } => Some(f),
            _ => self.config.as_ref(),
        }
    }

    pub fn load_config(&self) -> Result<Config, CliError> {
        let text = match self.config_path() {
            Some(path) => fs::read_to_string(path).map_err(|source| CliError::Io {
                context: format!("reading {}", path.display()),
                source,
            })?,
            None => String::new(),
        };
        Ok(parse_config_with(&text, &self.overrides())?)
    }
}

/// What a command produced and where it should go (`None` is stdout).
#[derive(Debug)]
pub struct Run {
    pub table: Table,
    pub output: Option<PathBuf>,
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<Run, CliError> {
    let cfg = cli.load_config()?;
    let output = match cli.command {
        Command::ValidateConfig { .. } => None,
        _ => cfg.experiment.output.clone(),
    };
    let work = || -> Result<Table, CliError> {
        Ok(match &cli.command {
            Command::Rates(_) => experiment::rates_table(&cfg)?,
            Command::Alpha(_) => experiment::alpha_table(&cfg)?,
            Command::Sim { .. } => experiment::sim_table(&cfg)?,
            Command::Reproduce { .. } => experiment::run_experiment(&cfg)?,
            Command::ValidateConfig { .. } => resolved_table(&cfg),
        })
    };
    match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io {
                context: "starting worker pool".into(),
                source: io::Error::other(e),
            })?
            .install(work),
        None => work(),
    }
    .map(|table| Run { table, output })
}

fn resolved_table(cfg: &Config) -> Table {
    let mut t = Table::new(&["key", "value"]);
    let sp = &cfg.params;
    let e = &cfg.experiment;
    let rows: Vec<(&str, String)> = vec![
        ("geometry", experiment::describe_geometry(&cfg.geometry)),
        ("system.gamma0_db", cfg.gamma0_db.to_string()),
        ("system.p", sp.p().to_string()),
        ("system.alpha", sp.alpha().to_string()),
        ("system.epsilon", sp.epsilon().to_string()),
        ("sim.strategy", cfg.sim.strategy.to_string()),
        ("sim.n_relays", cfg.sim.n_relays.to_string()),
        ("sim.target_rate", cfg.sim.target_rate.to_string()),
        ("sim.trials", cfg.sim.trials.to_string()),
        ("sim.seed", cfg.sim.seed.to_string()),
        ("sim.resample_positions", cfg.sim.resample_positions.to_string()),
        ("experiment.preset", e.preset.to_string()),
        ("experiment.gamma0_db", format!("{}:{}:{}", e.gamma0_db.start, e.gamma0_db.step, e.gamma0_db.stop)),
        ("experiment.alpha", e.alpha.to_string()),
    ];
    for (k, v) in rows {
        t.rows.push(vec![k.into(), v.as_str().into()]);
    }
    t
}

/// Writes the table to its output path, or stdout.
pub fn emit(run: &Run) -> Result<(), CliError> {
    let io_err = |context: String| move |source| CliError::Io { context, source };
    let table = &run.table;
    match &run.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(io_err(format!("creating {}", path.display())))?;
            let mut w = io::BufWriter::new(file);
            table.write_to(&mut w).map_err(io_err(format!("writing {}", path.display())))?;
            w.flush().map_err(io_err(format!("writing {}", path.display())))
        }
        None => table
            .write_to(io::stdout().lock())
            .map_err(io_err("writing stdout".into())),
    }
}
