//! Command-line front end: argument parsing, dispatch, CSV rendering.
//!
//! Every command reads one experiment config, computes everything, and only
//! then writes: the primary table(s) to stdout (blank-line separated when
//! there are several) and, with `--out <dir>`, one `.csv` file per table
//! plus `manifest.csv`. A `manifest,<config sha256>,<seed>,<version>` line
//! always goes to the error stream so runs can be reproduced exactly.
//!
//! Exit codes: 0 success, 1 config or validation failure (nothing written),
//! 2 runtime failure.

use crate::config::{ConfigError, ExperimentConfig};
use crate::exponents::{estimate_empirical_exponent, ExponentError};
use crate::flows::{decompose_paths, max_flow, min_cut, multicast_capacity, remove_cycles, FlowError};
use crate::fluidqueue::{check_fluid_convergence, FluidError, PathQueueSystem};
use crate::network::Network;
use crate::rate::{format_rate, rate_to_f64};
use crate::simulator::{
    measure_achieved_rate, run_batch_outcomes, summarize_outcomes, SimConfig, SimError, SimMode,
};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl CliError {
    /// 1 for anything caught before running; 2 for failures of a valid run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(SimError::AllTimedOut)
            | CliError::Exponent(ExponentError::Sim(SimError::AllTimedOut))
            | CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rlncsim", version, about = "Random linear network coding simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Min-cut capacities between the configured source and sinks.
    Capacity(CommonArgs),
    /// Monte-Carlo decoding trials under the configured mode.
    Simulate(CommonArgs),
    /// Achieved rate K/T of rateless runs.
    Rate(CommonArgs),
    /// Scaled tandem-queue trajectories against the fluid limit.
    Fluid(CommonArgs),
    /// Empirical error exponent over a delta grid.
    Exponent(ExponentArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Capacity(c)
            | Command::Simulate(c)
            | Command::Rate(c)
            | Command::Fluid(c) => c,
            Command::Exponent(e) => &e.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory to write CSV files into (stdout always gets the tables).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed, overriding the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trial count, overriding the config's `trials`.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Delta grid: `start:stop:step` or a comma-separated list.
    #[arg(long = "delta-grid")]
    pub delta_grid: String,
}

/// (file stem, CSV text); the stem names the `--out` file.
type Table = (String, String);

/// Everything a run produces, assembled before anything is written.
#[derive(Debug)]
pub struct Outputs {
    pub tables: Vec<Table>,
    /// sha256 of the config file bytes.
    pub config_sha256: String,
    pub seed: u64,
}

impl Outputs {
    pub fn manifest_line(&self) -> String {
        format!(
            "manifest,{},{},{}",
            self.config_sha256,
            self.seed,
            crate::VERSION
        )
    }

    pub fn manifest_csv(&self) -> String {
        format!(
            "config_sha256,seed,version\n{},{},{}\n",
            self.config_sha256,
            self.seed,
            crate::VERSION
        )
    }

    pub fn stdout_text(&self) -> String {
        let mut out = String::new();
        for (i, (_, table)) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(table);
        }
        out
    }

    /// Prints to stdout/stderr and, when given a directory, writes the
    /// per-table files plus `manifest.csv`.
    pub fn emit(&self, out_dir: Option<&Path>) -> Result<(), CliError> {
        print!("{}", self.stdout_text());
        eprintln!("{}", self.manifest_line());
        if let Some(dir) = out_dir {
            let write = |path: PathBuf, text: &str| -> Result<(), CliError> {
                std::fs::write(&path, text).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })
            };
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            for (stem, table) in &self.tables {
                write(dir.join(format!("{stem}.csv")), table)?;
            }
            write(dir.join("manifest.csv"), &self.manifest_csv())?;
        }
        Ok(())
    }
}

/// Entry point behind `main`; returns the process exit code.
pub fn run_cli(cli: &Cli) -> i32 {
    if let Some(n) = cli.command.common().threads {
        // First initialization wins; in-process reuse (tests) keeps the
        // existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli.command) {
        Ok(outputs) => match outputs.emit(cli.command.common().out.as_deref()) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Config file plus derived pieces shared by all commands.
struct Loaded {
    cfg: ExperimentConfig,
    net: Network,
    config_sha256: String,
    seed: u64,
    /// Flag override already applied; commands decide whether it is
    /// required.
    trials: Option<u64>,
}

fn load(args: &CommonArgs) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| {
        ConfigError::Io { path: args.config.display().to_string(), source }
    })?;
    let cfg = ExperimentConfig::parse(&text)?;
    let net_path = cfg.resolve_network_path(&args.config)?;
    let net_text = std::fs::read_to_string(&net_path).map_err(|source| {
        ConfigError::Io { path: net_path.display().to_string(), source }
    })?;
    let net = Network::parse(&net_text).map_err(ConfigError::from)?;
    let digest = Sha256::digest(text.as_bytes());
    let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded {
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        trials: args.trials.or(cfg.trials),
        cfg,
        net,
        config_sha256,
    })
}

fn execute(command: &Command) -> Result<Outputs, CliError> {
    let loaded = load(command.common())?;
    let tables = match command {
        Command::Capacity(_) => capacity_tables(&loaded.cfg, &loaded.net)?,
        Command::Simulate(_) => {
            let sim = effective_sim_config(&loaded, None)?;
            simulate_tables(&sim, require_trials(&loaded)?)?
        }
        Command::Rate(_) => {
            let sim = effective_sim_config(&loaded, None)?;
            if !matches!(sim.mode, SimMode::Rateless { .. }) {
                return Err(usage("`rate` needs `mode rateless` in the config"));
            }
            rate_tables(&sim, require_trials(&loaded)?)?
        }
        Command::Fluid(_) => fluid_tables(&loaded)?,
        Command::Exponent(args) => {
            let grid = parse_delta_grid(&args.delta_grid)?;
            // The estimator drives the horizon itself; a config `mode` is
            // accepted but not required.
            let sim = effective_sim_config(&loaded, Some(SimMode::Fixed { delta: 0.0 }))?;
            let rate = loaded.cfg.target_rate.ok_or(ConfigError::Missing("rate"))?;
            exponent_tables(&sim, &loaded.net, rate, &grid, require_trials(&loaded)?)?
        }
    };
    Ok(Outputs {
        tables,
        config_sha256: loaded.config_sha256,
        seed: loaded.seed,
    })
}

fn require_trials(loaded: &Loaded) -> Result<u64, CliError> {
    loaded.trials.ok_or(ConfigError::Missing("trials")).map_err(CliError::from)
}

/// `sim_config` with the command-line seed applied, optionally defaulting a
/// missing `mode`.
fn effective_sim_config(
    loaded: &Loaded,
    default_mode: Option<SimMode>,
) -> Result<SimConfig, CliError> {
    let mut cfg = loaded.cfg.clone();
    if cfg.mode.is_none() {
        cfg.mode = default_mode;
    }
    let mut sim = cfg.sim_config(&loaded.net)?;
    sim.seed = loaded.seed;
    Ok(sim)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn capacity_tables(cfg: &ExperimentConfig, net: &Network) -> Result<Vec<Table>, CliError> {
    let source_label = cfg.source.as_deref().ok_or(ConfigError::Missing("source"))?;
    if cfg.sinks.is_empty() {
        return Err(ConfigError::Missing("sinks").into());
    }
    let source = net.require_node(source_label).map_err(ConfigError::from)?;
    let mut csv = String::from("key,value\n");
    let mut sink_ids = Vec::new();
    for label in &cfg.sinks {
        sink_ids.push(net.require_node(label).map_err(ConfigError::from)?);
    }
    let capacity = multicast_capacity(net, source, &sink_ids)?;
    let _ = writeln!(csv, "capacity,{}", format_rate(&capacity));
    for (&sink, label) in sink_ids.iter().zip(&cfg.sinks) {
        let cut = min_cut(net, source, sink)?;
        let _ = writeln!(csv, "min_cut[{label}],{}", format_rate(&cut.capacity));
        let side: Vec<&str> = cut.q_side.iter().map(|&n| net.label(n)).collect();
        let _ = writeln!(csv, "cut[{label}],{}", side.join(" "));
    }
    Ok(vec![("capacity".to_string(), csv)])
}

pub fn simulate_tables(sim: &SimConfig, trials: u64) -> Result<Vec<Table>, CliError> {
    let outcomes = run_batch_outcomes(sim, trials)?;
    let summary = summarize_outcomes(sim, &outcomes)?;
    let labels: Vec<&str> = sim.sinks.iter().map(|&n| sim.network.label(n)).collect();

    let mut trial_csv = String::from("trial,all_success,timed_out,horizon,completion_time,injected,received");
    for label in &labels {
        let _ = write!(trial_csv, ",success[{label}],rank[{label}]");
    }
    trial_csv.push('\n');
    for (i, o) in outcomes.iter().enumerate() {
        let _ = write!(
            trial_csv,
            "{i},{},{},{},{},{},{}",
            u8::from(o.all_sinks_succeeded()),
            u8::from(o.timed_out),
            o.horizon,
            fmt_opt(o.completion_time),
            o.injected.iter().sum::<u64>(),
            o.received.iter().sum::<u64>(),
        );
        for s in &o.sinks {
            let _ = write!(trial_csv, ",{},{}", u8::from(s.success), s.rank);
        }
        trial_csv.push('\n');
    }

    let mut summary_csv = String::from("key,value\n");
    let _ = writeln!(summary_csv, "trials,{}", summary.trials);
    let _ = writeln!(summary_csv, "all_successes,{}", summary.all_sinks_successes);
    let _ = writeln!(
        summary_csv,
        "all_frequency,{}",
        summary.all_sinks_successes as f64 / summary.trials as f64
    );
    let _ = writeln!(summary_csv, "all_wilson_lo,{}", summary.all_sinks_wilson.0);
    let _ = writeln!(summary_csv, "all_wilson_hi,{}", summary.all_sinks_wilson.1);
    let _ = writeln!(summary_csv, "timeouts,{}", summary.timeouts);
    let _ = writeln!(
        summary_csv,
        "mean_completion_time,{}",
        fmt_opt(summary.mean_completion_time)
    );
    for (i, (inj, rec)) in summary.mean_injected.iter().zip(&summary.mean_received).enumerate() {
        let _ = writeln!(summary_csv, "mean_injected[{i}],{inj}");
        let _ = writeln!(summary_csv, "mean_received[{i}],{rec}");
    }
    for (s, label) in summary.per_sink.iter().zip(&labels) {
        let _ = writeln!(summary_csv, "successes[{label}],{}", s.successes);
        let _ = writeln!(summary_csv, "frequency[{label}],{}", s.frequency);
        let _ = writeln!(summary_csv, "wilson_lo[{label}],{}", s.wilson.0);
        let _ = writeln!(summary_csv, "wilson_hi[{label}],{}", s.wilson.1);
        let _ = writeln!(summary_csv, "mean_rank[{label}],{}", s.mean_rank);
    }

    Ok(vec![
        ("trials".to_string(), trial_csv),
        ("summary".to_string(), summary_csv),
    ])
}

pub fn rate_tables(sim: &SimConfig, trials: u64) -> Result<Vec<Table>, CliError> {
    let measured = measure_achieved_rate(sim, trials)?;
    let mut csv = String::from("key,value\n");
    let _ = writeln!(csv, "k,{}", sim.k);
    let _ = writeln!(csv, "trials,{}", measured.trials);
    let _ = writeln!(csv, "completed,{}", measured.completed);
    let _ = writeln!(csv, "achieved_rate,{}", measured.rate);
    let _ = writeln!(csv, "mean_completion_time,{}", measured.mean_completion_time);
    Ok(vec![("rate".to_string(), csv)])
}

/// Builds the tandem system for the single decomposition path of the
/// configured unicast flow.
fn fluid_system(cfg: &ExperimentConfig, net: &Network) -> Result<PathQueueSystem, CliError> {
    let source_label = cfg.source.as_deref().ok_or(ConfigError::Missing("source"))?;
    let sink_label = match cfg.sinks.as_slice() {
        [] => return Err(ConfigError::Missing("sinks").into()),
        [one] => one,
        more => {
            return Err(usage(format!(
                "`fluid` models one source-sink path; config names {} sinks",
                more.len()
            )));
        }
    };
    let source = net.require_node(source_label).map_err(ConfigError::from)?;
    let sink = net.require_node(sink_label).map_err(ConfigError::from)?;
    let field_m = cfg.field_m.ok_or(ConfigError::Missing("field"))?;
    let flow = max_flow(net, source, sink)?;
    let decomposition = decompose_paths(&remove_cycles(&flow))?;
    let path = match decomposition.paths.as_slice() {
        [one] => one,
        other => {
            return Err(usage(format!(
                "`fluid` needs a flow that decomposes into exactly one path; got {}",
                other.len()
            )));
        }
    };
    let rate = rate_to_f64(&path.rate);
    // z per hop, parallel arcs pooled: receptions on the hop form one
    // stream.
    let z: Vec<f64> = path
        .nodes
        .windows(2)
        .map(|hop| {
            let total: f64 = net
                .arcs()
                .iter()
                .filter(|a| a.head == hop[0] && a.tail == hop[1])
                .map(|a| rate_to_f64(&a.z))
                .sum();
            total
        })
        .collect();
    let jobs_floor = cfg.jobs.as_ref().map_or(DEFAULT_JOB_GRID[0], |g| g[0]);
    Ok(PathQueueSystem::from_path(rate, &z, 1u32 << field_m, jobs_floor)?)
}

const DEFAULT_JOB_GRID: [u64; 3] = [100, 1000, 10_000];
const DEFAULT_FLUID_TRIALS: u64 = 20;

fn fluid_tables(loaded: &Loaded) -> Result<Vec<Table>, CliError> {
    let cfg = &loaded.cfg;
    let sys = fluid_system(cfg, &loaded.net)?;
    let jobs = cfg.jobs.clone().unwrap_or_else(|| DEFAULT_JOB_GRID.to_vec());
    // Default horizon: half again past the fluid drain instant.
    let horizon = cfg.horizon.unwrap_or(1.5 / sys.candidate_rate());
    let trials = loaded.trials.unwrap_or(DEFAULT_FLUID_TRIALS);
    let report = check_fluid_convergence(&sys, &jobs, horizon, trials, loaded.seed)?;

    let mut csv = String::from("n,tau,station,scaled_level,fluid_level\n");
    for entry in &report.entries {
        for (l, levels) in entry.mean_scaled.iter().enumerate() {
            for (i, (&tau, &level)) in entry.tau_grid.iter().zip(levels).enumerate() {
                let fluid = if l == 0 { entry.fluid_station1[i] } else { 0.0 };
                let _ = writeln!(csv, "{},{tau},{},{level},{fluid}", entry.n, l + 1);
            }
        }
    }
    Ok(vec![("fluid".to_string(), csv)])
}

pub fn exponent_tables(
    sim: &SimConfig,
    net: &Network,
    rate: f64,
    grid: &[f64],
    trials: u64,
) -> Result<Vec<Table>, CliError> {
    let estimate = estimate_empirical_exponent(sim, rate, grid, trials)?;
    let mut tables = Vec::new();
    for sink in &estimate.per_sink {
        let label = net.label(sink.sink);
        let mut csv = String::from(
            "delta,trials,failures,p_e,wilson_lo,wilson_hi,lower_bound_pe,analytic_exponent,fitted_slope\n",
        );
        for p in &sink.points {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                p.delta,
                p.trials,
                p.failures,
                p.p_e,
                p.wilson.0,
                p.wilson.1,
                p.ln_lower_pe.exp(),
                fmt_opt(sink.analytic_exponent),
                fmt_opt(sink.fitted_slope),
            );
        }
        tables.push((format!("exponent_{label}"), csv));
    }
    if estimate.per_sink.len() > 1 {
        let mut csv = String::from("key,value\n");
        let _ = writeln!(csv, "rate,{}", estimate.rate);
        let _ = writeln!(csv, "system_exponent,{}", fmt_opt(estimate.system_exponent));
        tables.push(("exponent_system".to_string(), csv));
    }
    Ok(tables)
}

/// `start:stop:step` (inclusive) or `a,b,c`; every value must be positive.
fn parse_delta_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parse_one = |w: &str| -> Result<f64, CliError> {
        let v: f64 = w
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad delta {w:?} in grid")))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(usage(format!("delta {v} must be positive")));
        }
        Ok(v)
    };
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(usage("delta grid must be start:stop:step or a comma list"));
        };
        let (a, b, s) = (parse_one(start)?, parse_one(stop)?, parse_one(step)?);
        if b < a {
            return Err(usage("delta grid stop must be >= start"));
        }
        let count = ((b - a) / s + 1e-9).floor() as usize + 1;
        (0..count).map(|i| a + s * i as f64).collect()
    } else {
        text.split(',').map(parse_one).collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(usage("empty delta grid"));
    }
    Ok(grid)
}
