use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasifree::channels::Preset;
use quasifree::config::{workers_from_env, Format, Overrides, RunConfig, Task, WORKERS_ENV};
use quasifree::run::{execute, write_outputs};
use quasifree::Error;

#[derive(Parser)]
#[command(name = "quasifree", version, about = "Dissipative quasi-free fermion chains")]
#[command(after_help = format!("Worker threads default to all cores; set {WORKERS_ENV} to override.\nExit codes: 0 ok, 2 configuration error, 3 numerical failure."))]
struct Cli {
    #[command(subcommand)]
    task: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Relaxation spectrum and ADR per field value.
    Spectrum,
    /// Linear steady state per field value.
    Steady,
    /// Time evolution of the covariance matrix.
    Evolve,
    /// ADR over a (gamma, B) grid.
    SweepAdr,
    /// Cross-check against exact diagonalization (N <= 4).
    Oracle,
    /// Noise-averaged evolution compared with the Lindblad limit.
    Stochastic,
    /// Closed forms and momentum sums.
    Analytics,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    j: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Field value `x` or range `start:stop:count`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    field: Option<String>,
    /// Channel preset, e.g. dephasing-z, loss-gain, paired.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    g: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    n_traj: Option<usize>,
    /// Output stem; writes `<stem>.csv|json` and `<stem>.meta.json`.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::Spectrum => Task::Spectrum,
            Command::Steady => Task::Steady,
            Command::Evolve => Task::Evolve,
            Command::SweepAdr => Task::SweepAdr,
            Command::Oracle => Task::Oracle,
            Command::Stochastic => Task::Stochastic,
            Command::Analytics => Task::Analytics,
        }
    }
}

fn parse_name<T: serde::de::DeserializeOwned>(flag: &str, v: &str) -> quasifree::Result<T> {
    serde_json::from_value(serde_json::Value::String(v.to_string()))
        .map_err(|e| Error::Config { path: flag.into(), message: e.to_string() })
}

fn build(cli: &Cli) -> quasifree::Result<RunConfig> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let task = cli.task.task();
    if let Some(t) = cfg.task {
        if t != task {
            return Err(Error::Config {
                path: "task".into(),
                message: format!("config file requests `{}` but subcommand is `{}`", t.name(), task.name()),
            });
        }
    }
    cfg.task = Some(task);
    let overrides = Overrides {
        n: c.n,
        j: c.j,
        gamma: c.gamma,
        field: c.field.clone(),
        preset: c.preset.as_deref().map(|p| parse_name::<Preset>("--preset", p)).transpose()?,
        g: c.g,
        mu: c.mu,
        nu: c.nu,
        t_end: c.t_end,
        dt: c.dt,
        n_traj: c.n_traj,
        output: c.output.clone(),
        format: c.format.as_deref().map(|f| parse_name::<Format>("--format", f)).transpose()?,
        seed: c.seed,
    };
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> quasifree::Result<Option<String>> {
    let cfg = build(cli)?;
    if let Some(w) = workers_from_env()? {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let art = execute(&cfg)?;
    for p in write_outputs(&cfg, &art)? {
        println!("{}", p.display());
    }
    Ok(art.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
        Err(e) if e.is_config() => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
    }
}
