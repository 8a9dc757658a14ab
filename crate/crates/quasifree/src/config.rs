//! Run configuration: a JSON document validated field by field, with command-line overrides applied
//! on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelStrengths, Preset};
use crate::ed::OracleOptions;
use crate::error::{Error, Result};
use crate::evolution::Backend;
use crate::tolerance::Tolerances;

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "QUASIFREE_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Steady,
    Evolve,
    SweepAdr,
    Oracle,
    Stochastic,
    Analytics,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Steady => "steady",
            Task::Evolve => "evolve",
            Task::SweepAdr => "sweep-adr",
            Task::Oracle => "oracle",
            Task::Stochastic => "stochastic",
            Task::Analytics => "analytics",
        }
    }
}

/// Hamiltonian source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// XY chain; the field comes from [`RunConfig::field`].
    Xy {
        n: usize,
        #[serde(default = "one")]
        j: f64,
        #[serde(default = "one")]
        gamma: f64,
    },
    /// Translationally invariant site blocks read from a JSON file.
    Blocks { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Xy { n: 10, j: 1.0, gamma: 1.0 }
    }
}

/// Scalar field value or an inclusive linear range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldRange {
    Scalar(f64),
    Range { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl Default for FieldRange {
    fn default() -> Self {
        FieldRange::Scalar(1.0)
    }
}

impl FieldRange {
    pub fn values(&self) -> Vec<f64> {
        match self {
            FieldRange::Scalar(b) => vec![*b],
            FieldRange::List(v) => v.clone(),
            FieldRange::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                c => (0..*c).map(|k| start + (stop - start) * k as f64 / (*c - 1) as f64).collect(),
            },
        }
    }

    /// Parses `x` or `start:stop:count`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config { path: "field".into(), message: format!("{m}: `{text}`") };
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(FieldRange::Scalar(x.trim().parse().map_err(|_| bad("not a number"))?)),
            [a, b, c] => Ok(FieldRange::Range {
                start: a.trim().parse().map_err(|_| bad("bad range start"))?,
                stop: b.trim().parse().map_err(|_| bad("bad range stop"))?,
                count: c.trim().parse().map_err(|_| bad("bad range count"))?,
            }),
            _ => Err(bad("expected `x` or `start:stop:count`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub preset: Preset,
    pub g: f64,
    pub mu: f64,
    pub nu: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { preset: Preset::DephasingZ, g: 0.1, mu: 1.0, nu: 0.0 }
    }
}

impl ChannelConfig {
    pub fn strengths(&self) -> ChannelStrengths {
        ChannelStrengths::new(self.g, self.mu, self.nu)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    GroundState,
    Vacuum,
    MaximallyMixed,
    RandomPure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_end: f64,
    /// Step; `null` selects the largest admissible step.
    pub dt: Option<f64>,
    pub samples: usize,
    pub backend: Backend,
    pub initial: InitialState,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { t_end: 100.0, dt: None, samples: 1000, backend: Backend::Direct, initial: InitialState::GroundState }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StochasticConfig {
    pub variance: f64,
    pub correlation_time: f64,
    pub independent_sites: bool,
    pub n_traj: usize,
    pub t_end: f64,
    pub dt: f64,
    pub samples: usize,
    pub bootstrap: usize,
    pub initial: InitialState,
}

impl Default for StochasticConfig {
    fn default() -> Self {
        Self {
            variance: 10.0,
            correlation_time: 0.01,
            independent_sites: true,
            n_traj: 1000,
            t_end: 5.0,
            dt: 0.002,
            samples: 10,
            bootstrap: 200,
            initial: InitialState::RandomPure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethod {
    /// Thermodynamic-limit closed form.
    Analytic,
    /// Finite-N weak-coupling momentum sum.
    MomentumSum,
    /// Dense superoperator spectrum.
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub methods: Vec<SweepMethod>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { gammas: vec![0.1, 0.5, 1.0], methods: vec![SweepMethod::Analytic] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem; the extension follows the format and the sidecar is `<stem>.meta.json`.
    pub path: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { path: PathBuf::from("quasifree-out"), format: Format::Csv }
    }
}

/// Complete description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub model: ModelConfig,
    pub field: FieldRange,
    pub channel: ChannelConfig,
    pub evolve: EvolveConfig,
    pub stochastic: StochasticConfig,
    pub sweep: SweepConfig,
    pub oracle: OracleOptions,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: None,
            model: ModelConfig::default(),
            field: FieldRange::default(),
            channel: ChannelConfig::default(),
            evolve: EvolveConfig::default(),
            stochastic: StochasticConfig::default(),
            sweep: SweepConfig::default(),
            oracle: OracleOptions::default(),
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
            seed: 0,
        }
    }
}

fn cfg_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(path, format!("must be positive and finite, got {x}")))
    }
}

fn finite(path: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(path, format!("must be finite, got {x}")))
    }
}

impl RunConfig {
    /// Parses JSON; unknown fields and type errors are reported with their path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| cfg_err(&e.path().to_string(), e.inner().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn n_sites(&self) -> Option<usize> {
        match &self.model {
            ModelConfig::Xy { n, .. } => Some(*n),
            ModelConfig::Blocks { .. } => None,
        }
    }

    /// Task-independent and task-specific checks.
    pub fn validate(&self) -> Result<Task> {
        let task = self.task.ok_or_else(|| cfg_err("task", "missing"))?;
        match &self.model {
            ModelConfig::Xy { n, j, gamma } => {
                if *n < 2 {
                    return Err(cfg_err("model.n", format!("need N >= 2, got {n}")));
                }
                finite("model.j", *j)?;
                finite("model.gamma", *gamma)?;
            }
            ModelConfig::Blocks { path } => {
                if path.as_os_str().is_empty() {
                    return Err(cfg_err("model.path", "empty path"));
                }
            }
        }
        let fields = self.field.values();
        if fields.is_empty() {
            return Err(cfg_err("field", "empty sweep range"));
        }
        if let FieldRange::Range { start, stop, .. } = self.field {
            finite("field.start", start)?;
            finite("field.stop", stop)?;
        }
        for (k, b) in fields.iter().enumerate() {
            finite(&format!("field[{k}]"), *b)?;
        }
        if !(self.channel.g >= 0.0) || !self.channel.g.is_finite() {
            return Err(cfg_err("channel.g", format!("must be non-negative, got {}", self.channel.g)));
        }
        finite("channel.mu", self.channel.mu)?;
        finite("channel.nu", self.channel.nu)?;
        let single_field = |task: &str| {
            if fields.len() != 1 {
                Err(cfg_err("field", format!("{task} needs a single field value")))
            } else {
                Ok(())
            }
        };
        match task {
            Task::Spectrum => {}
            Task::Steady => {
                if !self.channel.preset.is_linear() {
                    return Err(cfg_err("channel.preset", "steady needs a linear channel (loss-gain or paired)"));
                }
            }
            Task::Evolve => {
                single_field("evolve")?;
                positive("evolve.t_end", self.evolve.t_end)?;
                if let Some(dt) = self.evolve.dt {
                    positive("evolve.dt", dt)?;
                }
                if self.evolve.samples == 0 {
                    return Err(cfg_err("evolve.samples", "must be positive"));
                }
            }
            Task::SweepAdr => {
                if self.sweep.gammas.is_empty() {
                    return Err(cfg_err("sweep.gammas", "empty"));
                }
                if self.sweep.methods.is_empty() {
                    return Err(cfg_err("sweep.methods", "empty"));
                }
                if !matches!(self.model, ModelConfig::Xy { .. }) {
                    return Err(cfg_err("model", "sweep-adr needs the xy model"));
                }
            }
            Task::Oracle => {
                single_field("oracle")?;
                match self.n_sites() {
                    Some(n) if n <= crate::ed::MAX_SITES => {}
                    Some(n) => return Err(cfg_err("model.n", format!("oracle supports N <= {}, got {n}", crate::ed::MAX_SITES))),
                    None => {}
                }
                positive("oracle.t_end", self.oracle.t_end)?;
            }
            Task::Stochastic => {
                single_field("stochastic")?;
                let s = &self.stochastic;
                positive("stochastic.correlation_time", s.correlation_time)?;
                positive("stochastic.t_end", s.t_end)?;
                positive("stochastic.dt", s.dt)?;
                if !(s.variance >= 0.0) {
                    return Err(cfg_err("stochastic.variance", "must be non-negative"));
                }
                if s.n_traj < 2 {
                    return Err(cfg_err("stochastic.n_traj", "need at least two trajectories"));
                }
                if s.samples == 0 {
                    return Err(cfg_err("stochastic.samples", "must be positive"));
                }
                if 0.5 * s.dt > s.correlation_time / 5.0 {
                    return Err(cfg_err("stochastic.dt", "half step must resolve the correlation time (dt ≤ 2T/5)"));
                }
            }
            Task::Analytics => {
                if !matches!(self.model, ModelConfig::Xy { .. }) {
                    return Err(cfg_err("model", "analytics needs the xy model"));
                }
            }
        }
        Ok(task)
    }
}

/// Command-line values that replace configuration entries when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub j: Option<f64>,
    pub gamma: Option<f64>,
    pub field: Option<String>,
    pub preset: Option<Preset>,
    pub g: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub n_traj: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if self.n.is_some() || self.j.is_some() || self.gamma.is_some() {
            match &mut cfg.model {
                ModelConfig::Xy { n, j, gamma } => {
                    if let Some(v) = self.n {
                        *n = v;
                    }
                    if let Some(v) = self.j {
                        *j = v;
                    }
                    if let Some(v) = self.gamma {
                        *gamma = v;
                    }
                }
                ModelConfig::Blocks { .. } => {
                    return Err(cfg_err("model", "--n/--j/--gamma only apply to the xy model"));
                }
            }
        }
        if let Some(f) = &self.field {
            cfg.field = FieldRange::parse(f)?;
        }
        if let Some(p) = self.preset {
            cfg.channel.preset = p;
        }
        if let Some(v) = self.g {
            cfg.channel.g = v;
        }
        if let Some(v) = self.mu {
            cfg.channel.mu = v;
        }
        if let Some(v) = self.nu {
            cfg.channel.nu = v;
        }
        if let Some(v) = self.t_end {
            cfg.evolve.t_end = v;
            cfg.stochastic.t_end = v;
            cfg.oracle.t_end = v;
        }
        if let Some(v) = self.dt {
            cfg.evolve.dt = Some(v);
            cfg.stochastic.dt = v;
        }
        if let Some(v) = self.n_traj {
            cfg.stochastic.n_traj = v;
        }
        if let Some(v) = &self.output {
            cfg.output.path = v.clone();
        }
        if let Some(v) = self.format {
            cfg.output.format = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        Ok(())
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .map(Some)
            .ok_or_else(|| cfg_err(WORKERS_ENV, format!("expected a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}
