//! Task execution behind the command-line front end. Every task returns an [`Artifact`]; writing
//! it produces the data file plus a `<stem>.meta.json` sidecar with the full configuration and the
//! crate version.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytics::{
    adr_weak_coupling_sum, pairing_matrix, particle_number_sum, poles, two_lowest_rates, xy_adr_closed_form,
    xy_particle_number_closed_form,
};
use crate::channels::{Channel, ChannelStrengths, Preset};
use crate::config::{Format, InitialState, ModelConfig, RunConfig, SweepMethod, Task};
use crate::ed::oracle_compare;
use crate::error::{Error, Result};
use crate::evolution::{evolve, fit_decay_rate, fmt_num, max_step, reference_state, Backend, EvolveOptions, Observable};
use crate::majorana::{random_antisymmetric, random_pure_cm, AntisymmetricMatrix, CovarianceMatrix};
use crate::models::{from_blocks, xy_chain, xy_momentum, TiBlockSpec, XyParams};
use crate::momentum::{ground_state_cm, to_momentum};
use crate::spectral::{assemble, hamiltonian_kernel_dimension, spectrum, steady_state_linear};
use crate::stochastic::{averaged_evolution, lindblad_reference, markov_parameter, NoiseSpec, StochasticOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output of one task.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub task: Task,
    /// File body (CSV or JSON).
    pub body: String,
    pub format: Format,
    /// Task-specific record stored in the sidecar.
    pub summary: Value,
    /// Set when the task completed but its checks failed; reported after writing.
    pub failure: Option<String>,
}

/// Resolves the Hamiltonian for one field value.
pub fn hamiltonian(cfg: &RunConfig, b: f64) -> Result<AntisymmetricMatrix> {
    match &cfg.model {
        ModelConfig::Xy { n, j, gamma } => xy_chain(&XyParams::new(*n, *j, *gamma, b)),
        ModelConfig::Blocks { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                path: "model.path".into(),
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            from_blocks(&TiBlockSpec::from_json(&text)?)
        }
    }
}

fn channel(cfg: &RunConfig, n: usize) -> Result<Channel> {
    cfg.channel.preset.build(n, cfg.channel.strengths())
}

fn initial_state(kind: InitialState, h: &AntisymmetricMatrix, seed: u64) -> Result<CovarianceMatrix> {
    let n = h.n_sites();
    Ok(match kind {
        InitialState::GroundState => ground_state_cm(&to_momentum(h, 1e-10)?)?,
        InitialState::Vacuum => CovarianceMatrix::vacuum(n),
        InitialState::MaximallyMixed => CovarianceMatrix::maximally_mixed(n),
        InitialState::RandomPure => random_pure_cm(n, &mut ChaCha8Rng::seed_from_u64(seed)),
    })
}

fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn csv_field(t: &str) -> String {
    if t.contains([',', '"', '\n']) {
        format!("\"{}\"", t.replace('"', "\"\""))
    } else {
        t.to_string()
    }
}

fn table(cfg: &RunConfig, header: &[&str], rows: &[Vec<f64>]) -> String {
    match cfg.output.format {
        Format::Csv => csv(header, rows),
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| Value::Object(header.iter().zip(r).map(|(k, v)| (k.to_string(), num(*v))).collect()))
                .collect();
            serde_json::to_string_pretty(&objs).expect("rows serialize")
        }
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("record serializes")
}

/// Runs the configured task.
pub fn execute(cfg: &RunConfig) -> Result<Artifact> {
    let task = cfg.validate()?;
    let (body, summary, failure) = match task {
        Task::Spectrum => task_spectrum(cfg)?,
        Task::Steady => task_steady(cfg)?,
        Task::Evolve => task_evolve(cfg)?,
        Task::SweepAdr => task_sweep(cfg)?,
        Task::Oracle => task_oracle(cfg)?,
        Task::Stochastic => task_stochastic(cfg)?,
        Task::Analytics => task_analytics(cfg)?,
    };
    Ok(Artifact { task, body, format: cfg.output.format, summary, failure })
}

type TaskOutput = (String, Value, Option<String>);

fn task_spectrum(cfg: &RunConfig) -> Result<TaskOutput> {
    let fields = cfg.field.values();
    let results = fields
        .par_iter()
        .map(|&b| {
            let h = hamiltonian(cfg, b)?;
            let s = assemble(&h, &channel(cfg, h.n_sites())?)?;
            let sp = spectrum(&s, &cfg.tolerances)?;
            let kernel = hamiltonian_kernel_dimension(h.matrix(), cfg.tolerances.spectral)?;
            Ok((b, sp, kernel))
        })
        .collect::<Result<Vec<_>>>()?;
    let header = ["B", "adr", "zero_cluster", "non_decaying", "adr_cluster", "max_real_part", "hamiltonian_kernel"];
    let rows: Vec<Vec<f64>> = results
        .iter()
        .map(|(b, sp, k)| {
            vec![*b, sp.adr, sp.zero_cluster as f64, sp.non_decaying as f64, sp.adr_cluster as f64, sp.max_real_part, *k as f64]
        })
        .collect();
    let body = match cfg.output.format {
        Format::Csv => csv(&header, &rows),
        Format::Json => serde_json::to_string_pretty(
            &results
                .iter()
                .map(|(b, sp, k)| json!({"B": b, "spectrum": to_value(sp), "hamiltonian_kernel": k}))
                .collect::<Vec<_>>(),
        )
        .expect("spectrum serializes"),
    };
    let summary = json!({
        "points": rows.len(),
        "min_adr": rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min),
        "max_zero_cluster": results.iter().map(|r| r.1.zero_cluster).max(),
        "max_hamiltonian_kernel": results.iter().map(|r| r.2).max(),
    });
    Ok((body, summary, None))
}

fn task_steady(cfg: &RunConfig) -> Result<TaskOutput> {
    let fields = cfg.field.values();
    let results = fields
        .par_iter()
        .map(|&b| {
            let h = hamiltonian(cfg, b)?;
            let n = h.n_sites();
            let s = assemble(&h, &channel(cfg, n)?)?;
            let ss = steady_state_linear(&s, &cfg.tolerances)?;
            let pol = (0..n).map(|j| ss.site_polarization(j)).sum::<f64>() / n as f64;
            let q = pairing_matrix(&ss);
            let qmax = q.iter().map(|z: &Complex64| z.norm()).fold(0.0, f64::max);
            Ok((b, pol, qmax, ss))
        })
        .collect::<Result<Vec<_>>>()?;
    let header = ["B", "polarization", "occupation", "max_abs_pairing"];
    let rows: Vec<Vec<f64>> = results.iter().map(|(b, p, q, _)| vec![*b, *p, 0.5 * (1.0 - p), *q]).collect();
    let body = match cfg.output.format {
        Format::Csv => csv(&header, &rows),
        Format::Json => serde_json::to_string_pretty(
            &results
                .iter()
                .map(|(b, p, q, ss)| {
                    let m = ss.matrix();
                    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
                    json!({"B": b, "polarization": p, "occupation": 0.5 * (1.0 - p), "max_abs_pairing": q, "covariance": rows})
                })
                .collect::<Vec<_>>(),
        )
        .expect("steady states serialize"),
    };
    Ok((body, json!({"points": rows.len()}), None))
}

fn task_evolve(cfg: &RunConfig) -> Result<TaskOutput> {
    let b = cfg.field.values()[0];
    let h = hamiltonian(cfg, b)?;
    let s = assemble(&h, &channel(cfg, h.n_sites())?)?;
    let g0 = initial_state(cfg.evolve.initial, &h, cfg.seed)?;
    let dt = cfg.evolve.dt.unwrap_or_else(|| max_step(&s));
    let steps = (cfg.evolve.t_end / dt).round().max(1.0) as usize;
    let every = (steps / cfg.evolve.samples).max(1);
    let opts = EvolveOptions { t_end: cfg.evolve.t_end, dt, sample_every: every, backend: cfg.evolve.backend };
    let reference = reference_state(&s, &cfg.tolerances)?;
    let traj = evolve(&g0, &s, &reference, &opts)?;
    let n = h.n_sites() as f64;
    let asymptote = (0..h.n_sites()).map(|j| reference[(2 * j, 2 * j + 1)]).sum::<f64>() / n;
    let fit = match fit_decay_rate(&traj, Observable::MeanMagnetization, asymptote) {
        Ok(f) => to_value(&f),
        Err(e) => json!({"error": e.to_string()}),
    };
    let body = match cfg.output.format {
        Format::Csv => traj.to_csv(),
        Format::Json => serde_json::to_string_pretty(&traj).expect("trajectory serializes"),
    };
    let summary = json!({
        "dt": dt,
        "sample_every": every,
        "backend": match cfg.evolve.backend { Backend::Direct => "direct", Backend::Propagator => "propagator" },
        "max_antisymmetry_defect": traj.max_antisymmetry_defect,
        "max_cm_norm": traj.max_cm_norm,
        "magnetization_fit": fit,
    });
    Ok((body, summary, None))
}

fn method_name(m: SweepMethod) -> &'static str {
    match m {
        SweepMethod::Analytic => "analytic",
        SweepMethod::MomentumSum => "momentum-sum",
        SweepMethod::Dense => "dense",
    }
}

fn task_sweep(cfg: &RunConfig) -> Result<TaskOutput> {
    if cfg.channel.preset != Preset::DephasingZ {
        return Err(Error::Config { path: "channel.preset".into(), message: "sweep-adr uses dephasing-z".into() });
    }
    let ModelConfig::Xy { n, j, .. } = cfg.model else { unreachable!("validated") };
    let g = cfg.channel.g * cfg.channel.mu.abs();
    let mut grid = Vec::new();
    for &m in &cfg.sweep.methods {
        for &gamma in &cfg.sweep.gammas {
            for b in cfg.field.values() {
                grid.push(((), m, gamma, b));
            }
        }
    }
    let values = grid
        .par_iter()
        .map(|&((), m, gamma, b)| -> Result<f64> {
            let p = XyParams::new(n, j, gamma, b);
            Ok(match m {
                SweepMethod::Analytic => xy_adr_closed_form(gamma, b, j, g),
                SweepMethod::MomentumSum => match adr_weak_coupling_sum(&xy_momentum(&p)?, g) {
                    Ok(v) => v,
                    Err(Error::DegenerateMode { .. }) => f64::NAN,
                    Err(e) => return Err(e),
                },
                SweepMethod::Dense => {
                    let h = xy_chain(&p)?;
                    let s = assemble(&h, &Preset::DephasingZ.build(n, ChannelStrengths::new(g, 1.0, 0.0))?)?;
                    spectrum(&s, &cfg.tolerances)?.adr
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let body = match cfg.output.format {
        Format::Csv => {
            let mut out = String::from("method,gamma,B,adr,adr_over_g2\n");
            for (&(_, m, gamma, b), &v) in grid.iter().zip(&values) {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    method_name(m),
                    fmt_num(gamma),
                    fmt_num(b),
                    fmt_num(v),
                    fmt_num(v / (g * g))
                ));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(
            &grid
                .iter()
                .zip(&values)
                .map(|(&(_, m, gamma, b), &v)| {
                    json!({"method": method_name(m), "gamma": gamma, "B": b, "adr": num(v), "adr_over_g2": num(v / (g * g))})
                })
                .collect::<Vec<_>>(),
        )
        .expect("sweep serializes"),
    };
    let skipped = values.iter().filter(|v| v.is_nan()).count();
    let summary = json!({
        "g": g,
        "points": values.len(),
        "critical_points_skipped": skipped,
    });
    Ok((body, summary, None))
}

fn task_oracle(cfg: &RunConfig) -> Result<TaskOutput> {
    let b = cfg.field.values()[0];
    let h = hamiltonian(cfg, b)?;
    let n = h.n_sites();
    let c = channel(cfg, n)?;
    let initial = random_antisymmetric(n, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let report = oracle_compare(&h, &c, &initial, &cfg.oracle)?;
    let body = match cfg.output.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
        Format::Csv => {
            let v = to_value(&report);
            let mut out = String::from("key,value\n");
            if let Value::Object(map) = v {
                for (k, val) in map {
                    let text = match val {
                        Value::Number(x) if x.is_f64() => fmt_num(x.as_f64().unwrap_or(f64::NAN)),
                        Value::Number(x) => x.to_string(),
                        Value::Null => "nan".into(),
                        Value::String(t) => csv_field(&t),
                        other => csv_field(&other.to_string()),
                    };
                    out.push_str(&format!("{k},{text}\n"));
                }
            }
            out
        }
    };
    let failure = (!report.passed).then(|| format!("oracle mismatch: {}", report.mismatches.join("; ")));
    Ok((body, to_value(&report), failure))
}

fn task_stochastic(cfg: &RunConfig) -> Result<TaskOutput> {
    let b = cfg.field.values()[0];
    let h = hamiltonian(cfg, b)?;
    let sc = &cfg.stochastic;
    let spec = NoiseSpec {
        variance: sc.variance,
        correlation_time: sc.correlation_time,
        independent_sites: sc.independent_sites,
        seed: cfg.seed,
    };
    let g0 = initial_state(sc.initial, &h, cfg.seed)?;
    let opts = StochasticOptions { t_end: sc.t_end, dt: sc.dt, n_traj: sc.n_traj, samples: sc.samples, bootstrap: sc.bootstrap };
    let r = averaged_evolution(&h, &spec, &g0, &opts)?;
    let dt_s = r.times.get(1).copied().unwrap_or(0.0);
    let fitted = lindblad_reference(&h, g0.matrix(), r.kappa * r.markov_g2, dt_s, sc.samples)?;
    let markov = lindblad_reference(&h, g0.matrix(), r.markov_g2, dt_s, sc.samples)?;
    let mag = |g: &crate::majorana::RMat| {
        let n = g.nrows() / 2;
        (0..n).map(|j| g[(2 * j, 2 * j + 1)]).sum::<f64>() / n as f64
    };
    let dev = |a: &crate::majorana::RMat, b: &crate::majorana::RMat| (a - b).amax();
    let header = ["t", "mean_mag", "mean_mag_lindblad_fitted", "mean_mag_lindblad_markov", "max_abs_dev_fitted", "max_abs_dev_markov"];
    let rows: Vec<Vec<f64>> = (0..r.times.len())
        .map(|k| {
            vec![
                r.times[k],
                r.mean_mag[k],
                mag(&fitted[k]),
                mag(&markov[k]),
                dev(&r.averaged[k], &fitted[k]),
                dev(&r.averaged[k], &markov[k]),
            ]
        })
        .collect();
    let body = table(cfg, &header, &rows);
    let (jv, gamma_xy) = match cfg.model {
        ModelConfig::Xy { j, gamma, .. } => (j, Some(gamma)),
        ModelConfig::Blocks { .. } => (1.0, None),
    };
    let summary = json!({
        "comparison": to_value(&r),
        "markov_parameter": markov_parameter(&spec, b, jv),
        "gamma": gamma_xy,
    });
    Ok((body, summary, None))
}

fn task_analytics(cfg: &RunConfig) -> Result<TaskOutput> {
    let ModelConfig::Xy { n, j, gamma } = cfg.model else { unreachable!("validated") };
    let (g, mu, nu) = (cfg.channel.g, cfg.channel.mu, cfg.channel.nu);
    let fields = cfg.field.values();
    let rows = fields
        .par_iter()
        .map(|&b| -> Result<Vec<f64>> {
            let blocks = xy_momentum(&XyParams::new(n, j, gamma, b))?;
            let nan_on_critical = |r: Result<f64>| match r {
                Ok(v) => Ok(v),
                Err(Error::DegenerateMode { .. }) => Ok(f64::NAN),
                Err(e) => Err(e),
            };
            let adr_sum = nan_on_critical(adr_weak_coupling_sum(&blocks, g))?;
            let pn_sum = nan_on_critical(particle_number_sum(&blocks, mu, nu))?;
            let (dp, dm) = match two_lowest_rates(&blocks, g, mu, nu) {
                Ok(v) => v,
                Err(Error::DegenerateMode { .. }) => (f64::NAN, f64::NAN),
                Err(e) => return Err(e),
            };
            let (zp, zm) = match poles(b, j, gamma) {
                Ok(p) => (p.plus.z.norm(), p.minus.z.norm()),
                Err(_) => (f64::NAN, f64::NAN),
            };
            Ok(vec![
                b,
                xy_adr_closed_form(gamma, b, j, g),
                adr_sum,
                xy_particle_number_closed_form(gamma, b, j, mu, nu),
                pn_sum,
                dm,
                dp,
                zp,
                zm,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let header = [
        "B",
        "adr_closed_form",
        "adr_momentum_sum",
        "polarization_closed_form",
        "polarization_momentum_sum",
        "rate_lower",
        "rate_upper",
        "abs_z_plus",
        "abs_z_minus",
    ];
    let body = table(cfg, &header, &rows);
    Ok((body, json!({"points": rows.len(), "n": n, "g": g, "mu": mu, "nu": nu}), None))
}

/// Writes the data file and the sidecar; returns their paths.
pub fn write_outputs(cfg: &RunConfig, art: &Artifact) -> Result<Vec<PathBuf>> {
    let stem = &cfg.output.path;
    if let Some(dir) = stem.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let ext = match art.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let data = with_suffix(stem, ext);
    let meta = with_suffix(stem, "meta.json");
    std::fs::write(&data, &art.body)?;
    let sidecar = json!({
        "task": art.task.name(),
        "version": VERSION,
        "config": to_value(cfg),
        "data_file": data.file_name().map(|s| s.to_string_lossy().to_string()),
        "summary": art.summary,
        "failure": art.failure,
    });
    std::fs::write(&meta, serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"))?;
    Ok(vec![data, meta])
}

fn with_suffix(stem: &std::path::Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
