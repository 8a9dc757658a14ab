//! Coherent CM trajectories under classical fluctuating local fields and their ensemble average,
//! compared against the dephasing channel with `g² = κ δB̄² T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{dephasing_z, ChannelStrengths};
use crate::error::{Error, Result};
use crate::majorana::{validate_cm_with, AntisymmetricMatrix, CovarianceMatrix, RMat};
use crate::spectral::{assemble_quadratic, to_antisymmetric_vector, Superoperator};

/// Gaussian field noise with autocovariance `(δB̄²/√(2π)) exp(-τ²/(2T²))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// `δB̄²`.
    pub variance: f64,
    /// Correlation time `T`.
    pub correlation_time: f64,
    /// Independent fields on every site (otherwise one common field).
    #[serde(default = "default_true")]
    pub independent_sites: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.correlation_time > 0.0) {
            return Err(Error::InvalidParameter(format!("correlation time must be positive, got {}", self.correlation_time)));
        }
        if !(self.variance >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise variance must be non-negative, got {}", self.variance)));
        }
        Ok(())
    }

    /// Zero-lag covariance `δB̄²/√(2π)`.
    pub fn covariance_at_zero(&self) -> f64 {
        self.variance / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// `cov(τ)`.
    pub fn covariance(&self, tau: f64) -> f64 {
        self.covariance_at_zero() * (-0.5 * (tau / self.correlation_time).powi(2)).exp()
    }

    /// Dephasing strength predicted by the Markov limit, `g² = δB̄² T`.
    pub fn markov_g2(&self) -> f64 {
        self.variance * self.correlation_time
    }
}

/// `T · max(4|B|, 8|J|)`, which should stay well below 1 for the Markov limit.
pub fn markov_parameter(spec: &NoiseSpec, b: f64, j: f64) -> f64 {
    spec.correlation_time * (4.0 * b.abs()).max(8.0 * j.abs())
}

/// Kernel half-width in units of `T`; the smoothing kernel `exp(-t²/T²)` is below `e^{-16}` beyond it.
const KERNEL_WIDTH: f64 = 4.0;

/// Stationary Gaussian paths on the grid `t_i = i·ds`, `i < len`, one per site (or one shared path),
/// from white noise convolved with `c exp(-t²/T²)`, `c² = δB̄²/(πT)`.
pub fn sample_noise(spec: &NoiseSpec, n_sites: usize, ds: f64, len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if !(ds > 0.0) || ds > spec.correlation_time / 5.0 {
        return Err(Error::InvalidParameter(format!(
            "noise grid spacing {ds} does not resolve T = {} (need ds ≤ T/5)",
            spec.correlation_time
        )));
    }
    let t = spec.correlation_time;
    let w = (KERNEL_WIDTH * t / ds).ceil() as usize;
    let c = (spec.variance / (std::f64::consts::PI * t)).sqrt();
    let kernel: Vec<f64> = (0..=2 * w)
        .map(|m| {
            let s = (m as f64 - w as f64) * ds;
            c * (-(s / t).powi(2)).exp() * ds.sqrt()
        })
        .collect();
    let paths = if spec.independent_sites { n_sites } else { 1 };
    let mut out = Vec::with_capacity(n_sites);
    for _ in 0..paths {
        let white: Vec<f64> = (0..len + 2 * w).map(|_| StandardNormal.sample(rng)).collect();
        let path: Vec<f64> = (0..len)
            .map(|i| kernel.iter().zip(&white[i..i + 2 * w + 1]).map(|(k, x)| k * x).sum())
            .collect();
        out.push(path);
    }
    while out.len() < n_sites {
        out.push(out[0].clone());
    }
    Ok(out)
}

/// Per-trajectory RNG stream, independent of scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticOptions {
    pub t_end: f64,
    pub dt: f64,
    pub n_traj: usize,
    /// Number of recorded sample intervals.
    pub samples: usize,
    pub bootstrap: usize,
}

impl Default for StochasticOptions {
    fn default() -> Self {
        Self { t_end: 5.0, dt: 0.002, n_traj: 1000, samples: 50, bootstrap: 200 }
    }
}

fn add_fields(h: &RMat, fields: &[f64]) -> RMat {
    let mut out = h.clone();
    for (a, &f) in fields.iter().enumerate() {
        out[(2 * a + 1, 2 * a)] += 2.0 * f;
        out[(2 * a, 2 * a + 1)] -= 2.0 * f;
    }
    out
}

fn commutator(h: &RMat, g: &RMat) -> RMat {
    h * g - g * h
}

/// One coherent trajectory; returns `Γ` at the sample times and the largest purity drift.
fn run_trajectory(h: &RMat, g0: &RMat, noise: &[Vec<f64>], dt: f64, steps: usize, every: usize) -> (Vec<RMat>, f64) {
    let n = noise.len();
    let field = |i: usize| -> Vec<f64> { (0..n).map(|a| noise[a][i]).collect() };
    let gram0 = g0.transpose() * g0;
    let mut g = g0.clone();
    let mut out = vec![g.clone()];
    let mut drift: f64 = 0.0;
    for k in 0..steps {
        let h0 = add_fields(h, &field(2 * k));
        let hm = add_fields(h, &field(2 * k + 1));
        let h1 = add_fields(h, &field(2 * k + 2));
        let k1 = commutator(&h0, &g);
        let k2 = commutator(&hm, &(&g + &k1 * (0.5 * dt)));
        let k3 = commutator(&hm, &(&g + &k2 * (0.5 * dt)));
        let k4 = commutator(&h1, &(&g + &k3 * dt));
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        g = (&g - g.transpose()) * 0.5;
        if (k + 1) % every == 0 {
            drift = drift.max((g.transpose() * &g - &gram0).amax());
            out.push(g.clone());
        }
    }
    (out, drift)
}

/// Worst coordinate at one sample time.
#[derive(Clone, Debug, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    /// Largest `|Γ̄ - Γ_L|` over the independent CM entries.
    pub max_abs_deviation: f64,
    /// Largest `|Γ̄ - Γ_L| / σ` over the independent CM entries.
    pub max_abs_z: f64,
}

/// Ensemble average and its comparison with the dephasing channel.
#[derive(Clone, Debug, Serialize)]
pub struct StochasticResult {
    pub times: Vec<f64>,
    /// `Γ̄(t)` at the sample times.
    #[serde(skip)]
    pub averaged: Vec<RMat>,
    /// Independent CM entries of every trajectory at the sample times after `t = 0`, flattened
    /// sample-major.
    #[serde(skip)]
    pub per_trajectory: Vec<Vec<f64>>,
    pub mean_mag: Vec<f64>,
    /// Bootstrap standard error of the flattened ensemble mean.
    #[serde(skip)]
    pub sigma: Vec<f64>,
    pub markov_g2: f64,
    pub kappa: f64,
    pub kappa_sigma: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub max_abs_z: f64,
    pub within_3_sigma: bool,
    pub max_purity_drift: f64,
    pub average_valid: bool,
}

impl StochasticResult {
    /// Flattened ensemble mean matching [`Self::per_trajectory`].
    pub fn flattened_mean(&self) -> Vec<f64> {
        flatten(&self.averaged[1..])
    }
}

fn mean_magnetization(g: &RMat) -> f64 {
    let n = g.nrows() / 2;
    (0..n).map(|j| g[(2 * j, 2 * j + 1)]).sum::<f64>() / n as f64
}

fn flatten(gs: &[RMat]) -> Vec<f64> {
    gs.iter().flat_map(|g| to_antisymmetric_vector(g).iter().copied().collect::<Vec<_>>()).collect()
}

/// Dephasing-channel CM at the sample times `k·dt_sample`, `k = 0..=samples`.
pub fn lindblad_reference(h: &AntisymmetricMatrix, g0: &RMat, g2: f64, dt_sample: f64, samples: usize) -> Result<Vec<RMat>> {
    let s: Superoperator =
        assemble_quadratic(h, &dephasing_z(h.n_sites(), ChannelStrengths::new(g2.max(0.0).sqrt(), 1.0, 0.0)))?;
    s.exact_trajectory(g0, dt_sample, samples)
}

/// Smallest standard error used as a divisor; entries conserved exactly have zero spread.
const SIGMA_FLOOR: f64 = 1e-12;

fn chi2(h: &AntisymmetricMatrix, g0: &RMat, g2: f64, dt_s: f64, samples: usize, mean: &[f64], sigma: &[f64]) -> Result<f64> {
    let l = flatten(&lindblad_reference(h, g0, g2, dt_s, samples)?[1..]);
    Ok(mean.iter().zip(&l).zip(sigma).map(|((m, x), s)| ((m - x) / s.max(SIGMA_FLOOR)).powi(2)).sum())
}

/// Least-squares `κ` in `g² = κ δB̄² T` by golden-section search on `log κ ∈ [log 0.1, log 10]`,
/// with the curvature estimate `sqrt(2 / χ²'')` as second value.
fn fit_kappa(
    h: &AntisymmetricMatrix,
    g0: &RMat,
    base: f64,
    dt_s: f64,
    samples: usize,
    mean: &[f64],
    sigma: &[f64],
) -> Result<(f64, f64)> {
    let f = |k: f64| chi2(h, g0, k * base, dt_s, samples, mean, sigma);
    let (mut a, mut b) = ((0.1f64).ln(), (10.0f64).ln());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1.exp())?, f(x2.exp())?);
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2.exp())?;
        }
    }
    let k = (0.5 * (a + b)).exp();
    let hstep = 1e-3 * k;
    let curv = (f(k + hstep)? - 2.0 * f(k)? + f(k - hstep)?) / (hstep * hstep);
    let sigma_k = if curv > 0.0 { (2.0 / curv).sqrt() } else { f64::INFINITY };
    Ok((k, sigma_k))
}

/// Number of disjoint batches used for the error of `κ`.
const KAPPA_BATCHES: usize = 10;

/// Standard error of `κ` from independent fits on disjoint trajectory batches. Sample times share
/// trajectories, so the χ² curvature alone would understate it.
fn batch_kappa_error(
    h: &AntisymmetricMatrix,
    g0: &RMat,
    base: f64,
    dt_s: f64,
    samples: usize,
    per_trajectory: &[Vec<f64>],
    sigma: &[f64],
) -> Result<f64> {
    let size = per_trajectory.len() / KAPPA_BATCHES;
    if size < 2 {
        return Ok(f64::INFINITY);
    }
    let scale = (KAPPA_BATCHES as f64).sqrt();
    let batch_sigma: Vec<f64> = sigma.iter().map(|s| s * scale).collect();
    let ks = (0..KAPPA_BATCHES)
        .map(|b| {
            let chunk = &per_trajectory[b * size..(b + 1) * size];
            let mean: Vec<f64> =
                (0..sigma.len()).map(|c| chunk.iter().map(|r| r[c]).sum::<f64>() / size as f64).collect();
            Ok(fit_kappa(h, g0, base, dt_s, samples, &mean, &batch_sigma)?.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let b = ks.len() as f64;
    let m = ks.iter().sum::<f64>() / b;
    let var = ks.iter().map(|k| (k - m).powi(2)).sum::<f64>() / (b - 1.0);
    Ok((var / b).sqrt())
}

/// Bootstrap standard error of the column means of `data[traj][column]`.
pub fn bootstrap_sigma(data: &[Vec<f64>], resamples: usize, seed: u64) -> Vec<f64> {
    let n = data.len();
    let m = data.first().map_or(0, Vec::len);
    if n < 2 || resamples < 2 {
        return vec![f64::INFINITY; m];
    }
    let mut rng = trajectory_rng(seed ^ 0x5eed_b007, u64::MAX);
    let mut sums = vec![0.0; m];
    let mut sq = vec![0.0; m];
    let idx = rand::distr::Uniform::new(0, n).expect("non-empty range");
    let mut acc = vec![0.0; m];
    for _ in 0..resamples {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for _ in 0..n {
            let row = &data[idx.sample(&mut rng)];
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        for k in 0..m {
            let mean = acc[k] / n as f64;
            sums[k] += mean;
            sq[k] += mean * mean;
        }
    }
    let r = resamples as f64;
    (0..m).map(|k| ((sq[k] / r - (sums[k] / r).powi(2)) * r / (r - 1.0)).max(0.0).sqrt()).collect()
}

/// Runs `n_traj` coherent trajectories in parallel, averages them in index order and compares every
/// independent entry of `Γ̄(t)` with the dephasing channel.
pub fn averaged_evolution(
    h: &AntisymmetricMatrix,
    spec: &NoiseSpec,
    gamma0: &CovarianceMatrix,
    opts: &StochasticOptions,
) -> Result<StochasticResult> {
    spec.validate()?;
    if opts.n_traj < 2 {
        return Err(Error::InvalidParameter("need at least two trajectories for error bars".into()));
    }
    if opts.samples == 0 || !(opts.t_end > 0.0) || !(opts.dt > 0.0) {
        return Err(Error::InvalidParameter("t_end, dt and samples must be positive".into()));
    }
    let n = h.n_sites();
    let steps_total = (opts.t_end / opts.dt).round() as usize;
    let every = (steps_total / opts.samples).max(1);
    let steps = every * opts.samples;
    let dt_s = every as f64 * opts.dt;
    let g0 = gamma0.matrix().clone();
    let zero_noise = spec.variance == 0.0;
    let runs: Vec<(Vec<RMat>, f64)> = (0..opts.n_traj)
        .into_par_iter()
        .map(|i| {
            let noise = if zero_noise {
                vec![vec![0.0; 2 * steps + 1]; n]
            } else {
                let mut rng = trajectory_rng(spec.seed, i as u64);
                sample_noise(spec, n, 0.5 * opts.dt, 2 * steps + 1, &mut rng)?
            };
            Ok(run_trajectory(h.matrix(), &g0, &noise, opts.dt, steps, every))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = opts.samples + 1;
    let mut averaged = vec![RMat::zeros(2 * n, 2 * n); m];
    let mut per_trajectory = Vec::with_capacity(opts.n_traj);
    let mut max_purity_drift: f64 = 0.0;
    for (traj, drift) in &runs {
        for (acc, g) in averaged.iter_mut().zip(traj) {
            *acc += g;
        }
        per_trajectory.push(flatten(&traj[1..]));
        max_purity_drift = max_purity_drift.max(*drift);
    }
    drop(runs);
    for a in averaged.iter_mut() {
        *a /= opts.n_traj as f64;
    }
    let average_valid = averaged.iter().all(|g| validate_cm_with(g, 1e-8).valid);
    let mean_mag: Vec<f64> = averaged.iter().map(mean_magnetization).collect();
    let mean = flatten(&averaged[1..]);
    let sigma = bootstrap_sigma(&per_trajectory, opts.bootstrap, spec.seed);
    let times: Vec<f64> = (0..m).map(|k| k as f64 * dt_s).collect();
    let markov_g2 = spec.markov_g2();
    let (kappa, kappa_sigma) = if zero_noise {
        (1.0, 0.0)
    } else {
        let k = fit_kappa(h, &g0, markov_g2, dt_s, opts.samples, &mean, &sigma)?.0;
        (k, batch_kappa_error(h, &g0, markov_g2, dt_s, opts.samples, &per_trajectory, &sigma)?)
    };
    let lind = flatten(&lindblad_reference(h, &g0, kappa * markov_g2, dt_s, opts.samples)?[1..]);
    let na = mean.len() / opts.samples;
    let checkpoints: Vec<Checkpoint> = (0..opts.samples)
        .map(|k| {
            let r = k * na..(k + 1) * na;
            let dev = r.clone().map(|c| (mean[c] - lind[c]).abs()).fold(0.0, f64::max);
            let z = r.map(|c| (mean[c] - lind[c]).abs() / sigma[c].max(SIGMA_FLOOR)).fold(0.0, f64::max);
            Checkpoint { t: times[k + 1], max_abs_deviation: dev, max_abs_z: z }
        })
        .collect();
    let max_abs_z = checkpoints.iter().map(|c| c.max_abs_z).fold(0.0, f64::max);
    Ok(StochasticResult {
        times,
        averaged,
        per_trajectory,
        mean_mag,
        sigma,
        markov_g2,
        kappa,
        kappa_sigma,
        within_3_sigma: max_abs_z <= 3.0,
        checkpoints,
        max_abs_z,
        max_purity_drift,
        average_valid,
    })
}

/// Flattened dephasing-channel reference matching [`StochasticResult::per_trajectory`].
pub fn lindblad_flattened(h: &AntisymmetricMatrix, g0: &RMat, g2: f64, dt_sample: f64, samples: usize) -> Result<Vec<f64>> {
    Ok(flatten(&lindblad_reference(h, g0, g2, dt_sample, samples)?[1..]))
}

/// RMS deviation of the mean over disjoint batches of size `size` from `reference`, averaged over
/// batches and columns.
pub fn batch_deviation(per_trajectory: &[Vec<f64>], reference: &[f64], size: usize) -> f64 {
    let batches = per_trajectory.len() / size;
    let m = reference.len();
    let mut acc = 0.0;
    let mut count = 0usize;
    for b in 0..batches {
        let chunk = &per_trajectory[b * size..(b + 1) * size];
        for k in 0..m {
            let mean = chunk.iter().map(|r| r[k]).sum::<f64>() / size as f64;
            acc += (mean - reference[k]).powi(2);
            count += 1;
        }
    }
    (acc / count.max(1) as f64).sqrt()
}

/// Log-log slope of [`batch_deviation`] over the given batch sizes.
pub fn deviation_scaling(per_trajectory: &[Vec<f64>], reference: &[f64], sizes: &[usize]) -> (f64, Vec<f64>) {
    let dev: Vec<f64> = sizes.iter().map(|&s| batch_deviation(per_trajectory, reference, s)).collect();
    let x: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let y: Vec<f64> = dev.iter().map(|d| d.ln()).collect();
    let xm = x.iter().sum::<f64>() / x.len() as f64;
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    (sxy / sxx, dev)
}

/// Empirical mean, zero-lag and lag-`T` autocovariance and cross-site covariance with standard errors,
/// pooled over `paths` independent realisations.
#[derive(Clone, Debug, Serialize)]
pub struct NoiseStatistics {
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub lag_t: f64,
    pub lag_t_se: f64,
    pub cross: f64,
    pub cross_se: f64,
}

fn mean_and_error(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Samples `paths` two-site realisations and takes one value per realisation (well separated from
/// the next), so the pooled samples are independent.
pub fn noise_statistics(spec: &NoiseSpec, ds: f64, paths: usize) -> Result<NoiseStatistics> {
    let lag = (spec.correlation_time / ds).round() as usize;
    let len = lag + 1;
    let (mut m, mut v, mut l, mut c) = (vec![], vec![], vec![], vec![]);
    for p in 0..paths {
        let mut rng = trajectory_rng(spec.seed, p as u64);
        let x = sample_noise(spec, 2, ds, len, &mut rng)?;
        m.push(x[0][0]);
        v.push(x[0][0] * x[0][0]);
        l.push(x[0][0] * x[0][lag]);
        c.push(x[0][0] * x[1][0]);
    }
    let (mean, mean_se) = mean_and_error(&m);
    let (var, var_se) = mean_and_error(&v);
    let (lag_t, lag_t_se) = mean_and_error(&l);
    let (cross, cross_se) = mean_and_error(&c);
    Ok(NoiseStatistics { mean, mean_se, var, var_se, lag_t, lag_t_se, cross, cross_se })
}
