//! Fixed-step RK4 integration of the CM master equation and late-time decay-rate fits.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorana::{CovarianceMatrix, RMat};
use crate::spectral::{
    antisymmetric_dim, from_antisymmetric_vector, spectral_norm, to_antisymmetric_vector, Superoperator,
};

/// Largest admissible `dt (‖H‖₂ + rate scale)`.
pub const STEP_BOUND: f64 = 0.1;
/// Antisymmetry defect tolerated before re-projection.
pub const ANTISYMMETRY_DEFECT: f64 = 1e-12;
/// Violation of `‖Γ‖₂ ≤ 1` that signals instability.
pub const CM_BOUND_SLACK: f64 = 1e-6;

/// Sampled observables along a trajectory.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `sites[k][j] = Γ_{jj,01}` at `times[k]`.
    pub sites: Vec<Vec<f64>>,
    pub mean_mag: Vec<f64>,
    /// `‖Γ(t) - Γ_ss‖_F`.
    pub dist_ss: Vec<f64>,
    /// Largest antisymmetry defect seen before re-projection.
    pub max_antisymmetry_defect: f64,
    /// Largest `‖Γ‖₂` seen at sample points.
    pub max_cm_norm: f64,
}

impl Trajectory {
    fn push(&mut self, t: f64, g: &RMat, reference: &RMat) {
        let n = g.nrows() / 2;
        let sites: Vec<f64> = (0..n).map(|j| g[(2 * j, 2 * j + 1)]).collect();
        self.mean_mag.push(sites.iter().sum::<f64>() / n as f64);
        self.sites.push(sites);
        self.dist_ss.push((g - reference).norm());
        self.times.push(t);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.sites.first().map_or(0, Vec::len)
    }

    pub fn observable(&self, sel: Observable) -> Result<Vec<f64>> {
        match sel {
            Observable::MeanMagnetization => Ok(self.mean_mag.clone()),
            Observable::DistanceToSteady => Ok(self.dist_ss.clone()),
            Observable::Site(j) if j < self.n_sites() => Ok(self.sites.iter().map(|s| s[j]).collect()),
            Observable::Site(j) => Err(Error::InvalidParameter(format!("site {j} out of range"))),
        }
    }

    /// Trajectory CSV with header `t,site_0,...,site_{N-1},mean_mag,dist_ss`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for j in 0..self.n_sites() {
            out.push_str(&format!(",site_{j}"));
        }
        out.push_str(",mean_mag,dist_ss\n");
        for k in 0..self.len() {
            out.push_str(&fmt_num(self.times[k]));
            for v in &self.sites[k] {
                out.push(',');
                out.push_str(&fmt_num(*v));
            }
            out.push(',');
            out.push_str(&fmt_num(self.mean_mag[k]));
            out.push(',');
            out.push_str(&fmt_num(self.dist_ss[k]));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, locale-free.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Observable selector for [`fit_decay_rate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    MeanMagnetization,
    Site(usize),
    DistanceToSteady,
}

/// How the propagation is carried out. Both apply the same RK4 step map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Matrix-level RK4 steps with sparse channel action.
    #[default]
    Direct,
    /// RK4 one-step map assembled on the antisymmetric subspace and raised to the sampling stride.
    Propagator,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Record every `sample_every` steps.
    pub sample_every: usize,
    pub backend: Backend,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { t_end: 10.0, dt: 1e-3, sample_every: 10, backend: Backend::Direct }
    }
}

/// Largest step allowed by `dt (‖H‖₂ + rate scale) ≤ 0.1`.
pub fn max_step(s: &Superoperator) -> f64 {
    STEP_BOUND / (s.hamiltonian_norm() + s.rate_scale()).max(1e-300)
}

fn rk4_step(s: &Superoperator, g: &RMat, dt: f64) -> RMat {
    let k1 = s.rhs(g);
    let k2 = s.rhs(&(g + &k1 * (0.5 * dt)));
    let k3 = s.rhs(&(g + &k2 * (0.5 * dt)));
    let k4 = s.rhs(&(g + &k3 * dt));
    g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn antisymmetry_defect(g: &RMat) -> f64 {
    (g + g.transpose()).amax() * 0.5
}

fn check_bound(traj: &mut Trajectory, g: &RMat, t: f64) -> Result<()> {
    let nrm = spectral_norm(g);
    traj.max_cm_norm = traj.max_cm_norm.max(nrm);
    if !nrm.is_finite() || nrm > 1.0 + CM_BOUND_SLACK {
        return Err(Error::Unstable(t));
    }
    Ok(())
}

/// Steady-state reference for `dist_ss`: the unique fixed point for linear channels, `0` otherwise.
pub fn reference_state(s: &Superoperator, tol: &crate::Tolerances) -> Result<RMat> {
    match s.kind() {
        crate::spectral::SuperoperatorKind::Linear => {
            Ok(crate::spectral::steady_state_linear(s, tol)?.matrix().clone())
        }
        _ => Ok(RMat::zeros(s.dim(), s.dim())),
    }
}

/// Integrates `∂_t Γ = 𝒮(Γ) + D` from `Γ₀` with classic RK4.
pub fn evolve(gamma0: &CovarianceMatrix, s: &Superoperator, reference: &RMat, opts: &EvolveOptions) -> Result<Trajectory> {
    let bound = max_step(s);
    if !(opts.dt > 0.0) || opts.dt > bound * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt: opts.dt, bound });
    }
    if gamma0.matrix().nrows() != s.dim() || reference.nrows() != s.dim() {
        return Err(Error::Dimension("initial state does not match the superoperator".into()));
    }
    if !(opts.t_end > 0.0) || opts.sample_every == 0 {
        return Err(Error::InvalidParameter("t_end must be positive and sample_every nonzero".into()));
    }
    let steps = (opts.t_end / opts.dt).round() as usize;
    match opts.backend {
        Backend::Direct => evolve_direct(gamma0.matrix(), s, reference, opts.dt, steps, opts.sample_every),
        Backend::Propagator => evolve_propagator(gamma0.matrix(), s, reference, opts.dt, steps, opts.sample_every),
    }
}

fn evolve_direct(g0: &RMat, s: &Superoperator, reference: &RMat, dt: f64, steps: usize, every: usize) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    let mut g = g0.clone();
    traj.push(0.0, &g, reference);
    check_bound(&mut traj, &g, 0.0)?;
    for k in 1..=steps {
        let next = rk4_step(s, &g, dt);
        let defect = antisymmetry_defect(&next);
        traj.max_antisymmetry_defect = traj.max_antisymmetry_defect.max(defect);
        g = (&next - next.transpose()) * 0.5;
        if k % every == 0 || k == steps {
            let t = k as f64 * dt;
            check_bound(&mut traj, &g, t)?;
            traj.push(t, &g, reference);
        }
    }
    Ok(traj)
}

/// RK4 one-step map `Σ_{k≤4} (dt A)^k / k!` of the augmented antisymmetric generator.
pub fn rk4_step_map(s: &Superoperator, dt: f64) -> RMat {
    let r = s.dense_antisymmetric();
    let na = r.nrows();
    let mut a = RMat::zeros(na + 1, na + 1);
    a.view_mut((0, 0), (na, na)).copy_from(&r);
    a.view_mut((0, na), (na, 1)).copy_from(&s.drive_antisymmetric());
    a *= dt;
    let id = RMat::identity(na + 1, na + 1);
    // Horner form of 1 + A + A²/2 + A³/6 + A⁴/24.
    let mut m = &id + &a * 0.25;
    m = &id + &a * &m * (1.0 / 3.0);
    m = &id + &a * &m * 0.5;
    &id + &a * &m
}

fn matrix_power(m: &RMat, mut e: usize) -> RMat {
    let n = m.nrows();
    let mut base = m.clone();
    let mut acc = RMat::identity(n, n);
    while e > 0 {
        if e & 1 == 1 {
            acc = crate::linalg::matmul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = crate::linalg::matmul(&base, &base);
        }
    }
    acc
}

fn evolve_propagator(g0: &RMat, s: &Superoperator, reference: &RMat, dt: f64, steps: usize, every: usize) -> Result<Trajectory> {
    let d = s.dim();
    let na = antisymmetric_dim(d);
    let step = rk4_step_map(s, dt);
    let stride = matrix_power(&step, every);
    let mut traj = Trajectory::default();
    let mut v = DVector::zeros(na + 1);
    v.rows_mut(0, na).copy_from(&to_antisymmetric_vector(g0));
    v[na] = 1.0;
    let unpack = |v: &DVector<f64>| from_antisymmetric_vector(&v.rows(0, na).into_owned(), d);
    let g = unpack(&v);
    check_bound(&mut traj, &g, 0.0)?;
    traj.push(0.0, &g, reference);
    let full = steps / every;
    for k in 1..=full {
        v = &stride * v;
        let t = (k * every) as f64 * dt;
        let g = unpack(&v);
        check_bound(&mut traj, &g, t)?;
        traj.push(t, &g, reference);
    }
    let rest = steps - full * every;
    if rest > 0 {
        v = matrix_power(&step, rest) * v;
        let g = unpack(&v);
        check_bound(&mut traj, &g, steps as f64 * dt)?;
        traj.push(steps as f64 * dt, &g, reference);
    }
    Ok(traj)
}

/// Result of a late-time exponential fit.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
    /// The window was not monotone and the rate comes from the modulus envelope.
    pub envelope: bool,
}

/// Minimum number of samples in the tail window.
pub const MIN_TAIL_POINTS: usize = 50;

fn least_squares(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Least-squares slope of `log|signal - asymptote|` over the last 20% of the samples that stay above
/// `1e-10`. Falls back to the local maxima of the modulus when the window is not monotone.
pub fn fit_decay_rate(traj: &Trajectory, sel: Observable, asymptote: f64) -> Result<DecayFit> {
    let y = traj.observable(sel)?;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&y)
        .map(|(&t, &v)| (t, v - asymptote))
        .filter(|(_, r)| r.abs() > 1e-10)
        .collect();
    let start = pts.len() - pts.len() / 5;
    let window = &pts[start..];
    if window.len() < MIN_TAIL_POINTS {
        return Err(Error::Fit(format!("tail window has {} points, need {MIN_TAIL_POINTS}", window.len())));
    }
    let monotone = window.windows(2).all(|w| w[0].1.signum() == w[1].1.signum() && w[1].1.abs() <= w[0].1.abs());
    let (t, l): (Vec<f64>, Vec<f64>) = if monotone {
        window.iter().map(|(t, r)| (*t, r.abs().ln())).unzip()
    } else {
        window
            .windows(3)
            .filter(|w| w[1].1.abs() >= w[0].1.abs() && w[1].1.abs() >= w[2].1.abs())
            .map(|w| (w[1].0, w[1].1.abs().ln()))
            .unzip()
    };
    if t.len() < 3 {
        return Err(Error::Fit("oscillating tail with fewer than three envelope maxima".into()));
    }
    let (slope, r2) = least_squares(&t, &l);
    Ok(DecayFit {
        rate: -slope,
        r_squared: r2,
        t_start: window[0].0,
        t_end: window[window.len() - 1].0,
        points: t.len(),
        envelope: !monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exponential() {
        let times: Vec<f64> = (0..1000).map(|k| k as f64 * 0.05).collect();
        let traj = Trajectory {
            mean_mag: times.iter().map(|t| (-0.3 * t).exp()).collect(),
            sites: times.iter().map(|_| vec![0.0]).collect(),
            dist_ss: times.iter().map(|_| 0.0).collect(),
            times,
            ..Default::default()
        };
        let fit = fit_decay_rate(&traj, Observable::MeanMagnetization, 0.0).unwrap();
        assert!((fit.rate - 0.3).abs() < 1e-6);
        assert!(!fit.envelope);
    }

    #[test]
    fn damped_oscillation_uses_envelope() {
        let times: Vec<f64> = (0..4000).map(|k| k as f64 * 0.01).collect();
        let traj = Trajectory {
            mean_mag: times.iter().map(|t| (-0.2 * t).exp() * (3.0 * t).cos()).collect(),
            sites: times.iter().map(|_| vec![0.0]).collect(),
            dist_ss: times.iter().map(|_| 0.0).collect(),
            times,
            ..Default::default()
        };
        let fit = fit_decay_rate(&traj, Observable::MeanMagnetization, 0.0).unwrap();
        assert!(fit.envelope);
        assert!((fit.rate - 0.2).abs() < 1e-3);
    }

    #[test]
    fn short_tail_is_rejected() {
        let times: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let traj = Trajectory {
            mean_mag: times.iter().map(|t| (-t).exp()).collect(),
            sites: times.iter().map(|_| vec![0.0]).collect(),
            dist_ss: times.iter().map(|_| 0.0).collect(),
            times,
            ..Default::default()
        };
        assert!(fit_decay_rate(&traj, Observable::MeanMagnetization, 0.0).is_err());
    }
}
