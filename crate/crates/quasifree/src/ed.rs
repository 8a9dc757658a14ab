//! Exact-diagonalization oracle on the full `2^N`-dimensional Fock space (N ≤ 4).
//!
//! Majoranas follow the Jordan–Wigner strings `c_{j,0} = Z…Z X_j`, `c_{j,1} = Z…Z Y_j` with site 0 as the
//! leftmost tensor factor. Superoperators act on column-major `vec(ρ)`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::majorana::{AntisymmetricMatrix, CovarianceMatrix, RMat};
use crate::momentum::CMat;

/// Largest supported site count.
pub const MAX_SITES: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense Fock-space operator with a readable label.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub label: String,
    pub matrix: CMat,
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

fn kron_all(factors: &[CMat]) -> CMat {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Single-site operator `op` at `site` with identities elsewhere.
pub fn site_operator(n: usize, site: usize, op: &CMat) -> CMat {
    let f: Vec<CMat> = (0..n).map(|k| if k == site { op.clone() } else { CMat::identity(2, 2) }).collect();
    kron_all(&f)
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::DimensionCap { dim: n, cap: MAX_SITES });
    }
    Ok(())
}

/// The `2N` Jordan–Wigner Majorana operators in flattened order.
pub fn build_majoranas(n: usize) -> Result<Vec<FockOperator>> {
    check_cap(n)?;
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        for (u, p, name) in [(0, pauli_x(), "X"), (1, pauli_y(), "Y")] {
            let f: Vec<CMat> = (0..n)
                .map(|k| match k.cmp(&j) {
                    std::cmp::Ordering::Less => pauli_z(),
                    std::cmp::Ordering::Equal => p.clone(),
                    std::cmp::Ordering::Greater => CMat::identity(2, 2),
                })
                .collect();
            out.push(FockOperator { label: format!("c[{j},{u}] = Z^{j} {name}_{j}"), matrix: kron_all(&f) });
        }
    }
    Ok(out)
}

/// `∏_j σ^z_j`.
pub fn parity(n: usize) -> CMat {
    kron_all(&vec![pauli_z(); n])
}

/// `Σ_a l_a c_a`.
pub fn linear_operator(l: &DVector<Complex64>, maj: &[FockOperator]) -> CMat {
    let d = maj[0].matrix.nrows();
    let mut out = CMat::zeros(d, d);
    for (a, c) in maj.iter().enumerate() {
        if l[a] != ZERO {
            out += &c.matrix * l[a];
        }
    }
    out
}

/// `(i/4) Σ_ab A_ab c_a c_b`.
pub fn quadratic_operator(a: &RMat, maj: &[FockOperator]) -> CMat {
    let d = maj[0].matrix.nrows();
    let mut out = CMat::zeros(d, d);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)] != 0.0 {
                out += (&maj[i].matrix * &maj[j].matrix) * (I * 0.25 * a[(i, j)]);
            }
        }
    }
    out
}

/// Hermitian density matrix with unit trace.
#[derive(Clone, Debug)]
pub struct DensityMatrix(pub CMat);

impl DensityMatrix {
    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1 << n;
        Self(CMat::identity(d, d) / Complex64::new(d as f64, 0.0))
    }

    pub fn pure(psi: &DVector<Complex64>) -> Self {
        let psi = psi / Complex64::new(psi.norm(), 0.0);
        Self(&psi * psi.adjoint())
    }

    /// Gibbs state `exp(-β H) / Z` of a Hermitian operator.
    pub fn gibbs(h: &CMat, beta: f64) -> Self {
        let eig = nalgebra::SymmetricEigen::new(h.clone());
        let e0 = eig.eigenvalues.min();
        let w: Vec<f64> = eig.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = w.iter().sum();
        let d = h.nrows();
        let mut rho = CMat::zeros(d, d);
        for (k, wk) in w.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            rho += (&v * v.adjoint()) * Complex64::new(wk / z, 0.0);
        }
        Self(rho)
    }

    /// Hermiticity, trace and positivity defects.
    pub fn defects(&self) -> (f64, f64, f64) {
        let herm = (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tr = (self.0.trace() - ONE).norm();
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let min = nalgebra::SymmetricEigen::new(h).eigenvalues.min();
        (herm, tr, (-min).max(0.0))
    }

    pub fn vec(&self) -> DVector<Complex64> {
        DVector::from_column_slice(self.0.as_slice())
    }

    pub fn from_vec(v: &DVector<Complex64>) -> Self {
        let d = (v.len() as f64).sqrt().round() as usize;
        Self(CMat::from_column_slice(d, d, v.as_slice()))
    }
}

/// `Γ_ab = tr(ρ (i/2)[c_a, c_b])`.
pub fn cm_from_rho(rho: &DensityMatrix, maj: &[FockOperator]) -> RMat {
    let d = maj.len();
    let mut g = RMat::zeros(d, d);
    for a in 0..d {
        for b in (a + 1)..d {
            let comm = &maj[a].matrix * &maj[b].matrix - &maj[b].matrix * &maj[a].matrix;
            let v = ((&rho.0 * comm).trace() * I * 0.5).re;
            g[(a, b)] = v;
            g[(b, a)] = -v;
        }
    }
    g
}

/// `<c_a c_b c_c c_d>` in state ρ.
pub fn four_point(rho: &DensityMatrix, maj: &[FockOperator], idx: [usize; 4]) -> Complex64 {
    let p = &maj[idx[0]].matrix * &maj[idx[1]].matrix * &maj[idx[2]].matrix * &maj[idx[3]].matrix;
    (&rho.0 * p).trace()
}

/// The Fock-space Lindblad operators of a channel.
pub fn lindblad_operators(channel: &Channel, maj: &[FockOperator]) -> Vec<CMat> {
    match channel {
        Channel::None { .. } => Vec::new(),
        Channel::Linear(c) => c.vectors().iter().map(|l| linear_operator(l, maj)).collect(),
        Channel::Quadratic(c) => c.matrices().iter().map(|m| quadratic_operator(m, maj)).collect(),
    }
}

/// Dense Lindbladian on column-major `vec(ρ)`.
pub fn liouvillian_dense(h: &AntisymmetricMatrix, channel: &Channel) -> Result<CMat> {
    let n = h.n_sites();
    check_cap(n)?;
    if channel.n_sites() != n {
        return Err(Error::Dimension(format!("H has N = {n}, channel has N = {}", channel.n_sites())));
    }
    let maj = build_majoranas(n)?;
    let hop = quadratic_operator(h.matrix(), &maj);
    let ls = lindblad_operators(channel, &maj);
    Ok(liouvillian_from_operators(&hop, &ls))
}

/// `-i[H, ·] + Σ (L · L† - ½{L†L, ·})` as a matrix on column-major `vec(ρ)`.
pub fn liouvillian_from_operators(h: &CMat, ls: &[CMat]) -> CMat {
    let d = h.nrows();
    let id = CMat::identity(d, d);
    let mut sup = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-I);
    for l in ls {
        let ldl = l.adjoint() * l;
        sup += l.conjugate().kronecker(l);
        sup -= (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * Complex64::new(0.5, 0.0);
    }
    sup
}

/// Density matrices at `t_k = k·dt`, `k = 0..=steps`, using the exact propagator `exp(𝓛 dt)`.
pub fn evolve_rho(liouvillian: &CMat, rho0: &DensityMatrix, dt: f64, steps: usize) -> Vec<DensityMatrix> {
    let prop = (liouvillian * Complex64::new(dt, 0.0)).exp();
    let mut v = rho0.vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(rho0.clone());
    for _ in 0..steps {
        v = &prop * v;
        out.push(DensityMatrix::from_vec(&v));
    }
    out
}

/// Maximal CAR violation `max |{c_a, c_b} - 2δ_ab|`.
pub fn car_defect(maj: &[FockOperator]) -> f64 {
    let d = maj[0].matrix.nrows();
    let mut worst: f64 = 0.0;
    for (a, ca) in maj.iter().enumerate() {
        for (b, cb) in maj.iter().enumerate() {
            let mut ac = &ca.matrix * &cb.matrix + &cb.matrix * &ca.matrix;
            if a == b {
                ac -= CMat::identity(d, d) * Complex64::new(2.0, 0.0);
            }
            worst = worst.max(ac.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Ground-state density matrix of the quadratic Hamiltonian `h` (errors if degenerate).
pub fn ground_state(h: &AntisymmetricMatrix) -> Result<DensityMatrix> {
    let maj = build_majoranas(h.n_sites())?;
    let op = quadratic_operator(h.matrix(), &maj);
    let eig = nalgebra::SymmetricEigen::new(op);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let gap = eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]];
    if gap < 1e-9 {
        return Err(Error::DegenerateMode { mode: 0, reason: format!("ED ground state degenerate (gap {gap:.2e})") });
    }
    Ok(DensityMatrix::pure(&eig.eigenvectors.column(order[0]).into_owned()))
}

/// Sorted eigenvalues of the quadratic Hamiltonian on Fock space.
pub fn fock_energies(h: &AntisymmetricMatrix) -> Result<Vec<f64>> {
    let maj = build_majoranas(h.n_sites())?;
    let op = quadratic_operator(h.matrix(), &maj);
    let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(op).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Covariance matrix of a Gaussian ρ, wrapped.
pub fn covariance(rho: &DensityMatrix, maj: &[FockOperator]) -> CovarianceMatrix {
    CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_raw_part(&cm_from_rho(rho, maj)))
}

/// Machine-readable oracle comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub n_sites: usize,
    pub channel: String,
    pub t_end: f64,
    pub samples: usize,
    pub trajectory_max_deviation: f64,
    pub cm_spectrum_size: usize,
    pub spectrum_subset_max_distance: f64,
    pub ed_kernel_dimension: usize,
    pub cm_kernel_dimension: usize,
    pub steady_state_deviation: Option<f64>,
    pub passed: bool,
    pub tolerance: f64,
    pub mismatches: Vec<String>,
}

/// Which comparisons [`oracle_compare`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleOptions {
    pub t_end: f64,
    pub samples: usize,
    pub tolerance: f64,
    /// Inverse temperature of the Gibbs initial state of `initial_h`; large values give near-pure states.
    pub beta: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { t_end: 50.0, samples: 100, tolerance: 1e-8, beta: 0.7 }
    }
}

/// Compares covariance-level and density-matrix-level dynamics, spectra and steady states.
///
/// The initial state is the Gibbs state of `initial_h`, which is Gaussian, so both paths start from the
/// same physical state.
pub fn oracle_compare(
    h: &AntisymmetricMatrix,
    channel: &Channel,
    initial_h: &AntisymmetricMatrix,
    opts: &OracleOptions,
) -> Result<ComparisonReport> {
    use crate::spectral::{assemble, steady_state_linear, Superoperator};
    let n = h.n_sites();
    let maj = build_majoranas(n)?;
    let lv = liouvillian_dense(h, channel)?;
    let rho0 = DensityMatrix::gibbs(&quadratic_operator(initial_h.matrix(), &maj), opts.beta);
    let gamma0 = cm_from_rho(&rho0, &maj);
    let dt = opts.t_end / opts.samples as f64;
    let rhos = evolve_rho(&lv, &rho0, dt, opts.samples);
    let sup: Superoperator = assemble(h, channel)?;
    let cms = sup.exact_trajectory(&gamma0, dt, opts.samples)?;
    let mut mismatches = Vec::new();
    let mut traj_dev: f64 = 0.0;
    for (k, (rho, g)) in rhos.iter().zip(&cms).enumerate() {
        let d = (cm_from_rho(rho, &maj) - g).amax();
        if d > opts.tolerance && mismatches.len() < 5 {
            mismatches.push(format!("trajectory deviation {d:.3e} at t = {:.4}", k as f64 * dt));
        }
        traj_dev = traj_dev.max(d);
    }

    let ed_ev = crate::linalg::eigenvalues_complex(&lv)?;
    let cm_ev = sup.spectrum_values()?;
    let mut subset: f64 = 0.0;
    for z in &cm_ev {
        let best = ed_ev.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
        subset = subset.max(best);
    }
    if subset > opts.tolerance {
        mismatches.push(format!("CM eigenvalue missing from Lindbladian spectrum (distance {subset:.3e})"));
    }
    let scale = ed_ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let ed_kernel = ed_ev.iter().filter(|z| z.norm() < 1e-9 * scale).count();
    let cm_kernel = cm_ev.iter().filter(|z| z.norm() < 1e-9 * scale).count();

    let steady_state_deviation = match channel {
        Channel::Linear(_) if ed_kernel == 1 => {
            let ss = stationary_state(&lv)?;
            let g_ed = cm_from_rho(&ss, &maj);
            let g_cm = steady_state_linear(&sup, &crate::Tolerances::default())?;
            let d = (g_ed - g_cm.matrix()).amax();
            if d > opts.tolerance {
                mismatches.push(format!("steady-state deviation {d:.3e}"));
            }
            Some(d)
        }
        _ => None,
    };
    if traj_dev > opts.tolerance {
        mismatches.insert(0, format!("max trajectory deviation {traj_dev:.3e}"));
    }
    Ok(ComparisonReport {
        n_sites: n,
        channel: describe(channel),
        t_end: opts.t_end,
        samples: opts.samples,
        trajectory_max_deviation: traj_dev,
        cm_spectrum_size: cm_ev.len(),
        spectrum_subset_max_distance: subset,
        ed_kernel_dimension: ed_kernel,
        cm_kernel_dimension: cm_kernel,
        steady_state_deviation,
        passed: mismatches.is_empty(),
        tolerance: opts.tolerance,
        mismatches,
    })
}

fn describe(c: &Channel) -> String {
    match c {
        Channel::None { .. } => "none".into(),
        Channel::Linear(l) => format!("linear ({} operators)", l.vectors().len()),
        Channel::Quadratic(q) => format!("quadratic ({} operators)", q.matrices().len()),
    }
}

/// Unique stationary state of a Lindbladian (errors if the kernel is not one-dimensional).
pub fn stationary_state(liouvillian: &CMat) -> Result<DensityMatrix> {
    let ker = crate::linalg::null_space_complex(liouvillian, 1e-10)?;
    if ker.len() != 1 {
        return Err(Error::Singular { nullity: ker.len(), ratio: 0.0 });
    }
    let rho = DensityMatrix::from_vec(&ker[0]);
    let tr = rho.0.trace();
    Ok(DensityMatrix(rho.0 / tr))
}

/// Orthonormal basis of the Lindbladian kernel, reshaped into operators.
pub fn stationary_space(liouvillian: &CMat, tol: f64) -> Result<Vec<CMat>> {
    Ok(crate::linalg::null_space_complex(liouvillian, tol)?
        .iter()
        .map(|v| DensityMatrix::from_vec(v).0)
        .collect())
}
