//! The covariance-level Lindbladian `𝒮`, its spectrum, the ADR and steady states.
//!
//! Both channel classes are written as `∂_t Γ = P Γ + Γ Pᵀ - Σ_α L_α Γ L_α + D` with
//! `P = H - X` and `D = 4 Im Σ_α |L^α⟩⟨L^α|` for linear channels (`X = 2 Re Σ_α |L^α⟩⟨L^α|`), and
//! `P = H + ½ Σ_α L_α²`, `D = 0` for quadratic Hermitian channels.
//!
//! Physical covariance matrices are antisymmetric and `𝒮` preserves antisymmetry, so spectra, ADRs and
//! steady states are computed on the antisymmetric subspace with orthonormal basis
//! `E_ab = (e_a e_bᵀ - e_b e_aᵀ)/√2`, `a < b`. The full `(2N)²` matrix is available for diagnostics;
//! its vectorization is column-major, giving `𝒮 = 𝟙⊗P + P⊗𝟙 - Σ_α L_αᵀ⊗L_α`.

pub mod momentum_path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{Channel, LinearChannel, QuadraticChannel};
use crate::error::{Error, Result};
use crate::majorana::{validate_cm_with, AntisymmetricMatrix, CovarianceMatrix, RMat};
use crate::tolerance::Tolerances;

pub use momentum_path::{momentum_spectrum_linear, MomentumSteadyState};

/// Which class of channel produced a superoperator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuperoperatorKind {
    Closed,
    Linear,
    Quadratic,
}

/// Non-zero entries of each column of a matrix.
#[derive(Clone, Debug)]
struct Columns(Vec<Vec<(usize, f64)>>);

impl Columns {
    fn new(m: &RMat) -> Self {
        Self(
            (0..m.ncols())
                .map(|j| (0..m.nrows()).filter(|&i| m[(i, j)] != 0.0).map(|i| (i, m[(i, j)])).collect())
                .collect(),
        )
    }
}

/// Index of the antisymmetric basis element `E_ab`, `a < b`, in a space of dimension `d`.
pub fn pair_index(a: usize, b: usize, d: usize) -> usize {
    debug_assert!(a < b && b < d);
    a * (2 * d - a - 1) / 2 + (b - a - 1)
}

/// Dimension `d(d-1)/2` of the antisymmetric subspace.
pub fn antisymmetric_dim(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// Coordinates of an antisymmetric matrix in the orthonormal basis `E_ab`.
pub fn to_antisymmetric_vector(g: &RMat) -> DVector<f64> {
    let d = g.nrows();
    let mut v = DVector::zeros(antisymmetric_dim(d));
    for a in 0..d {
        for b in (a + 1)..d {
            v[pair_index(a, b, d)] = std::f64::consts::SQRT_2 * 0.5 * (g[(a, b)] - g[(b, a)]);
        }
    }
    v
}

/// Inverse of [`to_antisymmetric_vector`].
pub fn from_antisymmetric_vector(v: &DVector<f64>, d: usize) -> RMat {
    let mut g = RMat::zeros(d, d);
    for a in 0..d {
        for b in (a + 1)..d {
            let x = v[pair_index(a, b, d)] * std::f64::consts::FRAC_1_SQRT_2;
            g[(a, b)] = x;
            g[(b, a)] = -x;
        }
    }
    g
}

/// Covariance-level Lindbladian for one Hamiltonian and one channel.
#[derive(Clone, Debug)]
pub struct Superoperator {
    kind: SuperoperatorKind,
    h: RMat,
    p: RMat,
    ls: Vec<RMat>,
    l_cols: Vec<Columns>,
    drive: RMat,
    x: RMat,
}

impl Superoperator {
    fn build(h: &AntisymmetricMatrix, kind: SuperoperatorKind, p: RMat, ls: Vec<RMat>, drive: RMat, x: RMat) -> Self {
        let l_cols = ls.iter().map(Columns::new).collect();
        Self { kind, h: h.matrix().clone(), p, ls, l_cols, drive, x }
    }

    pub fn kind(&self) -> SuperoperatorKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.h.nrows() / 2
    }

    /// Majorana dimension `2N`.
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &RMat {
        &self.h
    }

    /// `P` of the generator form `PΓ + ΓPᵀ - Σ LΓL`.
    pub fn p_matrix(&self) -> &RMat {
        &self.p
    }

    pub fn lindblad_matrices(&self) -> &[RMat] {
        &self.ls
    }

    /// Affine term `D` of `∂_t Γ = 𝒮(Γ) + D`; the vector `|𝒱⟩` of `∂_t|Γ⟩ = 𝒮|Γ⟩ - |𝒱⟩` is `-vec(D)`.
    pub fn drive(&self) -> &RMat {
        &self.drive
    }

    /// `|𝒱⟩` in column-major vectorization.
    pub fn affine_vector(&self) -> DVector<f64> {
        -DVector::from_column_slice(self.drive.as_slice())
    }

    /// Homogeneous action `𝒮(Γ)`.
    pub fn apply(&self, g: &RMat) -> RMat {
        let mut out = &self.p * g + g * self.p.transpose();
        let d = self.dim();
        for cols in &self.l_cols {
            // T = Γ L, then out -= L T.
            let mut t = RMat::zeros(d, d);
            for (j, col) in cols.0.iter().enumerate() {
                for &(k, v) in col {
                    let src = g.column(k);
                    let mut dst = t.column_mut(j);
                    dst.axpy(v, &src, 1.0);
                }
            }
            for (k, col) in cols.0.iter().enumerate() {
                for &(i, v) in col {
                    for j in 0..d {
                        out[(i, j)] -= v * t[(k, j)];
                    }
                }
            }
        }
        out
    }

    /// Full right-hand side `𝒮(Γ) + D`.
    pub fn rhs(&self, g: &RMat) -> RMat {
        self.apply(g) + &self.drive
    }

    /// Column-major `(2N)² x (2N)²` matrix of the homogeneous part.
    pub fn dense_full(&self) -> RMat {
        let d = self.dim();
        let id = RMat::identity(d, d);
        let mut s = id.kronecker(&self.p) + self.p.kronecker(&id);
        for l in &self.ls {
            s -= l.transpose().kronecker(l);
        }
        s
    }

    /// `𝓗 = 𝟙⊗H + H⊗𝟙`, the Hamiltonian part of [`Self::dense_full`].
    pub fn hamiltonian_full(&self) -> RMat {
        let d = self.dim();
        let id = RMat::identity(d, d);
        id.kronecker(&self.h) + self.h.kronecker(&id)
    }

    /// `𝓜 = 𝟙⊗X + X⊗𝟙` for linear channels (zero otherwise).
    pub fn m_full(&self) -> RMat {
        let d = self.dim();
        let id = RMat::identity(d, d);
        id.kronecker(&self.x) + self.x.kronecker(&id)
    }

    /// Restriction of the homogeneous part to the antisymmetric subspace.
    pub fn dense_antisymmetric(&self) -> RMat {
        let d = self.dim();
        let na = antisymmetric_dim(d);
        let mut r = RMat::zeros(na, na);
        let acc = |col: &mut nalgebra::DVectorViewMut<f64>, i: usize, j: usize, x: f64| {
            use std::cmp::Ordering::*;
            match i.cmp(&j) {
                Less => col[pair_index(i, j, d)] += x,
                Greater => col[pair_index(j, i, d)] -= x,
                Equal => {}
            }
        };
        for a in 0..d {
            for b in (a + 1)..d {
                let p = pair_index(a, b, d);
                let mut col = r.column_mut(p);
                for i in 0..d {
                    let pa = self.p[(i, a)];
                    if pa != 0.0 {
                        acc(&mut col, i, b, pa);
                    }
                    let pb = self.p[(i, b)];
                    if pb != 0.0 {
                        acc(&mut col, i, a, -pb);
                    }
                }
                for cols in &self.l_cols {
                    for &(i, la) in &cols.0[a] {
                        for &(j, lb) in &cols.0[b] {
                            acc(&mut col, i, j, la * lb);
                        }
                    }
                }
            }
        }
        r
    }

    /// Antisymmetric-subspace coordinates of `D`.
    pub fn drive_antisymmetric(&self) -> DVector<f64> {
        to_antisymmetric_vector(&self.drive)
    }

    /// Eigenvalues of the homogeneous part on the antisymmetric subspace.
    pub fn spectrum_values(&self) -> Result<Vec<Complex64>> {
        crate::linalg::eigenvalues(&self.dense_antisymmetric())
    }

    /// Spectral norm of `H`.
    pub fn hamiltonian_norm(&self) -> f64 {
        spectral_norm(&self.h)
    }

    /// Bound on the dissipative rates: `2 λ_max(X)` (linear) or `2 λ_max(Σ LᵀL)` (quadratic).
    pub fn rate_scale(&self) -> f64 {
        match self.kind {
            SuperoperatorKind::Closed => 0.0,
            SuperoperatorKind::Linear => 2.0 * self.x.clone().symmetric_eigenvalues().max().max(0.0),
            SuperoperatorKind::Quadratic => {
                let d = self.dim();
                let mut s = RMat::zeros(d, d);
                for l in &self.ls {
                    s += l.transpose() * l;
                }
                2.0 * s.symmetric_eigenvalues().max().max(0.0)
            }
        }
    }

    /// Exact trajectory `Γ(k·dt)`, `k = 0..=steps`, from the matrix exponential of the antisymmetric
    /// restriction (augmented by one dimension for the affine term).
    pub fn exact_trajectory(&self, gamma0: &RMat, dt: f64, steps: usize) -> Result<Vec<RMat>> {
        let d = self.dim();
        let r = self.dense_antisymmetric();
        let na = r.nrows();
        let mut aug = RMat::zeros(na + 1, na + 1);
        aug.view_mut((0, 0), (na, na)).copy_from(&r);
        aug.view_mut((0, na), (na, 1)).copy_from(&self.drive_antisymmetric());
        let prop = (aug * dt).exp();
        let mut v = DVector::zeros(na + 1);
        v.rows_mut(0, na).copy_from(&to_antisymmetric_vector(gamma0));
        v[na] = 1.0;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(from_antisymmetric_vector(&v.rows(0, na).into_owned(), d));
        for _ in 0..steps {
            v = &prop * v;
            out.push(from_antisymmetric_vector(&v.rows(0, na).into_owned(), d));
        }
        Ok(out)
    }
}

/// Largest singular value of a real matrix.
pub fn spectral_norm(m: &RMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    (m.transpose() * m).symmetric_eigenvalues().max().max(0.0).sqrt()
}

fn check_dims(h: &AntisymmetricMatrix, n: usize) -> Result<()> {
    if h.n_sites() != n {
        return Err(Error::Dimension(format!("H has N = {}, channel has N = {n}", h.n_sites())));
    }
    Ok(())
}

/// Superoperator for a linear channel.
pub fn assemble_linear(h: &AntisymmetricMatrix, channel: &LinearChannel) -> Result<Superoperator> {
    check_dims(h, channel.n_sites)?;
    let m = channel.m_sum();
    let x = m.map(|z| 2.0 * z.re);
    let drive = m.map(|z| 4.0 * z.im);
    let p = h.matrix() - &x;
    Ok(Superoperator::build(h, SuperoperatorKind::Linear, p, Vec::new(), drive, x))
}

/// Superoperator for a quadratic Hermitian channel.
pub fn assemble_quadratic(h: &AntisymmetricMatrix, channel: &QuadraticChannel) -> Result<Superoperator> {
    check_dims(h, channel.n_sites)?;
    let ls = channel.matrices();
    let d = h.dim();
    let mut k = RMat::zeros(d, d);
    for l in &ls {
        k += l * l * 0.5;
    }
    let p = h.matrix() + k;
    Ok(Superoperator::build(h, SuperoperatorKind::Quadratic, p, ls, RMat::zeros(d, d), RMat::zeros(d, d)))
}

pub fn assemble(h: &AntisymmetricMatrix, channel: &Channel) -> Result<Superoperator> {
    match channel {
        Channel::None { n_sites } => {
            check_dims(h, *n_sites)?;
            let d = h.dim();
            Ok(Superoperator::build(
                h,
                SuperoperatorKind::Closed,
                h.matrix().clone(),
                Vec::new(),
                RMat::zeros(d, d),
                RMat::zeros(d, d),
            ))
        }
        Channel::Linear(c) => assemble_linear(h, c),
        Channel::Quadratic(c) => assemble_quadratic(h, c),
    }
}

/// Eigenvalues of `𝒮` with the extracted ADR.
#[derive(Clone, Debug, Serialize)]
pub struct LiouvillianSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub zero_threshold: f64,
    /// Smallest `|Re λ|` above the zero threshold (0 if every mode is non-decaying).
    pub adr: f64,
    /// Eigenvalues with `|λ| ≤` threshold.
    pub zero_cluster: usize,
    /// Eigenvalues with `|Re λ| ≤` threshold (includes purely oscillating modes).
    pub non_decaying: usize,
    /// Eigenvalues whose `|Re λ|` equals the ADR within the spectral tolerance.
    pub adr_cluster: usize,
    pub max_real_part: f64,
}

impl LiouvillianSpectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, tol: &Tolerances) -> Self {
        eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        let max_abs_re = eigenvalues.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let zero_threshold = tol.zero_floor.max(tol.zero_relative * max_abs_re);
        let adr = eigenvalues
            .iter()
            .map(|z| z.re.abs())
            .filter(|&r| r > zero_threshold)
            .fold(f64::INFINITY, f64::min);
        let adr = if adr.is_finite() { adr } else { 0.0 };
        let cluster_tol = tol.spectral * max_abs_re.max(1e-300) + tol.zero_floor;
        let adr_cluster = if adr > 0.0 {
            eigenvalues.iter().filter(|z| (z.re.abs() - adr).abs() <= cluster_tol).count()
        } else {
            0
        };
        Self {
            zero_cluster: eigenvalues.iter().filter(|z| z.norm() <= zero_threshold).count(),
            non_decaying: eigenvalues.iter().filter(|z| z.re.abs() <= zero_threshold).count(),
            max_real_part: eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
            eigenvalues,
            zero_threshold,
            adr,
            adr_cluster,
        }
    }
}

fn check_cap(s: &Superoperator, tol: &Tolerances) -> Result<()> {
    let full = s.dim() * s.dim();
    if full > tol.dense_dim_cap {
        return Err(Error::DimensionCap { dim: full, cap: tol.dense_dim_cap });
    }
    Ok(())
}

/// Spectrum on the antisymmetric (physical) subspace.
pub fn spectrum(s: &Superoperator, tol: &Tolerances) -> Result<LiouvillianSpectrum> {
    check_cap(s, tol)?;
    Ok(LiouvillianSpectrum::from_eigenvalues(s.spectrum_values()?, tol))
}

/// Spectrum on the whole `(2N)²` space, symmetric sector included.
pub fn spectrum_full(s: &Superoperator, tol: &Tolerances) -> Result<LiouvillianSpectrum> {
    check_cap(s, tol)?;
    Ok(LiouvillianSpectrum::from_eigenvalues(crate::linalg::eigenvalues(&s.dense_full())?, tol))
}

/// Dimension of the kernel of `Γ ↦ [H, Γ]` on the antisymmetric subspace: the number of pairs
/// `a < b` of eigenvalues of `H` with `|λ_a + λ_b| ≤ tol · max(1, ‖H‖)`. This is the steady manifold
/// of the unperturbed dynamics.
pub fn hamiltonian_kernel_dimension(h: &RMat, tol: f64) -> Result<usize> {
    let ev = crate::linalg::eigenvalues(h)?;
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut count = 0;
    for a in 0..ev.len() {
        for b in (a + 1)..ev.len() {
            if (ev[a] + ev[b]).norm() <= tol * scale {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Unique steady state `𝒮(Γ₀) + D = 0` on the antisymmetric subspace.
pub fn steady_state_linear(s: &Superoperator, tol: &Tolerances) -> Result<CovarianceMatrix> {
    check_cap(s, tol)?;
    let r = s.dense_antisymmetric();
    let sv = crate::linalg::singular_values(&r)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= tol.singular_ratio * smax {
        let nullity = sv.iter().filter(|&&x| x <= tol.singular_ratio * smax.max(1e-300)).count().max(1);
        return Err(Error::Singular { nullity, ratio: if smax > 0.0 { smin / smax } else { 0.0 } });
    }
    let rhs = -s.drive_antisymmetric();
    let x = crate::linalg::solve(&r, &rhs);
    let residual = (&r * &x - &rhs).norm();
    let scale = rhs.norm().max(1.0);
    if residual > tol.spectral * scale {
        return Err(Error::Eigensolver(format!("steady-state residual {residual:.3e}")));
    }
    let g = from_antisymmetric_vector(&x, s.dim());
    let diag = validate_cm_with(&g, tol.spectral);
    if !diag.valid {
        return Err(Error::InvalidCovariance(format!(
            "steady state violates the eigenvalue bound (max {:.6})",
            diag.max_eigenvalue
        )));
    }
    Ok(CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_raw_part(&g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing_z, loss_gain, ChannelStrengths};
    use crate::majorana::{random_antisymmetric, random_mixed_cm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct_linear(h: &RMat, c: &LinearChannel, g: &RMat) -> RMat {
        let mut out = h * g - g * h;
        for l in c.vectors() {
            let m = &l * l.adjoint();
            let mc = m.map(|z| z.conj());
            let sum = (&m + &mc).map(|z| z.re);
            out -= &sum * g + g * &sum;
            let diff = (&m - &mc) * Complex64::new(0.0, -2.0);
            out += diff.map(|z| z.re);
        }
        out
    }

    #[test]
    fn pair_index_is_bijective() {
        let d = 7;
        let mut seen = vec![false; antisymmetric_dim(d)];
        for a in 0..d {
            for b in (a + 1)..d {
                let p = pair_index(a, b, d);
                assert!(!seen[p]);
                seen[p] = true;
            }
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn linear_action_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random_antisymmetric(3, &mut rng);
        let c = loss_gain(3, ChannelStrengths::new(0.7, 1.3, 0.4));
        let s = assemble_linear(&h, &c).unwrap();
        let g = random_mixed_cm(3, &mut rng);
        let e = (s.rhs(g.matrix()) - direct_linear(h.matrix(), &c, g.matrix())).amax();
        assert!(e < 1e-12, "{e}");
    }

    #[test]
    fn quadratic_action_matches_double_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_antisymmetric(3, &mut rng);
        let c = dephasing_z(3, ChannelStrengths::new(0.4, 1.1, 0.0));
        let s = assemble_quadratic(&h, &c).unwrap();
        let g = random_mixed_cm(3, &mut rng).matrix().clone();
        let mut direct = h.matrix() * &g - &g * h.matrix();
        for l in c.matrices() {
            let inner = &l * &g - &g * &l;
            direct += (&l * &inner - &inner * &l) * 0.5;
        }
        assert!((s.apply(&g) - direct).amax() < 1e-12);
    }

    #[test]
    fn dense_forms_agree_with_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_antisymmetric(2, &mut rng);
        let c = crate::channels::dephasing_xx_mix(2, ChannelStrengths::new(0.5, 1.0, 0.7)).unwrap();
        let s = assemble_quadratic(&h, &c).unwrap();
        let g = random_mixed_cm(2, &mut rng).matrix().clone();
        let full = s.dense_full() * DVector::from_column_slice(g.as_slice());
        let direct = s.apply(&g);
        assert!((full - DVector::from_column_slice(direct.as_slice())).amax() < 1e-12);
        let red = s.dense_antisymmetric() * to_antisymmetric_vector(&g);
        assert!((from_antisymmetric_vector(&red, 4) - direct).amax() < 1e-12);
    }

    #[test]
    fn pure_loss_gain_spectrum() {
        let s = ChannelStrengths::new(0.9, 1.2, 0.5);
        let sup = assemble_linear(&AntisymmetricMatrix::zeros(3), &loss_gain(3, s)).unwrap();
        let k = s.g * s.g * (s.mu * s.mu + s.nu * s.nu);
        let r = sup.dense_antisymmetric();
        assert!((r + RMat::identity(15, 15) * k).amax() < 1e-14);
        let sp = spectrum(&sup, &Tolerances::default()).unwrap();
        assert!((sp.adr - k).abs() < 1e-12);
        assert_eq!(sp.zero_cluster, 0);
    }

    #[test]
    fn scalar_spectrum() {
        let ev = vec![Complex64::new(-2.5, 0.0); 4];
        let sp = LiouvillianSpectrum::from_eigenvalues(ev, &Tolerances::default());
        assert_eq!(sp.adr, 2.5);
        assert_eq!(sp.zero_cluster, 0);
        assert_eq!(sp.adr_cluster, 4);
    }

    #[test]
    fn closed_system_is_oscillatory() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_antisymmetric(3, &mut rng);
        let s = assemble(&h, &Channel::None { n_sites: 3 }).unwrap();
        assert_eq!(s.drive().amax(), 0.0);
        let sp = spectrum(&s, &Tolerances::default()).unwrap();
        assert!(sp.eigenvalues.iter().all(|z| z.re.abs() < 1e-12));
    }

    #[test]
    fn singular_steady_state_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = random_antisymmetric(2, &mut rng);
        let s = assemble(&h, &Channel::None { n_sites: 2 }).unwrap();
        assert!(matches!(steady_state_linear(&s, &Tolerances::default()), Err(Error::Singular { .. })));
    }
}
