//! Majorana-indexed real antisymmetric matrices and covariance matrices.
//!
//! Conventions: `c_{j,0} = a_j† + a_j`, `c_{j,1} = -i (a_j† - a_j)`, flattened index `2 j + u`,
//! and `Γ_ab = tr(ρ (i/2)[c_a, c_b])`. With these, `Γ_{j0,j1} = 1 - 2 <a_j† a_j>`.

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;

/// Position of a Majorana operator `c_{site, flavor}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MajoranaIndex {
    pub site: usize,
    pub flavor: usize,
}

impl MajoranaIndex {
    pub fn new(site: usize, flavor: usize) -> Self {
        debug_assert!(flavor < 2);
        Self { site, flavor }
    }

    pub fn flat(self) -> usize {
        2 * self.site + self.flavor
    }

    pub fn from_flat(index: usize) -> Self {
        Self { site: index / 2, flavor: index % 2 }
    }
}

/// Real antisymmetric `2N x 2N` matrix in Majorana index space.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricMatrix(RMat);

impl AntisymmetricMatrix {
    pub fn zeros(n_sites: usize) -> Self {
        Self(RMat::zeros(2 * n_sites, 2 * n_sites))
    }

    /// Wraps `raw` after checking it is antisymmetric up to the default input tolerance.
    pub fn new(raw: RMat) -> Result<Self> {
        antisymmetrize(&raw, crate::Tolerances::default().antisymmetry_input)
    }

    /// Antisymmetrizes `raw` without checking how far it was from antisymmetric.
    pub fn from_raw_part(raw: &RMat) -> Self {
        Self((raw - raw.transpose()) * 0.5)
    }

    pub fn n_sites(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMat {
        &self.0
    }

    pub fn into_matrix(self) -> RMat {
        self.0
    }

    pub fn get(&self, a: MajoranaIndex, b: MajoranaIndex) -> f64 {
        self.0[(a.flat(), b.flat())]
    }

    /// The `2 x 2` site block `A_{jk}`.
    pub fn block(&self, j: usize, k: usize) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2 * j, 2 * k).into_owned()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Returns `(raw - rawᵀ)/2`, rejecting inputs whose symmetric part is above `tol` relative to `‖raw‖_∞`.
pub fn antisymmetrize(raw: &RMat, tol: f64) -> Result<AntisymmetricMatrix> {
    if raw.nrows() != raw.ncols() || raw.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "expected square matrix of even size, got {}x{}",
            raw.nrows(),
            raw.ncols()
        )));
    }
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let scale = raw.amax();
    if scale > 0.0 {
        let defect = (raw + raw.transpose()).amax() / scale;
        if defect > tol {
            return Err(Error::NotAntisymmetric(defect));
        }
    }
    Ok(AntisymmetricMatrix::from_raw_part(raw))
}

/// Covariance matrix of a fermionic Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix(AntisymmetricMatrix);

impl CovarianceMatrix {
    /// Accepts `gamma` if all eigenvalues of `ΓᵀΓ` are at most `1 + tol`.
    pub fn new(gamma: AntisymmetricMatrix, tol: f64) -> Result<Self> {
        let d = validate_cm(gamma.matrix());
        if d.max_eigenvalue > 1.0 + tol {
            return Err(Error::InvalidCovariance(format!(
                "largest eigenvalue of ΓᵀΓ is {:.6}",
                d.max_eigenvalue
            )));
        }
        Ok(Self(gamma))
    }

    /// Wraps a matrix known to be a covariance matrix (e.g. produced by a trusted path).
    pub fn from_trusted(gamma: AntisymmetricMatrix) -> Self {
        Self(gamma)
    }

    /// Maximally mixed state, `Γ = 0`.
    pub fn maximally_mixed(n_sites: usize) -> Self {
        Self(AntisymmetricMatrix::zeros(n_sites))
    }

    /// Product state with `Γ_{j0,j1} = polarization[j]` on every site.
    pub fn product(polarization: &[f64]) -> Self {
        let n = polarization.len();
        let mut m = RMat::zeros(2 * n, 2 * n);
        for (j, &p) in polarization.iter().enumerate() {
            m[(2 * j, 2 * j + 1)] = p;
            m[(2 * j + 1, 2 * j)] = -p;
        }
        Self(AntisymmetricMatrix(m))
    }

    /// Fock vacuum, `<a†a> = 0` everywhere.
    pub fn vacuum(n_sites: usize) -> Self {
        Self::product(&vec![1.0; n_sites])
    }

    pub fn antisymmetric(&self) -> &AntisymmetricMatrix {
        &self.0
    }

    pub fn matrix(&self) -> &RMat {
        self.0.matrix()
    }

    pub fn n_sites(&self) -> usize {
        self.0.n_sites()
    }

    /// `Γ_{j0,j1} = 1 - 2 <a_j† a_j>`.
    pub fn site_polarization(&self, j: usize) -> f64 {
        self.matrix()[(2 * j, 2 * j + 1)]
    }

    /// `<a_j† a_j>`.
    pub fn occupation(&self, j: usize) -> f64 {
        0.5 * (1.0 - self.site_polarization(j))
    }
}

/// Diagnostic summary of a candidate covariance matrix.
#[derive(Clone, Debug, Serialize)]
pub struct CmDiagnostics {
    pub antisymmetry_defect: f64,
    pub max_eigenvalue: f64,
    pub purity_defect: f64,
    pub valid: bool,
}

/// Checks antisymmetry, the eigenvalue bound `ΓᵀΓ ≤ 1` and the distance from purity.
pub fn validate_cm(gamma: &RMat) -> CmDiagnostics {
    validate_cm_with(gamma, crate::Tolerances::default().spectral)
}

pub fn validate_cm_with(gamma: &RMat, tol: f64) -> CmDiagnostics {
    let antisymmetry_defect = (gamma + gamma.transpose()).amax();
    let gtg = gamma.transpose() * gamma;
    let sym = (&gtg + gtg.transpose()) * 0.5;
    let max_eigenvalue = if sym.nrows() == 0 {
        0.0
    } else {
        sym.symmetric_eigenvalues().max()
    };
    let purity_defect = (gtg - RMat::identity(gamma.nrows(), gamma.ncols())).norm();
    let valid = gamma.iter().all(|x| x.is_finite()) && antisymmetry_defect <= tol && max_eigenvalue <= 1.0 + tol;
    CmDiagnostics { antisymmetry_defect, max_eigenvalue, purity_defect, valid }
}

/// `Tr(Hᵀ Γ)`. The physical energy of `H = (i/4) Σ H_ab c_a c_b` is one quarter of this.
pub fn energy_expectation(h: &AntisymmetricMatrix, gamma: &CovarianceMatrix) -> Result<f64> {
    if h.dim() != gamma.matrix().nrows() {
        return Err(Error::Dimension(format!("H is {}, Γ is {}", h.dim(), gamma.matrix().nrows())));
    }
    Ok(h.matrix().dot(gamma.matrix()))
}

/// Haar-like random orthogonal matrix from the QR decomposition of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> RMat {
    let g = RMat::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Random pure Gaussian state `O (⊕ iσ_y) Oᵀ`.
pub fn random_pure_cm<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> CovarianceMatrix {
    let o = random_orthogonal(2 * n_sites, rng);
    let base = CovarianceMatrix::vacuum(n_sites);
    let m = &o * base.matrix() * o.transpose();
    CovarianceMatrix(AntisymmetricMatrix::from_raw_part(&m))
}

/// Random mixed Gaussian state with symplectic eigenvalues drawn uniformly from `[-1, 1]`.
pub fn random_mixed_cm<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> CovarianceMatrix {
    let o = random_orthogonal(2 * n_sites, rng);
    let pol: Vec<f64> = (0..n_sites).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let base = CovarianceMatrix::product(&pol);
    let m = &o * base.matrix() * o.transpose();
    CovarianceMatrix(AntisymmetricMatrix::from_raw_part(&m))
}

/// Random real antisymmetric matrix with standard normal entries above the diagonal.
pub fn random_antisymmetric<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> AntisymmetricMatrix {
    let d = 2 * n_sites;
    let mut m = RMat::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
    AntisymmetricMatrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn index_roundtrip() {
        for i in 0..20 {
            assert_eq!(MajoranaIndex::from_flat(i).flat(), i);
        }
    }

    #[test]
    fn antisymmetrize_contract() {
        let z = RMat::zeros(4, 4);
        assert_eq!(antisymmetrize(&z, 1e-8).unwrap().matrix(), &z);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_antisymmetric(2, &mut rng);
        assert_eq!(antisymmetrize(a.matrix(), 1e-8).unwrap(), a);
        let mut bad = a.matrix().clone();
        bad[(0, 1)] += 1e-2 * a.matrix().amax();
        assert!(matches!(antisymmetrize(&bad, 1e-8), Err(Error::NotAntisymmetric(_))));
        assert!(antisymmetrize(&RMat::zeros(3, 3), 1e-8).is_err());
    }

    #[test]
    fn validate_examples() {
        let d = validate_cm(CovarianceMatrix::maximally_mixed(3).matrix());
        assert!(d.valid);
        assert!((d.purity_defect - 6f64.sqrt()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_pure_cm(4, &mut rng);
        let d = validate_cm(p.matrix());
        assert!(d.valid && d.purity_defect < 1e-8);
        let d = validate_cm(&(p.matrix() * 1.5));
        assert!(!d.valid);
    }

    #[test]
    fn energy_trivial() {
        let h = AntisymmetricMatrix::zeros(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_pure_cm(2, &mut rng);
        assert_eq!(energy_expectation(&h, &g).unwrap(), 0.0);
        let h = random_antisymmetric(2, &mut rng);
        assert_eq!(energy_expectation(&h, &CovarianceMatrix::maximally_mixed(2)).unwrap(), 0.0);
    }
}
