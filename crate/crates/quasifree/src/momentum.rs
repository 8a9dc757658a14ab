//! Fourier block diagonalization of translationally invariant matrices.
//!
//! `U_{mj} = e^{-2πi m j / N} / √N` acting on site indices, so that
//! `H̃_n = Σ_s H_s e^{-2πi s n / N}` with `H_s = H_{j+s, j}` and `Γ_{jk} = (1/N) Σ_n e^{2πi n (j-k)/N} Γ̃_n`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorana::{AntisymmetricMatrix, CovarianceMatrix, RMat};

pub type CMat = DMatrix<Complex64>;
pub type CBlock = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn phase(n: usize, s: i64, big_n: usize) -> Complex64 {
    let x = (n as i64 * s).rem_euclid(big_n as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * x / big_n as f64)
}

/// Dense unitary Fourier transform on the `2N`-dimensional Majorana space.
#[derive(Clone, Debug)]
pub struct FourierTransform {
    pub n: usize,
    pub u: CMat,
}

impl FourierTransform {
    pub fn new(n: usize) -> Self {
        let norm = 1.0 / (n as f64).sqrt();
        let mut u = CMat::zeros(2 * n, 2 * n);
        for m in 0..n {
            for j in 0..n {
                let z = phase(m, -(j as i64), n) * norm;
                u[(2 * m, 2 * j)] = z;
                u[(2 * m + 1, 2 * j + 1)] = z;
            }
        }
        Self { n, u }
    }

    /// `U A U†`.
    pub fn forward(&self, a: &RMat) -> CMat {
        let ac = a.map(|x| Complex64::new(x, 0.0));
        &self.u * ac * self.u.adjoint()
    }

    /// `U† Ã U`.
    pub fn inverse(&self, a: &CMat) -> CMat {
        self.u.adjoint() * a * &self.u
    }
}

/// Parameters of one momentum block `[[i k, h], [-h*, i l]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentumBlock {
    pub h: Complex64,
    pub k: f64,
    pub l: f64,
}

impl MomentumBlock {
    pub fn matrix(&self) -> CBlock {
        CBlock::new(I * self.k, self.h, -self.h.conj(), I * self.l)
    }

    /// `β = sqrt(|h|² + (k - l)²/4)`.
    pub fn beta(&self) -> f64 {
        (self.h.norm_sqr() + 0.25 * (self.k - self.l).powi(2)).sqrt()
    }

    /// `α = |k + l| / 2`.
    pub fn alpha(&self) -> f64 {
        0.5 * (self.k + self.l).abs()
    }

    /// Both branches `|(k+l)/2 ± β|`.
    pub fn energies(&self) -> [f64; 2] {
        let c = 0.5 * (self.k + self.l);
        let b = self.beta();
        [(c + b).abs(), (c - b).abs()]
    }
}

/// Momentum-space parameterization of a translationally invariant Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentumBlocks {
    pub modes: Vec<MomentumBlock>,
}

impl MomentumBlocks {
    pub fn n(&self) -> usize {
        self.modes.len()
    }

    pub fn matrices(&self) -> Vec<CBlock> {
        self.modes.iter().map(MomentumBlock::matrix).collect()
    }

    /// Largest violation of `h_{-n} = h_n*`, `k_{-n} = -k_n`, `l_{-n} = -l_n`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|m| {
                let a = self.modes[m];
                let b = self.modes[(n - m) % n];
                (a.h - b.h.conj()).norm().max((a.k + b.k).abs()).max((a.l + b.l).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Site block `A_{s,0}` for every separation, after checking that `A_{j+s,j}` does not depend on `j`.
pub fn circulant_blocks(a: &RMat, tol: f64) -> Result<Vec<Matrix2<f64>>> {
    let d = a.nrows();
    if d % 2 != 0 || a.ncols() != d {
        return Err(Error::Dimension(format!("expected even square matrix, got {}x{}", d, a.ncols())));
    }
    let n = d / 2;
    let blocks: Vec<Matrix2<f64>> = (0..n).map(|s| a.fixed_view::<2, 2>(2 * s, 0).into_owned()).collect();
    let scale = a.amax().max(1.0);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for s in 0..n {
            let row = (j + s) % n;
            let b = a.fixed_view::<2, 2>(2 * row, 2 * j);
            worst = worst.max((b - blocks[s]).amax());
        }
    }
    if worst > tol * scale {
        return Err(Error::NotTranslationInvariant(worst));
    }
    Ok(blocks)
}

/// Fourier blocks `Ã_n = Σ_s A_s e^{-2πi s n/N}` of a translationally invariant real matrix.
pub fn mode_blocks(a: &RMat, tol: f64) -> Result<Vec<CBlock>> {
    let blocks = circulant_blocks(a, tol)?;
    let n = blocks.len();
    Ok((0..n)
        .map(|m| {
            let mut acc = CBlock::zeros();
            for (s, b) in blocks.iter().enumerate() {
                acc += b.map(|x| Complex64::new(x, 0.0)) * phase(m, -(s as i64), n);
            }
            acc
        })
        .collect())
}

/// Real matrix with Fourier blocks `Ã_n`; fails if the blocks do not describe a real matrix.
pub fn from_mode_blocks(blocks: &[CBlock], tol: f64) -> Result<RMat> {
    let n = blocks.len();
    let mut sblocks = Vec::with_capacity(n);
    let mut imag: f64 = 0.0;
    for s in 0..n {
        let mut acc = CBlock::zeros();
        for (m, b) in blocks.iter().enumerate() {
            acc += b * phase(m, s as i64, n);
        }
        acc /= Complex64::new(n as f64, 0.0);
        imag = imag.max(acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        sblocks.push(acc.map(|z| z.re));
    }
    let scale = blocks.iter().flat_map(|b| b.iter()).map(|z| z.norm()).fold(1.0, f64::max);
    if imag > tol * scale {
        return Err(Error::InvalidParameter(format!(
            "momentum blocks do not describe a real matrix (imaginary residue {imag:.3e})"
        )));
    }
    let mut a = RMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        for s in 0..n {
            a.fixed_view_mut::<2, 2>(2 * ((j + s) % n), 2 * j).copy_from(&sblocks[s]);
        }
    }
    Ok(a)
}

/// Momentum blocks of a translationally invariant Hamiltonian.
pub fn to_momentum(h: &AntisymmetricMatrix, tol: f64) -> Result<MomentumBlocks> {
    let blocks = mode_blocks(h.matrix(), tol)?;
    Ok(MomentumBlocks {
        modes: blocks
            .iter()
            .map(|b| MomentumBlock { h: b[(0, 1)], k: b[(0, 0)].im, l: b[(1, 1)].im })
            .collect(),
    })
}

/// Inverse of [`to_momentum`].
pub fn from_momentum(blocks: &MomentumBlocks) -> Result<AntisymmetricMatrix> {
    let m = from_mode_blocks(&blocks.matrices(), 1e-10)?;
    Ok(AntisymmetricMatrix::from_raw_part(&m))
}

/// Both excitation branches per mode.
pub fn excitation_energies(blocks: &MomentumBlocks) -> Vec<[f64; 2]> {
    blocks.modes.iter().map(MomentumBlock::energies).collect()
}

/// Ground-state covariance block `Γ̃_n = -i sign(A_n)` with `H̃_n = i A_n`, `A_n` Hermitian.
pub fn ground_state_block(mode: &MomentumBlock, index: usize, tol: f64) -> Result<CBlock> {
    let centre = 0.5 * (mode.k + mode.l);
    let beta = mode.beta();
    let d = 0.5 * (mode.k - mode.l);
    let scale = beta.max(centre.abs()).max(1.0);
    if (centre.abs() - beta).abs() <= tol * scale {
        return Err(Error::DegenerateMode {
            mode: index,
            reason: format!("zero excitation energy (β = {beta:.3e}, (k+l)/2 = {centre:.3e})"),
        });
    }
    if centre.abs() < beta {
        let h = mode.h;
        Ok(CBlock::new(-I * d, -h, h.conj(), I * d) / Complex64::new(beta, 0.0))
    } else {
        Ok(CBlock::identity() * (-I * centre.signum()))
    }
}

/// Covariance matrix of the ground state of a translationally invariant Hamiltonian.
pub fn ground_state_cm(blocks: &MomentumBlocks) -> Result<CovarianceMatrix> {
    let tol = 1e-12;
    let g: Vec<CBlock> = blocks
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| ground_state_block(m, i, tol))
        .collect::<Result<_>>()?;
    let m = from_mode_blocks(&g, 1e-9)?;
    Ok(CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_raw_part(&m)))
}
