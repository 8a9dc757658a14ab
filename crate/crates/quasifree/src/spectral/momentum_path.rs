//! Mode-by-mode solution for translationally invariant Hamiltonians with translationally invariant linear
//! channels. Each momentum block obeys `∂_t Γ̃_n = P̃_n Γ̃_n + Γ̃_n P̃_n† + D̃_n`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::LinearChannel;
use crate::error::{Error, Result};
use crate::majorana::{AntisymmetricMatrix, CovarianceMatrix};
use crate::momentum::{from_mode_blocks, CBlock, MomentumBlock, MomentumBlocks};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Steady momentum blocks and per-mode relaxation eigenvalues.
#[derive(Clone, Debug, Serialize)]
pub struct MomentumSteadyState {
    pub blocks: Vec<CBlock>,
    /// Eigenvalues of `Γ̃_n ↦ P̃_n Γ̃_n + Γ̃_n P̃_n†` for each mode.
    pub mode_eigenvalues: Vec<[Complex64; 4]>,
}

impl MomentumSteadyState {
    /// `Γ_{jj,01} = (1/N) Σ_n (Γ̃_n)_{01}`, the same on every site.
    pub fn site_polarization(&self) -> f64 {
        let n = self.blocks.len() as f64;
        self.blocks.iter().map(|b| b[(0, 1)].re).sum::<f64>() / n
    }

    /// Real-space covariance matrix (`O(N²)`).
    pub fn to_real(&self) -> Result<CovarianceMatrix> {
        let m = from_mode_blocks(&self.blocks, 1e-9)?;
        Ok(CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_raw_part(&m)))
    }

    /// Smallest decay rate among the mode-diagonal blocks.
    pub fn slowest_rate(&self) -> f64 {
        self.mode_eigenvalues.iter().flatten().map(|z| -z.re).fold(f64::INFINITY, f64::min)
    }
}

/// Site blocks `M_{s,0}` of `M = Σ_α |L^α⟩⟨L^α|`, checking translation invariance.
fn m_site_blocks(channel: &LinearChannel) -> Result<Vec<CBlock>> {
    let n = channel.n_sites;
    let mut entries: HashMap<(usize, usize), Complex64> = HashMap::new();
    let st = channel.strengths;
    let (mu, nu) = (Complex64::new(st.g * st.mu, 0.0), Complex64::new(st.g * st.nu, 0.0));
    for t in &channel.terms {
        let nz: Vec<(usize, Complex64)> = t
            .u
            .iter()
            .zip(t.v.iter())
            .enumerate()
            .filter(|(_, (u, v))| u.norm_sqr() + v.norm_sqr() > 0.0)
            .map(|(i, (u, v))| (i, u * mu + v * nu))
            .filter(|(_, z)| z.norm() > 0.0)
            .collect();
        for &(i, a) in &nz {
            for &(j, b) in &nz {
                *entries.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += a * b.conj();
            }
        }
    }
    let mut blocks = vec![CBlock::zeros(); n];
    for (&(i, j), &z) in &entries {
        if j / 2 == 0 {
            blocks[i / 2][(i % 2, j % 2)] = z;
        }
    }
    let scale = entries.values().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for (&(i, j), &z) in &entries {
        let s = (i / 2 + n - j / 2) % n;
        if (blocks[s][(i % 2, j % 2)] - z).norm() > 1e-12 * scale {
            return Err(Error::NotTranslationInvariant((blocks[s][(i % 2, j % 2)] - z).norm()));
        }
    }
    let expected: usize = blocks.iter().map(|b| b.iter().filter(|z| z.norm() > 0.0).count()).sum::<usize>() * n;
    if expected != entries.values().filter(|z| z.norm() > 0.0).count() {
        return Err(Error::NotTranslationInvariant(f64::NAN));
    }
    Ok(blocks)
}

fn fourier(blocks: &[(usize, CBlock)], n: usize, mode: usize) -> CBlock {
    let mut acc = CBlock::zeros();
    for (s, b) in blocks {
        let th = -2.0 * PI * ((s * mode) % n) as f64 / n as f64;
        acc += b * Complex64::from_polar(1.0, th);
    }
    acc
}

fn eigenvalues_2x2(p: &CBlock) -> [Complex64; 2] {
    let half = (p[(0, 0)] + p[(1, 1)]) * 0.5;
    let det = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
    let root = (half * half - det).sqrt();
    [half + root, half - root]
}

/// Per-mode operator `X ↦ P X + X P†` on column-major `vec(X)`.
fn mode_operator(p: &CBlock) -> Matrix4<Complex64> {
    let id = Matrix2::<Complex64>::identity();
    id.kronecker(p) + p.conjugate().kronecker(&id)
}

/// Exact steady state and mode spectra for a translationally invariant linear channel.
pub fn momentum_spectrum_linear(blocks: &MomentumBlocks, channel: &LinearChannel) -> Result<MomentumSteadyState> {
    let n = blocks.n();
    if channel.n_sites != n {
        return Err(Error::Dimension(format!("blocks have N = {n}, channel has N = {}", channel.n_sites)));
    }
    let m_blocks = m_site_blocks(channel)?;
    let nonzero: Vec<(usize, CBlock)> =
        m_blocks.into_iter().enumerate().filter(|(_, b)| b.iter().any(|z| z.norm() > 0.0)).collect();
    let m_tilde: Vec<CBlock> = (0..n).map(|k| fourier(&nonzero, n, k)).collect();
    let mut out_blocks = Vec::with_capacity(n);
    let mut eigs = Vec::with_capacity(n);
    for k in 0..n {
        let mk = m_tilde[k];
        let mk_minus = m_tilde[(n - k) % n].conjugate();
        let x = mk + mk_minus;
        let d = (mk - mk_minus) * (-2.0 * I);
        let p = blocks.modes[k].matrix() - x;
        let op = mode_operator(&p);
        let rhs = -Vector4::from_column_slice(d.as_slice());
        let sol = op
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular { nullity: 1, ratio: 0.0 })?;
        out_blocks.push(CBlock::from_column_slice(sol.as_slice()));
        let ev = eigenvalues_2x2(&p);
        eigs.push([ev[0] + ev[0].conj(), ev[0] + ev[1].conj(), ev[1] + ev[0].conj(), ev[1] + ev[1].conj()]);
    }
    Ok(MomentumSteadyState { blocks: out_blocks, mode_eigenvalues: eigs })
}

/// Leading weak-coupling steady block for site-local loss/gain:
/// `p Re(h)/β² [[i(k-l)/2, h], [-h*, -i(k-l)/2]]` with `p = (μ²-ν²)/(μ²+ν²)`.
pub fn weak_coupling_block(mode: &MomentumBlock, mu: f64, nu: f64) -> CBlock {
    let p = (mu * mu - nu * nu) / (mu * mu + nu * nu);
    let b2 = mode.beta().powi(2);
    let d = 0.5 * (mode.k - mode.l);
    let m = CBlock::new(I * d, mode.h, -mode.h.conj(), -I * d);
    m * Complex64::new(p * mode.h.re / b2, 0.0)
}

/// First finite-coupling correction to [`weak_coupling_block`]:
/// `2i g² (μ²-ν²) / ((k-l)² + 4|h|²) (-Im(h) σ_z + (k-l)/2 σ_x)`.
pub fn weak_coupling_correction(mode: &MomentumBlock, g: f64, mu: f64, nu: f64) -> CBlock {
    let kl = mode.k - mode.l;
    let den = kl * kl + 4.0 * mode.h.norm_sqr();
    let sz = CBlock::new(1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into());
    let sx = CBlock::new(0.0.into(), 1.0.into(), 1.0.into(), 0.0.into());
    (sz * Complex64::new(-mode.h.im, 0.0) + sx * Complex64::new(0.5 * kl, 0.0))
        * (2.0 * I * g * g * (mu * mu - nu * nu) / den)
}
