//! Hamiltonian constructors: the anisotropic XY chain and generic translationally invariant block models.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorana::{AntisymmetricMatrix, RMat};
use crate::momentum::{MomentumBlock, MomentumBlocks};

/// Anisotropic XY chain in a transverse field with periodic boundaries; `J` coupling, `gamma` anisotropy,
/// `b` field. The fermionic matrix is fixed by the site blocks of [`xy_blocks`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyParams {
    pub n: usize,
    pub j: f64,
    pub gamma: f64,
    pub b: f64,
}

impl XyParams {
    pub fn new(n: usize, j: f64, gamma: f64, b: f64) -> Self {
        Self { n, j, gamma, b }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("XY chain needs N >= 2, got {}", self.n)));
        }
        if !(self.j.is_finite() && self.b.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter("XY parameters must be finite".into()));
        }
        Ok(())
    }

    /// `h_n = -2B + 2J[(1+γ) e^{2πin/N} + (1-γ) e^{-2πin/N}]`.
    pub fn h(&self, mode: usize) -> Complex64 {
        let th = 2.0 * PI * mode as f64 / self.n as f64;
        let e = Complex64::from_polar(1.0, th);
        -2.0 * self.b + 2.0 * self.j * ((1.0 + self.gamma) * e + (1.0 - self.gamma) * e.conj())
    }
}

/// Site blocks `H_s` (block `(j+s, j)` of the `2N x 2N` matrix) of a translationally invariant model.
#[derive(Clone, Debug, PartialEq)]
pub struct TiBlockSpec {
    pub n: usize,
    pub blocks: BTreeMap<i64, Matrix2<f64>>,
}

#[derive(Serialize, Deserialize)]
struct BlockEntry {
    s: i64,
    block: [[f64; 2]; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockFile {
    n: usize,
    blocks: Vec<BlockEntry>,
}

impl TiBlockSpec {
    pub fn new(n: usize) -> Self {
        Self { n, blocks: BTreeMap::new() }
    }

    /// On-site block `h0` (antisymmetrized) and hopping block `h1`, with `H_{-1} = -H_1ᵀ`.
    pub fn nearest_neighbour(n: usize, h0: Matrix2<f64>, h1: Matrix2<f64>) -> Self {
        let mut s = Self::new(n);
        s.blocks.insert(0, (h0 - h0.transpose()) * 0.5);
        s.blocks.insert(1, h1);
        s.blocks.insert(-1, -h1.transpose());
        s
    }

    pub fn with_block(mut self, s: i64, block: Matrix2<f64>) -> Self {
        self.blocks.insert(s, block);
        self
    }

    /// Reads `{"n": N, "blocks": [{"s": 1, "block": [[a, b], [c, d]]}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: BlockFile = serde_json::from_str(text).map_err(|e| Error::Config {
            path: "blocks".into(),
            message: e.to_string(),
        })?;
        let mut s = Self::new(f.n);
        for e in f.blocks {
            let b = e.block;
            s.blocks.insert(e.s, Matrix2::new(b[0][0], b[0][1], b[1][0], b[1][1]));
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let f = BlockFile {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .map(|(&s, b)| BlockEntry { s, block: [[b[(0, 0)], b[(0, 1)]], [b[(1, 0)], b[(1, 1)]]] })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("block file serializes")
    }
}

/// Blocks of the XY chain: `H_0 = [[0, -2B], [2B, 0]]`, `H_1 = [[0, 2J(1-γ)], [-2J(1+γ), 0]]`, `H_{-1} = -H_1ᵀ`.
pub fn xy_blocks(p: &XyParams) -> TiBlockSpec {
    let h0 = Matrix2::new(0.0, -2.0 * p.b, 2.0 * p.b, 0.0);
    let h1 = Matrix2::new(0.0, 2.0 * p.j * (1.0 - p.gamma), -2.0 * p.j * (1.0 + p.gamma), 0.0);
    TiBlockSpec::nearest_neighbour(p.n, h0, h1)
}

pub fn xy_chain(p: &XyParams) -> Result<AntisymmetricMatrix> {
    p.validate()?;
    from_blocks(&xy_blocks(p))
}

/// Declared blocks plus the partners `H_{-s} = -H_sᵀ` that were left implicit.
fn completed_blocks(spec: &TiBlockSpec) -> Result<BTreeMap<i64, Matrix2<f64>>> {
    if spec.n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let mut full = spec.blocks.clone();
    for (&s, b) in &spec.blocks {
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("block H_{s} has non-finite entries")));
        }
        let partner = -b.transpose();
        match spec.blocks.get(&-s) {
            Some(other) => {
                let defect = (other - partner).amax();
                if defect > 1e-12 * b.amax().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "blocks H_{s} and H_{} violate H_(-s) = -H_sᵀ (defect {defect:.3e})",
                        -s
                    )));
                }
            }
            None => {
                full.insert(-s, partner);
            }
        }
    }
    Ok(full)
}

/// Assembles the block-circulant matrix; separations are reduced mod N and summed.
pub fn from_blocks(spec: &TiBlockSpec) -> Result<AntisymmetricMatrix> {
    let n = spec.n;
    let full = completed_blocks(spec)?;
    let mut m = RMat::zeros(2 * n, 2 * n);
    for (&s, b) in &full {
        let shift = s.rem_euclid(n as i64) as usize;
        for j in 0..n {
            let row = (j + shift) % n;
            let mut v = m.fixed_view_mut::<2, 2>(2 * row, 2 * j);
            v += b;
        }
    }
    Ok(AntisymmetricMatrix::from_raw_part(&m))
}

/// Momentum blocks straight from the site blocks, in `O(N · range)` without forming the dense matrix.
/// Agrees with `to_momentum(&from_blocks(spec)?)`.
pub fn spec_to_momentum(spec: &TiBlockSpec) -> Result<MomentumBlocks> {
    let n = spec.n;
    let full = completed_blocks(spec)?;
    let modes = (0..n)
        .map(|m| {
            let mut acc = Matrix2::<Complex64>::zeros();
            for (&s, b) in &full {
                let x = (m as i64 * s).rem_euclid(n as i64) as f64;
                acc += b.map(|v| Complex64::new(v, 0.0)) * Complex64::from_polar(1.0, -2.0 * PI * x / n as f64);
            }
            MomentumBlock { h: acc[(0, 1)], k: acc[(0, 0)].im, l: acc[(1, 1)].im }
        })
        .collect();
    Ok(MomentumBlocks { modes })
}

/// Momentum blocks of the XY chain without the dense matrix.
pub fn xy_momentum(p: &XyParams) -> Result<MomentumBlocks> {
    p.validate()?;
    spec_to_momentum(&xy_blocks(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::to_momentum;

    #[test]
    fn xy_momentum_matches_formula() {
        for &(n, g, b) in &[(4, 1.0, 0.0), (7, 0.3, 1.3), (6, -0.6, 2.0), (2, 0.5, 1.0)] {
            let p = XyParams::new(n, 1.0, g, b);
            let blocks = to_momentum(&xy_chain(&p).unwrap(), 1e-10).unwrap();
            for (m, mode) in blocks.modes.iter().enumerate() {
                assert!((mode.h - p.h(m)).norm() < 1e-12, "n={n} m={m}");
                assert_eq!((mode.k, mode.l), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn xy_examples() {
        let p = XyParams::new(4, 1.0, 1.0, 0.0);
        for m in 0..4 {
            assert!((p.h(m).norm() - 4.0).abs() < 1e-12);
        }
        let p = XyParams::new(9, 1.0, 0.0, 2.0);
        for m in 0..9 {
            let expect = -4.0 + 4.0 * (2.0 * PI * m as f64 / 9.0).cos();
            assert!((p.h(m) - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
        assert!(xy_chain(&XyParams::new(1, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn direct_momentum_matches_dense_path() {
        let spec = xy_blocks(&XyParams::new(7, 0.9, 0.4, 1.3))
            .with_block(2, Matrix2::new(0.3, -0.2, 0.5, 0.1))
            .with_block(-2, -Matrix2::new(0.3, -0.2, 0.5, 0.1).transpose());
        for spec in [spec, xy_blocks(&XyParams::new(2, 1.0, 0.5, 0.7))] {
            let direct = spec_to_momentum(&spec).unwrap();
            let dense = to_momentum(&from_blocks(&spec).unwrap(), 1e-10).unwrap();
            for (a, b) in direct.modes.iter().zip(&dense.modes) {
                assert!((a.h - b.h).norm() < 1e-12 && (a.k - b.k).abs() < 1e-12 && (a.l - b.l).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blocks_consistency() {
        let p = XyParams::new(5, 0.8, 0.4, 1.1);
        assert_eq!(from_blocks(&xy_blocks(&p)).unwrap(), xy_chain(&p).unwrap());
        let z = from_blocks(&TiBlockSpec::new(3).with_block(0, Matrix2::zeros())).unwrap();
        assert_eq!(z.matrix().amax(), 0.0);
        let bad = TiBlockSpec::new(4)
            .with_block(1, Matrix2::new(1.0, 2.0, 3.0, 4.0))
            .with_block(-1, Matrix2::new(1.0, 2.0, 3.0, 4.0));
        assert!(from_blocks(&bad).is_err());
    }

    #[test]
    fn block_file_roundtrip() {
        let spec = xy_blocks(&XyParams::new(6, 1.0, 0.5, 0.7));
        let back = TiBlockSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }
}
