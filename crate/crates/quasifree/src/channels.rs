//! Lindblad channels of the two solvable classes and the named presets.
//!
//! Linear channels: `L^α = Σ_a l^α_a c_a`. Quadratic Hermitian channels: `L^α = (i/4) Σ_ab L^α_ab c_a c_b`
//! with `L^α` real antisymmetric. Every term is stored as `g (μ u + ν v)` so that strengths can be
//! swapped without rebuilding templates.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorana::RMat;

pub type CVec = DVector<Complex64>;

/// Overall coupling `g` and relative weights `μ`, `ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelStrengths {
    pub g: f64,
    pub mu: f64,
    pub nu: f64,
}

impl ChannelStrengths {
    pub fn new(g: f64, mu: f64, nu: f64) -> Self {
        Self { g, mu, nu }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.mu.is_finite() && self.nu.is_finite()) || self.g < 0.0 {
            return Err(Error::InvalidParameter(format!("invalid strengths {self:?}")));
        }
        Ok(())
    }
}

impl Default for ChannelStrengths {
    fn default() -> Self {
        Self { g: 1.0, mu: 1.0, nu: 0.0 }
    }
}

/// One linear Lindblad operator `g (μ u + ν v)` in Majorana coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearTerm {
    pub u: CVec,
    pub v: CVec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearChannel {
    pub n_sites: usize,
    pub terms: Vec<LinearTerm>,
    pub strengths: ChannelStrengths,
}

/// One quadratic Hermitian Lindblad matrix `g (μ u + ν v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticTerm {
    pub u: RMat,
    pub v: RMat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticChannel {
    pub n_sites: usize,
    pub terms: Vec<QuadraticTerm>,
    pub strengths: ChannelStrengths,
}

impl LinearChannel {
    /// Channel with explicit coefficient vectors (`g = μ = 1`, `ν = 0`).
    pub fn from_vectors(n_sites: usize, vectors: Vec<CVec>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("linear channel needs at least one vector".into()));
        }
        let terms = vectors
            .into_iter()
            .map(|u| {
                if u.len() != 2 * n_sites {
                    return Err(Error::Dimension(format!("vector of length {} for N = {n_sites}", u.len())));
                }
                if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::InvalidParameter("non-finite channel vector".into()));
                }
                Ok(LinearTerm { v: CVec::zeros(u.len()), u })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n_sites, terms, strengths: ChannelStrengths::new(1.0, 1.0, 0.0) })
    }

    /// Materialized vectors `|L^α⟩`.
    pub fn vectors(&self) -> Vec<CVec> {
        let s = self.strengths;
        self.terms
            .iter()
            .map(|t| (&t.u * Complex64::new(s.mu, 0.0) + &t.v * Complex64::new(s.nu, 0.0)) * Complex64::new(s.g, 0.0))
            .filter(|v| v.iter().any(|z| z.norm() > 0.0))
            .collect()
    }

    /// `Σ_α |L^α⟩⟨L^α|` with entries `l_a l_b*`.
    pub fn m_sum(&self) -> nalgebra::DMatrix<Complex64> {
        let d = 2 * self.n_sites;
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(d, d);
        for l in self.vectors() {
            m += &l * l.adjoint();
        }
        m
    }
}

impl QuadraticChannel {
    /// Channel with explicit antisymmetric matrices (`g = μ = 1`, `ν = 0`).
    pub fn from_matrices(n_sites: usize, matrices: Vec<RMat>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidParameter("quadratic channel needs at least one matrix".into()));
        }
        let terms = matrices
            .into_iter()
            .map(|u| {
                let a = crate::majorana::antisymmetrize(&u, 1e-8)?;
                if a.dim() != 2 * n_sites {
                    return Err(Error::Dimension(format!("matrix of size {} for N = {n_sites}", a.dim())));
                }
                let u = a.into_matrix();
                Ok(QuadraticTerm { v: RMat::zeros(u.nrows(), u.ncols()), u })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n_sites, terms, strengths: ChannelStrengths::new(1.0, 1.0, 0.0) })
    }

    /// Materialized matrices `L^α`.
    pub fn matrices(&self) -> Vec<RMat> {
        let s = self.strengths;
        self.terms
            .iter()
            .map(|t| (&t.u * s.mu + &t.v * s.nu) * s.g)
            .filter(|m| m.amax() > 0.0)
            .collect()
    }
}

/// Either class of channel, or none (closed system).
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    None { n_sites: usize },
    Linear(LinearChannel),
    Quadratic(QuadraticChannel),
}

impl Channel {
    pub fn n_sites(&self) -> usize {
        match self {
            Channel::None { n_sites } => *n_sites,
            Channel::Linear(c) => c.n_sites,
            Channel::Quadratic(c) => c.n_sites,
        }
    }

    pub fn strengths(&self) -> Option<ChannelStrengths> {
        match self {
            Channel::None { .. } => None,
            Channel::Linear(c) => Some(c.strengths),
            Channel::Quadratic(c) => Some(c.strengths),
        }
    }

    pub fn with_strengths(&self, s: ChannelStrengths) -> Self {
        match self {
            Channel::None { n_sites } => Channel::None { n_sites: *n_sites },
            Channel::Linear(c) => Channel::Linear(LinearChannel { strengths: s, ..c.clone() }),
            Channel::Quadratic(c) => Channel::Quadratic(QuadraticChannel { strengths: s, ..c.clone() }),
        }
    }
}

fn site_vector(n: usize, entries: &[(usize, Complex64)]) -> CVec {
    let mut v = CVec::zeros(2 * n);
    for &(i, z) in entries {
        v[i] += z;
    }
    v
}

/// `a_α = (c_{α,0} - i c_{α,1}) / 2`.
pub fn annihilator(n: usize, site: usize) -> CVec {
    site_vector(n, &[(2 * site, Complex64::new(0.5, 0.0)), (2 * site + 1, Complex64::new(0.0, -0.5))])
}

/// `a†_α = (c_{α,0} + i c_{α,1}) / 2`.
pub fn creator(n: usize, site: usize) -> CVec {
    site_vector(n, &[(2 * site, Complex64::new(0.5, 0.0)), (2 * site + 1, Complex64::new(0.0, 0.5))])
}

/// Site-local loss `g μ a_α` and gain `g ν a†_α`.
pub fn loss_gain(n: usize, s: ChannelStrengths) -> LinearChannel {
    let zero = CVec::zeros(2 * n);
    let mut terms = Vec::with_capacity(2 * n);
    for a in 0..n {
        terms.push(LinearTerm { u: annihilator(n, a), v: zero.clone() });
    }
    for a in 0..n {
        terms.push(LinearTerm { u: zero.clone(), v: creator(n, a) });
    }
    LinearChannel { n_sites: n, terms, strengths: s }
}

/// `g (μ a_α + ν a†_{α+1})`.
pub fn paired(n: usize, s: ChannelStrengths) -> Result<LinearChannel> {
    if n < 2 {
        return Err(Error::InvalidParameter("paired channel needs N >= 2".into()));
    }
    let terms = (0..n)
        .map(|a| LinearTerm { u: annihilator(n, a), v: creator(n, (a + 1) % n) })
        .collect();
    Ok(LinearChannel { n_sites: n, terms, strengths: s })
}

/// Matrix of `i c_p c_q` in the `(i/4) Σ L_ab c_a c_b` form: `L_pq = 2`, `L_qp = -2`.
fn bilinear(n: usize, p: usize, q: usize) -> RMat {
    let mut m = RMat::zeros(2 * n, 2 * n);
    m[(p, q)] = 2.0;
    m[(q, p)] = -2.0;
    m
}

/// `g μ (i/2)[c_{α,1}, c_{α,0}]`, the fermionic form of `g μ σ^z_α`.
pub fn dephasing_z(n: usize, s: ChannelStrengths) -> QuadraticChannel {
    let terms = (0..n)
        .map(|a| QuadraticTerm { u: bilinear(n, 2 * a + 1, 2 * a), v: RMat::zeros(2 * n, 2 * n) })
        .collect();
    QuadraticChannel { n_sites: n, terms, strengths: s }
}

/// `g ν (i/2)[c_{α+1,0}, c_{α,1}]`, the fermionic form of `g ν σ^x_α σ^x_{α+1}` away from the boundary.
pub fn xx_coupling(n: usize, s: ChannelStrengths) -> Result<QuadraticChannel> {
    if n < 2 {
        return Err(Error::InvalidParameter("xx coupling needs N >= 2".into()));
    }
    let terms = (0..n)
        .map(|a| QuadraticTerm { u: RMat::zeros(2 * n, 2 * n), v: bilinear(n, 2 * ((a + 1) % n), 2 * a + 1) })
        .collect();
    Ok(QuadraticChannel { n_sites: n, terms, strengths: s })
}

/// The alternative ordering `g ν (i/2)[c_{α,0}, c_{α+1,1}]`, which maps to `g ν σ^y_α σ^y_{α+1}` under the same string convention.
pub fn xx_coupling_alt(n: usize, s: ChannelStrengths) -> Result<QuadraticChannel> {
    if n < 2 {
        return Err(Error::InvalidParameter("xx coupling needs N >= 2".into()));
    }
    let terms = (0..n)
        .map(|a| QuadraticTerm { u: RMat::zeros(2 * n, 2 * n), v: bilinear(n, 2 * a, 2 * ((a + 1) % n) + 1) })
        .collect();
    Ok(QuadraticChannel { n_sites: n, terms, strengths: s })
}

/// Dephasing with weight `μ` plus neighbour coupling `(i/2)[c_{α,0}, c_{α+1,1}]` with weight `ν`,
/// the ordering for which the two-rate momentum sums hold.
pub fn dephasing_xx_mix(n: usize, s: ChannelStrengths) -> Result<QuadraticChannel> {
    let mut c = dephasing_z(n, s);
    c.terms.extend(xx_coupling_alt(n, s)?.terms);
    Ok(c)
}

/// CLI-facing channel presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    None,
    LossGain,
    Paired,
    DephasingZ,
    XxCoupling,
    DephasingXxMix,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::None, Preset::LossGain, Preset::Paired, Preset::DephasingZ, Preset::XxCoupling, Preset::DephasingXxMix];

    pub fn name(self) -> &'static str {
        match self {
            Preset::None => "none",
            Preset::LossGain => "loss-gain",
            Preset::Paired => "paired",
            Preset::DephasingZ => "dephasing-z",
            Preset::XxCoupling => "xx-coupling",
            Preset::DephasingXxMix => "dephasing-xx-mix",
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Preset::LossGain | Preset::Paired)
    }

    pub fn build(self, n: usize, s: ChannelStrengths) -> Result<Channel> {
        s.validate()?;
        Ok(match self {
            Preset::None => Channel::None { n_sites: n },
            Preset::LossGain => Channel::Linear(loss_gain(n, s)),
            Preset::Paired => Channel::Linear(paired(n, s)?),
            Preset::DephasingZ => Channel::Quadratic(dephasing_z(n, s)),
            Preset::XxCoupling => Channel::Quadratic(xx_coupling(n, s)?),
            Preset::DephasingXxMix => Channel::Quadratic(dephasing_xx_mix(n, s)?),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown channel preset `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_only_has_site_support() {
        let c = loss_gain(4, ChannelStrengths::new(0.7, 1.0, 0.0));
        let v = c.vectors();
        assert_eq!(v.len(), 4);
        for (a, l) in v.iter().enumerate() {
            let support: Vec<usize> = (0..8).filter(|&i| l[i].norm() > 0.0).collect();
            assert_eq!(support, vec![2 * a, 2 * a + 1]);
        }
    }

    #[test]
    fn balanced_loss_gain_mixes_maximally() {
        let c = loss_gain(3, ChannelStrengths::new(1.0, 1.0, 1.0));
        let m = c.m_sum();
        let x = (&m + m.map(|z| z.conj())).map(|z| z.re);
        assert!((x - RMat::identity(6, 6)).amax() < 1e-15);
        assert!(m.map(|z| z.im).amax() < 1e-15);
    }

    #[test]
    fn paired_support_and_pure_gain() {
        let c = paired(5, ChannelStrengths::new(1.0, 0.0, 1.0)).unwrap();
        for (a, l) in c.vectors().iter().enumerate() {
            let expect = creator(5, (a + 1) % 5);
            assert!((l - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn quadratic_templates_antisymmetric() {
        let s = ChannelStrengths::new(0.3, 1.2, 0.8);
        let c = dephasing_xx_mix(4, s).unwrap();
        assert_eq!(c.matrices().len(), 8);
        for m in c.matrices() {
            assert_eq!((&m + m.transpose()).amax(), 0.0);
        }
        let d = dephasing_z(3, s);
        for (a, m) in d.matrices().iter().enumerate() {
            assert_eq!(m[(2 * a + 1, 2 * a)], 2.0 * 0.3 * 1.2);
            assert_eq!(m.iter().filter(|x| **x != 0.0).count(), 2);
        }
    }

    #[test]
    fn preset_names_roundtrip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("bogus".parse::<Preset>().is_err());
    }

    #[test]
    fn translation_covariance() {
        let n = 5;
        let shift = |m: &RMat| RMat::from_fn(2 * n, 2 * n, |i, j| m[((i + 2 * n - 2) % (2 * n), (j + 2 * n - 2) % (2 * n))]);
        let c = dephasing_xx_mix(n, ChannelStrengths::new(1.0, 1.0, 1.0)).unwrap();
        let mats = c.matrices();
        for m in &mats {
            let s = shift(m);
            assert!(mats.iter().any(|o| (o - &s).amax() == 0.0));
        }
    }
}
