//! Closed-form and perturbative results for translationally invariant chains: weak-coupling decay rates,
//! finite-N momentum sums, thermodynamic-limit XY formulas, pole locations and the pairing measure.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorana::CovarianceMatrix;
use crate::momentum::MomentumBlocks;

/// Smallest admissible `β_m` before a mode counts as exactly critical.
pub const CRITICAL_BETA: f64 = 1e-12;

/// Per-mode perturbation-theory quantities.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationData {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `a_m = (k_m - l_m) / (2 β_m)`.
    pub a: Vec<f64>,
    /// `b_m = Im(h_m) / β_m`.
    pub b: Vec<f64>,
    /// `c_m = Re(h_m) / β_m`.
    pub c: Vec<f64>,
}

impl PerturbationData {
    pub fn new(blocks: &MomentumBlocks) -> Result<Self> {
        let n = blocks.n();
        let mut out = PerturbationData {
            alpha: Vec::with_capacity(n),
            beta: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            c: Vec::with_capacity(n),
        };
        for (m, mode) in blocks.modes.iter().enumerate() {
            let beta = mode.beta();
            if !(beta >= CRITICAL_BETA) {
                return Err(Error::DegenerateMode { mode: m, reason: format!("β = {beta:.3e} vanishes") });
            }
            out.alpha.push(mode.alpha());
            out.beta.push(beta);
            out.a.push(0.5 * (mode.k - mode.l) / beta);
            out.b.push(mode.h.im / beta);
            out.c.push(mode.h.re / beta);
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    /// Largest `|a_m² + b_m² + c_m² - 1|`.
    pub fn normalization_defect(&self) -> f64 {
        (0..self.n())
            .map(|m| (self.a[m].powi(2) + self.b[m].powi(2) + self.c[m].powi(2) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Δ_P = ⟨c|c⟩`.
    pub fn delta_p(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }
}

/// Degenerate-sector perturbation matrix with its rank-3 decomposition.
#[derive(Clone, Debug)]
pub struct PerturbationMatrix {
    pub p: DMatrix<f64>,
    pub data: PerturbationData,
    /// `Δ_P = Σ_m Re(h_m)² / β_m²`.
    pub delta_p: f64,
    /// `‖P - (|c⟩⟨c| + |b⟩⟨b| - |a⟩⟨a|)‖_max`.
    pub reconstruction_defect: f64,
    pub c_dot_a: f64,
    pub c_dot_b: f64,
}

/// `P_mn = [2 h_m h_n* + 2 h_m* h_n - (k_m - l_m)(k_n - l_n)] / (4 β_m β_n)`, built entrywise.
pub fn perturbation_matrix(blocks: &MomentumBlocks) -> Result<PerturbationMatrix> {
    let data = PerturbationData::new(blocks)?;
    let n = blocks.n();
    let modes = &blocks.modes;
    let p = DMatrix::from_fn(n, n, |m, k| {
        let (x, y) = (modes[m], modes[k]);
        let num = 4.0 * (x.h * y.h.conj()).re - (x.k - x.l) * (y.k - y.l);
        num / (4.0 * data.beta[m] * data.beta[k])
    });
    let va = DVector::from_column_slice(&data.a);
    let vb = DVector::from_column_slice(&data.b);
    let vc = DVector::from_column_slice(&data.c);
    let rebuilt = &vc * vc.transpose() + &vb * vb.transpose() - &va * va.transpose();
    let reconstruction_defect = (&p - rebuilt).amax();
    Ok(PerturbationMatrix {
        p,
        delta_p: data.delta_p(),
        reconstruction_defect,
        c_dot_a: vc.dot(&va),
        c_dot_b: vc.dot(&vb),
        data,
    })
}

/// Weak-coupling ADR for site-local dephasing (`μ = 1`, `ν = 0`):
/// `Δ = (4g²/N) Σ_m [4 Im(h_m)² + (k_m - l_m)²] / [4|h_m|² + (k_m - l_m)²]`.
pub fn adr_weak_coupling_sum(blocks: &MomentumBlocks, g: f64) -> Result<f64> {
    PerturbationData::new(blocks)?;
    let n = blocks.n() as f64;
    let s: f64 = blocks
        .modes
        .iter()
        .map(|m| {
            let kl = (m.k - m.l).powi(2);
            (4.0 * m.h.im.powi(2) + kl) / (4.0 * m.h.norm_sqr() + kl)
        })
        .sum();
    Ok(4.0 * g * g * s / n)
}

/// The three momentum sums entering the two lowest rates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateConstants {
    pub eps_z: f64,
    pub eps_x: f64,
    pub eps: f64,
}

/// `ε_z = (μ²/N) Σ c_m²`, `ε_x = (ν²/N) Σ c̃_m²`, `ε = (μν/N) Σ c_m c̃_m` with
/// `c̃_m = Re(h_m e^{-2πim/N}) / β_m`.
pub fn rate_constants(blocks: &MomentumBlocks, mu: f64, nu: f64) -> Result<RateConstants> {
    let data = PerturbationData::new(blocks)?;
    let n = blocks.n();
    let (mut z, mut x, mut e) = (0.0, 0.0, 0.0);
    for (m, mode) in blocks.modes.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64);
        let c = data.c[m];
        let ct = (mode.h * phase).re / data.beta[m];
        z += c * c;
        x += ct * ct;
        e += c * ct;
    }
    let nf = n as f64;
    Ok(RateConstants { eps_z: mu * mu * z / nf, eps_x: nu * nu * x / nf, eps: mu * nu * e / nf })
}

/// Two lowest weak-coupling rates `(Δ₊, Δ₋)` for the mixed dephasing / neighbour-coupling channel:
/// `Δ±/4g² = μ² + ν² - (ε_z + ε_x)/2 ± sqrt(((ε_z - ε_x)/2)² + ε²)`.
pub fn two_lowest_rates(blocks: &MomentumBlocks, g: f64, mu: f64, nu: f64) -> Result<(f64, f64)> {
    let k = rate_constants(blocks, mu, nu)?;
    Ok(rates_from_constants(&k, g, mu, nu))
}

/// Evaluates the two-rate formula from given constants.
pub fn rates_from_constants(k: &RateConstants, g: f64, mu: f64, nu: f64) -> (f64, f64) {
    let base = mu * mu + nu * nu - 0.5 * (k.eps_z + k.eps_x);
    let root = (0.25 * (k.eps_z - k.eps_x).powi(2) + k.eps * k.eps).sqrt();
    let s = 4.0 * g * g;
    ((s * (base + root)).abs(), (s * (base - root)).abs())
}

/// Thermodynamic-limit constants for the `γ = 1` chain, in units of `μ²`, `ν²` and `μν`.
pub fn xy_ising_rate_constants(b: f64, j: f64) -> RateConstants {
    let r = b / (2.0 * j);
    if r <= 1.0 {
        RateConstants { eps_z: 0.5, eps_x: 1.0 - 0.5 * r * r, eps: -0.5 * r }
    } else {
        RateConstants { eps_z: 1.0 - 0.5 / (r * r), eps_x: 0.5, eps: -0.5 / r }
    }
}

/// `s = sqrt(1 - (2J/B)² (1 - γ²))` and `x = (2J/B)²` for the `B ≥ 2J` branch.
fn outer_branch(gamma: f64, b: f64, j: f64) -> (f64, f64) {
    let x = (2.0 * j / b).powi(2);
    let s = (1.0 - x * (1.0 - gamma * gamma)).max(0.0).sqrt();
    (s, x)
}

/// Both branches of the thermodynamic-limit ADR of the XY chain with site-local dephasing, as `(inner, outer)`.
/// Inner (`B ≤ 2J`): `4g²|γ|/(1+|γ|)`. Outer (`B ≥ 2J`): `4g² γ²/(1-γ²) ([1 - (2J/B)²(1-γ²)]^{-1/2} - 1)`,
/// evaluated as `4g² γ² x / (s (1 + s))` which is regular at `|γ| = 1`.
pub fn xy_adr_branches(gamma: f64, b: f64, j: f64, g: f64) -> (f64, f64) {
    let ga = gamma.abs();
    let (s, x) = outer_branch(gamma, b.abs(), j);
    (4.0 * g * g * ga / (1.0 + ga), 4.0 * g * g * gamma * gamma * x / (s * (1.0 + s)))
}

/// Thermodynamic-limit ADR, selecting the branch of [`xy_adr_branches`] by `|B|` against `2J`.
pub fn xy_adr_closed_form(gamma: f64, b: f64, j: f64, g: f64) -> f64 {
    let (inner, outer) = xy_adr_branches(gamma, b, j, g);
    if b.abs() <= 2.0 * j {
        inner
    } else {
        outer
    }
}

/// Both branches of the steady-state `Γ_{jj,01}` under weak site-local loss/gain, as `(inner, outer)`.
/// Prefactor `(μ²-ν²)/(μ²+ν²)` times `1/(1+|γ|)` (inner) or `(1 - γ²/s)/(1 - γ²)` evaluated as
/// `(1 - x/(1+s))/s` (outer).
pub fn xy_particle_number_branches(gamma: f64, b: f64, j: f64, mu: f64, nu: f64) -> (f64, f64) {
    let p = (mu * mu - nu * nu) / (mu * mu + nu * nu);
    let (s, x) = outer_branch(gamma, b.abs(), j);
    (p / (1.0 + gamma.abs()), p * (1.0 - x / (1.0 + s)) / s)
}

/// Thermodynamic-limit steady-state `Γ_{jj,01}` of the XY chain under weak site-local loss/gain.
pub fn xy_particle_number_closed_form(gamma: f64, b: f64, j: f64, mu: f64, nu: f64) -> f64 {
    let (inner, outer) = xy_particle_number_branches(gamma, b, j, mu, nu);
    if b.abs() <= 2.0 * j {
        inner
    } else {
        outer
    }
}

/// Finite-N weak-coupling steady-state `Γ_{jj,01} = p (1/N) Σ_n Re(h_n)² / β_n²`.
pub fn particle_number_sum(blocks: &MomentumBlocks, mu: f64, nu: f64) -> Result<f64> {
    let data = PerturbationData::new(blocks)?;
    let p = (mu * mu - nu * nu) / (mu * mu + nu * nu);
    Ok(p * data.delta_p() / blocks.n() as f64)
}

/// Pole of the XY momentum integrand.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Pole {
    pub z: Complex64,
    pub inside: bool,
    pub critical: bool,
}

/// `z⁰ = 0` and `z± = [B ± sqrt(B² - 4J²(1-γ²))] / (2J(1+γ))`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoleSet {
    pub zero: Pole,
    pub plus: Pole,
    pub minus: Pole,
}

impl PoleSet {
    pub fn any_critical(&self) -> bool {
        self.plus.critical || self.minus.critical
    }
}

fn classify(z: Complex64, tol: f64) -> Pole {
    let r = z.norm();
    Pole { z, inside: r < 1.0 - tol, critical: (r - 1.0).abs() <= tol }
}

pub fn poles(b: f64, j: f64, gamma: f64) -> Result<PoleSet> {
    if !(j > 0.0) {
        return Err(Error::InvalidParameter(format!("J must be positive, got {j}")));
    }
    if gamma == -1.0 {
        return Err(Error::InvalidParameter("γ = -1 puts the poles at infinity; use γ → -γ".into()));
    }
    let disc = Complex64::new(b * b - 4.0 * j * j * (1.0 - gamma * gamma), 0.0).sqrt();
    let den = 2.0 * j * (1.0 + gamma);
    let tol = 1e-12;
    Ok(PoleSet {
        zero: classify(Complex64::new(0.0, 0.0), tol),
        plus: classify((b + disc) / den, tol),
        minus: classify((b - disc) / den, tol),
    })
}

/// `Q_kl = ⟨(i/2)[a_k, a_l]⟩ = (Γ_{k0,l0} - iΓ_{k0,l1} - iΓ_{k1,l0} - Γ_{k1,l1}) / 4`.
pub fn pairing_matrix(gamma: &CovarianceMatrix) -> DMatrix<Complex64> {
    let g = gamma.matrix();
    let n = g.nrows() / 2;
    DMatrix::from_fn(n, n, |k, l| {
        Complex64::new(g[(2 * k, 2 * l)] - g[(2 * k + 1, 2 * l + 1)], -g[(2 * k, 2 * l + 1)] - g[(2 * k + 1, 2 * l)]) * 0.25
    })
}
