//! Property checks shared by the proptest suite and the acceptance run.

#![allow(dead_code)]

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64;
use quasifree::analytics::{xy_adr_branches, xy_particle_number_branches, PerturbationData};
use quasifree::channels::{Channel, LinearChannel, QuadraticChannel};
use quasifree::evolution::{evolve, max_step, Backend, EvolveOptions};
use quasifree::majorana::{random_antisymmetric, random_mixed_cm, AntisymmetricMatrix, RMat};
use quasifree::models::{from_blocks, xy_chain, TiBlockSpec, XyParams};
use quasifree::momentum::to_momentum;
use quasifree::spectral::{assemble, Superoperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Channel families exercised by the properties.
#[derive(Clone, Copy, Debug)]
pub enum ChannelKind {
    Linear,
    Quadratic,
}

pub fn random_channel(kind: ChannelKind, n: usize, rng: &mut ChaCha8Rng) -> Channel {
    let count = rng.random_range(1..=3);
    match kind {
        ChannelKind::Linear => {
            let vs = (0..count)
                .map(|_| {
                    DVector::from_fn(2 * n, |_, _| {
                        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * 0.5
                    })
                })
                .collect();
            Channel::Linear(LinearChannel::from_vectors(n, vs).expect("valid vectors"))
        }
        ChannelKind::Quadratic => {
            let ms = (0..count).map(|_| random_antisymmetric(n, rng).into_matrix() * 0.5).collect();
            Channel::Quadratic(QuadraticChannel::from_matrices(n, ms).expect("valid matrices"))
        }
    }
}

fn random_system(kind: ChannelKind, n: usize, seed: u64) -> (Superoperator, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_antisymmetric(n, &mut rng);
    let ch = random_channel(kind, n, &mut rng);
    (assemble(&h, &ch).expect("assembles"), rng)
}

fn asym(m: &RMat) -> f64 {
    (m + m.transpose()).amax()
}

/// Integration keeps Γ exactly antisymmetric, and so does a single application of the generator.
pub fn antisymmetry_preserved(kind: ChannelKind, n: usize, seed: u64) -> Check {
    let (s, mut rng) = random_system(kind, n, seed);
    let g0 = random_mixed_cm(n, &mut rng);
    let out = s.rhs(g0.matrix());
    let scale = out.amax().max(1.0);
    ensure(asym(&out) <= 1e-12 * scale, || format!("generator output asymmetry {:.3e}", asym(&out)))?;
    let dt = max_step(&s);
    let opts = EvolveOptions { t_end: 40.0 * dt, dt, sample_every: 4, backend: Backend::Direct };
    let traj = evolve(&g0, &s, &RMat::zeros(2 * n, 2 * n), &opts).map_err(|e| e.to_string())?;
    ensure(traj.max_antisymmetry_defect <= 1e-12, || {
        format!("trajectory asymmetry {:.3e}", traj.max_antisymmetry_defect)
    })
}

/// Every eigenvalue of an assembled superoperator has non-positive real part.
pub fn spectrum_stable(kind: ChannelKind, n: usize, seed: u64) -> Check {
    let (s, _) = random_system(kind, n, seed);
    let eig = s.spectrum_values().map_err(|e| e.to_string())?;
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let worst = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    ensure(worst <= 1e-10 * scale, || format!("max Re λ = {worst:.3e} (scale {scale:.3e})"))
}

/// `d/dt ‖Γ‖_F² = 2⟨Γ, 𝒮(Γ) + D⟩` equals `-Σ_α ‖[L^α, Γ]‖_F²` for Hermitian quadratic channels.
pub fn norm_contraction(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_antisymmetric(n, &mut rng);
    let ch = random_channel(ChannelKind::Quadratic, n, &mut rng);
    let Channel::Quadratic(q) = &ch else { unreachable!() };
    let ls = q.matrices();
    let s = assemble(&h, &ch).map_err(|e| e.to_string())?;
    let g = random_antisymmetric(n, &mut rng).into_matrix();
    let lhs = 2.0 * g.dot(&s.rhs(&g));
    let rhs: f64 = -ls.iter().map(|l| (l * &g - &g * l).norm_squared()).sum::<f64>();
    ensure(rhs <= 0.0, || format!("rhs {rhs:.3e} positive"))?;
    ensure((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), || {
        format!("d/dt‖Γ‖² = {lhs:.15e}, -Σ‖[L,Γ]‖² = {rhs:.15e}")
    })
}

/// A random translation-invariant Hamiltonian with couplings up to range 2.
pub fn random_ti_hamiltonian(n: usize, seed: u64) -> AntisymmetricMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = || rng.sample::<f64, _>(StandardNormal);
    let h0 = Matrix2::new(0.0, r(), 0.0, 0.0);
    let h1 = Matrix2::new(r(), r(), r(), r());
    let h2 = Matrix2::new(r(), r(), r(), r());
    let mut spec = TiBlockSpec::nearest_neighbour(n, h0, h1);
    if n > 4 {
        spec = spec.with_block(2, h2).with_block(-2, -h2.transpose());
    }
    from_blocks(&spec).expect("valid blocks")
}

/// `h_{-n} = h_n*`, `k_{-n} = -k_n`, `l_{-n} = -l_n` for momentum blocks of a real Hamiltonian.
pub fn momentum_symmetries(n: usize, seed: u64) -> Check {
    let h = random_ti_hamiltonian(n, seed);
    let blocks = to_momentum(&h, 1e-10).map_err(|e| e.to_string())?;
    let d = blocks.symmetry_defect();
    ensure(d <= 1e-12 * h.matrix().amax().max(1.0), || format!("symmetry defect {d:.3e}"))
}

/// `a_m² + b_m² + c_m² = 1` for every mode of a non-critical XY chain.
pub fn abc_normalized(n: usize, gamma: f64, b: f64) -> Check {
    let h = xy_chain(&XyParams::new(n, 1.0, gamma, b)).map_err(|e| e.to_string())?;
    let blocks = to_momentum(&h, 1e-10).map_err(|e| e.to_string())?;
    let data = PerturbationData::new(&blocks).map_err(|e| e.to_string())?;
    let d = data.normalization_defect();
    ensure(d <= 1e-12, || format!("normalization defect {d:.3e}"))
}

/// Both closed forms have matching branches at `B = 2J`.
pub fn closed_forms_continuous(gamma: f64, j: f64, g: f64, mu: f64, nu: f64) -> Check {
    let b = 2.0 * j;
    let (ai, ao) = xy_adr_branches(gamma, b, j, g);
    ensure((ai - ao).abs() < 1e-12, || format!("ADR branches {ai:.15e} vs {ao:.15e}"))?;
    let (pi, po) = xy_particle_number_branches(gamma, b, j, mu, nu);
    ensure((pi - po).abs() < 1e-12, || format!("particle-number branches {pi:.15e} vs {po:.15e}"))
}
