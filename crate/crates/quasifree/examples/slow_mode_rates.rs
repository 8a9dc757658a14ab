//! Perturbative slow-mode structure: perturbation matrix, two lowest rates and contour poles.

use quasifree::analytics::{perturbation_matrix, poles, two_lowest_rates, xy_ising_rate_constants, rates_from_constants};
use quasifree::channels::{dephasing_xx_mix, Channel, ChannelStrengths};
use quasifree::models::{xy_chain, XyParams};
use quasifree::momentum::to_momentum;
use quasifree::spectral::{assemble, spectrum};
use quasifree::Tolerances;

fn main() -> quasifree::Result<()> {
    let (n, g, mu, nu) = (10, 0.01, 1.0, 1.0);
    for b in [1.0, 3.0] {
        let h = xy_chain(&XyParams::new(n, 1.0, 1.0, b))?;
        let blocks = to_momentum(&h, 1e-10)?;
        let pm = perturbation_matrix(&blocks)?;
        let (up, low) = two_lowest_rates(&blocks, g, mu, nu)?;
        let (up_inf, low_inf) = rates_from_constants(&xy_ising_rate_constants(b, 1.0), g, mu, nu);
        let ch = Channel::Quadratic(dephasing_xx_mix(n, ChannelStrengths::new(g, mu, nu))?);
        let sp = spectrum(&assemble(&h, &ch)?, &Tolerances::default())?;
        let p = poles(b, 1.0, 1.0)?;
        println!("B = {b}: Δ_P = {:.6}, reconstruction defect {:.1e}", pm.delta_p, pm.reconstruction_defect);
        println!("  rates N={n}: {low:.6e} {up:.6e}; N→∞: {low_inf:.6e} {up_inf:.6e}; dense ADR {:.6e}", sp.adr);
        println!("  |z+| = {:.4}, |z-| = {:.4}", p.plus.z.norm(), p.minus.z.norm());
    }
    Ok(())
}
