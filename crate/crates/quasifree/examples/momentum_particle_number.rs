//! Large-N steady state of loss/gain solved mode by mode, against the closed-form particle number.

use quasifree::analytics::xy_particle_number_closed_form;
use quasifree::channels::{loss_gain, ChannelStrengths};
use quasifree::models::{xy_momentum, XyParams};
use quasifree::spectral::momentum_spectrum_linear;

fn main() -> quasifree::Result<()> {
    let (n, g) = (1000, 1e-3);
    for gamma in [0.3, 1.0] {
        for b in [0.5, 1.5, 2.5, 4.0] {
            let blocks = xy_momentum(&XyParams::new(n, 1.0, gamma, b))?;
            let ss = momentum_spectrum_linear(&blocks, &loss_gain(n, ChannelStrengths::new(g, 1.0, 0.0)))?;
            println!(
                "γ = {gamma}, B = {b}: Γ_jj,01 = {:.6}, closed form {:.6}",
                ss.site_polarization(),
                xy_particle_number_closed_form(gamma, b, 1.0, 1.0, 0.0)
            );
        }
    }
    Ok(())
}
