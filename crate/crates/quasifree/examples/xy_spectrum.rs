//! Dense relaxation spectrum of a dephased XY chain and its ADR next to the thermodynamic-limit value.

use quasifree::analytics::xy_adr_closed_form;
use quasifree::channels::{dephasing_z, Channel, ChannelStrengths};
use quasifree::models::{xy_chain, XyParams};
use quasifree::spectral::{assemble, spectrum};
use quasifree::Tolerances;

fn main() -> quasifree::Result<()> {
    let (n, j, gamma, g) = (10, 1.0, 1.0, 0.01);
    let tol = Tolerances::default();
    println!("{:>5} {:>14} {:>14} {:>6}", "B", "ADR dense", "ADR N→∞", "zeros");
    for b in [0.0, 1.0, 2.0, 3.0, 4.0] {
        let h = xy_chain(&XyParams::new(n, j, gamma, b))?;
        let ch = Channel::Quadratic(dephasing_z(n, ChannelStrengths::new(g, 1.0, 0.0)));
        let sp = spectrum(&assemble(&h, &ch)?, &tol)?;
        println!("{b:>5.1} {:>14.6e} {:>14.6e} {:>6}", sp.adr, xy_adr_closed_form(gamma, b, j, g), sp.zero_cluster);
    }
    Ok(())
}
