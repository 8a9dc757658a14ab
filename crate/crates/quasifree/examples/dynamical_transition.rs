//! Without a Hamiltonian, dephasing plus neighbour coupling gives an ADR with a kink at μ = ν.

use quasifree::channels::{dephasing_z, xx_coupling, Channel, ChannelStrengths};
use quasifree::majorana::AntisymmetricMatrix;
use quasifree::spectral::{assemble, spectrum};
use quasifree::Tolerances;

fn main() -> quasifree::Result<()> {
    let (n, g) = (6, 0.1);
    let h = AntisymmetricMatrix::zeros(n);
    for k in 0..=10 {
        let mu = 0.5 + 0.1 * k as f64;
        let nu = 1.0;
        let s = ChannelStrengths::new(g, mu, nu);
        let mut q = dephasing_z(n, s);
        q.terms.extend(xx_coupling(n, s)?.terms);
        let ch = Channel::Quadratic(q);
        let adr = spectrum(&assemble(&h, &ch)?, &Tolerances::default())?.adr;
        println!("μ/ν = {:.2}  ADR = {adr:.10}  4g²min(μ²,ν²) = {:.10}", mu / nu, 4.0 * g * g * mu.min(nu).powi(2));
    }
    Ok(())
}
