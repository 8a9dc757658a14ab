//! Steady state under single-site loss and gain without a Hamiltonian: occupation, relaxation rate and pairing.

use quasifree::analytics::pairing_matrix;
use quasifree::channels::{loss_gain, paired, Channel, ChannelStrengths};
use quasifree::majorana::AntisymmetricMatrix;
use quasifree::spectral::{assemble, spectrum, steady_state_linear};
use quasifree::Tolerances;

fn main() -> quasifree::Result<()> {
    let (n, g, mu, nu) = (8, 0.3, 1.0, 0.6);
    let tol = Tolerances::default();
    let h = AntisymmetricMatrix::zeros(n);
    let s = ChannelStrengths::new(g, mu, nu);

    let sup = assemble(&h, &Channel::Linear(loss_gain(n, s)))?;
    let ss = steady_state_linear(&sup, &tol)?;
    let sp = spectrum(&sup, &tol)?;
    println!("loss/gain: <n_0> = {:.15}  expected {:.15}", ss.occupation(0), nu * nu / (mu * mu + nu * nu));
    println!("loss/gain: ADR = {:.15}  expected {:.15}", sp.adr, g * g * (mu * mu + nu * nu));
    println!("loss/gain: max |Q| = {:.3e}", pairing_matrix(&ss).iter().map(|z| z.norm()).fold(0.0, f64::max));

    let sup = assemble(&h, &Channel::Linear(paired(n, s)?))?;
    let q = pairing_matrix(&steady_state_linear(&sup, &tol)?);
    println!("paired:    Q_01 = {:.12}  Q_10 = {:.12}", q[(0, 1)], q[(1, 0)]);
    println!("paired:    |Q_01| expected {:.12}", mu * nu / (2.0 * (mu * mu + nu * nu)));
    Ok(())
}
