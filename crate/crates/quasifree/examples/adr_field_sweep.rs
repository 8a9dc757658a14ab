//! ADR/g² against the field for several anisotropies, from the closed form and a finite momentum sum.

use quasifree::analytics::{adr_weak_coupling_sum, xy_adr_closed_form};
use quasifree::models::{xy_momentum, XyParams};

fn main() -> quasifree::Result<()> {
    let (n, j, g) = (400, 1.0, 1e-3);
    let gammas = [0.1, 0.3, 0.5, 1.0];
    print!("{:>5}", "B");
    for gm in gammas {
        print!("  {:>10} {:>10}", format!("γ={gm}"), "sum");
    }
    println!();
    for i in 0..=24 {
        let b = 0.25 * i as f64 + 0.01;
        print!("{b:>5.2}");
        for gm in gammas {
            let blocks = xy_momentum(&XyParams::new(n, j, gm, b))?;
            let sum = adr_weak_coupling_sum(&blocks, g)?;
            print!("  {:>10.6} {:>10.6}", xy_adr_closed_form(gm, b, j, g) / (g * g), sum / (g * g));
        }
        println!();
    }
    Ok(())
}
