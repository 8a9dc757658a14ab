//! Cross-checks covariance-matrix dynamics against full density-matrix evolution for small chains.

use quasifree::channels::{ChannelStrengths, Preset};
use quasifree::ed::{oracle_compare, OracleOptions};
use quasifree::majorana::random_antisymmetric;
use quasifree::models::{xy_chain, XyParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasifree::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = OracleOptions::default();
    for preset in [Preset::LossGain, Preset::Paired, Preset::DephasingZ, Preset::XxCoupling] {
        for n in [2, 3] {
            let h = xy_chain(&XyParams::new(n, 1.0, 0.5, 2.0))?;
            let ch = preset.build(n, ChannelStrengths::new(0.3, 1.0, 0.5))?;
            let r = oracle_compare(&h, &ch, &random_antisymmetric(n, &mut rng), &opts)?;
            println!(
                "{:<12} N={n}  trajectory {:.2e}  spectrum {:.2e}  passed {}",
                preset.name(),
                r.trajectory_max_deviation,
                r.spectrum_subset_max_distance,
                r.passed
            );
        }
    }
    Ok(())
}
