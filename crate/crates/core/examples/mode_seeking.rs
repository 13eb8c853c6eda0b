//! Mean-shift mode of simulated block maxima against the exact most probable maximum.
//!
//! cargo run --example mode_seeking

use tailrisk::blockmax::subsample_maxima;
use tailrisk::distributions::DistributionSpec;
use tailrisk::mode::{mean_shift_mode, rule_of_thumb_bandwidth, ModeConfig, ModeInit};

fn main() -> tailrisk::error::Result<()> {
    let spec = DistributionSpec::exponential(1.0)?;
    let pool = spec.sample(20_000, 3);
    for n in [5usize, 50, 500] {
        let maxima = subsample_maxima(&pool, n, 2_000, 9)?;
        let h = rule_of_thumb_bandwidth(&maxima)?;
        let from_median = mean_shift_mode(&maxima, &ModeConfig::default())?;
        let from_mean = mean_shift_mode(&maxima, &ModeConfig::default().with_init(ModeInit::Mean))?;
        println!(
            "n = {n:>3}: bandwidth {h:.3}, mode {from_median:.4} (mean start {from_mean:.4}), exact ln n = {:.4}",
            spec.mpmr_closed_form(n as u64)?
        );
    }
    Ok(())
}
