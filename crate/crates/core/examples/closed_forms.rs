//! Most probable and expected maximum for each supported family, checked against the
//! numeric root of the block-maximum density's stationarity condition.
//!
//! cargo run --example closed_forms

use tailrisk::distributions::DistributionSpec;
use tailrisk::scaling::{numeric_mpmr_for, ModeCondition};

fn main() -> tailrisk::error::Result<()> {
    let families = [
        DistributionSpec::pareto(1.0, 2.0)?,
        DistributionSpec::exponential(1.0)?,
        DistributionSpec::normal(1.0)?,
        DistributionSpec::student_t(3.0)?,
    ];
    for spec in &families {
        println!("{}", spec.name());
        println!("  {:>8} {:>14} {:>14} {:>14}", "n", "mpmr", "numeric", "emr");
        for n in [1u64, 10, 100, 1000, 10_000] {
            let stats = spec.max_statistics(n)?;
            // the normal closed form solves the large-n condition; the t form is a
            // power-law approximation with its own tail constant, so no root is shown
            let cond = match spec {
                DistributionSpec::Pareto { .. } | DistributionSpec::Exponential { .. } => Some(ModeCondition::Exact),
                DistributionSpec::Normal { .. } => Some(ModeCondition::LargeN),
                DistributionSpec::StudentT { .. } => None,
            };
            let numeric = cond
                .and_then(|c| numeric_mpmr_for(spec, n, c).ok())
                .map_or("-".into(), |v| format!("{v:.6}"));
            let emr = stats.emr.map_or("-".into(), |v| format!("{v:.6}"));
            println!("  {:>8} {:>14.6} {:>14} {:>14}", n, stats.mpmr, numeric, emr);
        }
    }
    Ok(())
}
