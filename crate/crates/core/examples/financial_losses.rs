//! Daily log losses from a price path, horizon scaling of the worst loss, and rolling
//! 365-day windows with blocks of 5 trading days.
//!
//! cargo run --release --example financial_losses

use chrono::{Duration, NaiveDate};
use tailrisk::blockmax::{make_grid, RawSample};
use tailrisk::distributions::DistributionSpec;
use tailrisk::ingest::{prices_to_losses, rolling_windows, ObservationSeries};
use tailrisk::mode::ModeConfig;
use tailrisk::scaling::ScalingAnalysis;
use tailrisk::timeseries::{analyze_groups, TimeseriesConfig};

fn main() -> tailrisk::error::Result<()> {
    // heavy-tailed synthetic returns: Student-t(3) scaled to ~1% daily volatility
    let returns = DistributionSpec::student_t(3.0)?.sample(252 * 12, 8);
    let start = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let mut price = 100.0;
    let mut recs = Vec::with_capacity(returns.len());
    for (i, r) in returns.iter().enumerate() {
        price *= (0.006 * r).exp();
        recs.push((start + Duration::days((i as i64 * 365) / 252), price));
    }
    let losses = prices_to_losses(&ObservationSeries::new(recs, "price")?)?;

    let raw = RawSample::new(losses.values())?;
    let grid = make_grid(raw.len(), 15)?;
    let (_, a) = ScalingAnalysis::run(&raw, &grid, 600, 42, &ModeConfig::default())?;
    println!("{} loss days, eta = {:.3} (tail index {:.2})", raw.len(), a.emr_fit.eta, a.emr_fit.ti);
    for days in [10.0, 252.0, 2520.0] {
        println!("worst loss over {days:>6} loss days: ~{:.2}%", 100.0 * a.emr_fit.extrapolate(days));
    }

    let windows: Vec<(String, ObservationSeries)> = rolling_windows(&losses, 365, 365)?
        .into_iter()
        .map(|(end, s)| (end.to_string(), s))
        .collect();
    let cfg = TimeseriesConfig { block_sizes: vec![5], ..TimeseriesConfig::default() };
    for row in analyze_groups(&windows, &cfg)? {
        println!(
            "{}: {:>3} losses, 5-day mpmr {:.3}%, emr {:.3}%",
            row.label,
            row.count,
            100.0 * row.mpmr.unwrap_or(f64::NAN),
            100.0 * row.emr.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
