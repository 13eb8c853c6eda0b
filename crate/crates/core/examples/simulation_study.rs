//! A small Monte-Carlo study: bias and spread of each estimator for Student-t tails.
//!
//! cargo run --release --example simulation_study

use tailrisk::sim::{run_study, write_summary_csv, SimConfig};

fn main() -> tailrisk::error::Result<()> {
    let cfg = SimConfig {
        nu_values: vec![2.0, 4.0],
        effective_sizes: vec![100, 500],
        replications: 40,
        subsamples: 300,
        ..SimConfig::default()
    };
    let summary = run_study(&cfg)?;
    write_summary_csv(&summary, std::io::stdout())?;
    Ok(())
}
