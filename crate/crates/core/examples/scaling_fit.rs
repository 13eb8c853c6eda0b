//! Tail index from the growth of MPMR and EMR with block size, plus extrapolation.
//!
//! cargo run --release --example scaling_fit

use tailrisk::blockmax::{make_grid, RawSample};
use tailrisk::distributions::DistributionSpec;
use tailrisk::mode::ModeConfig;
use tailrisk::scaling::{fit_pooled_bm, ScalingAnalysis};

fn main() -> tailrisk::error::Result<()> {
    let spec = DistributionSpec::pareto(1.0, 2.0)?;
    let raw = RawSample::new(spec.sample(10_000, 2024))?;
    let grid = make_grid(raw.len(), 15)?;
    let (blocks, a) = ScalingAnalysis::run(&raw, &grid, 600, 1, &ModeConfig::default())?;

    println!("{:>6} {:>10} {:>10} {:>10}", "n", "mpmr", "emr", "exact");
    for (&(n, mpmr), &(_, emr)) in a.mpmr.iter().zip(&a.emr) {
        println!("{n:>6} {mpmr:>10.3} {emr:>10.3} {:>10.3}", spec.mpmr_closed_form(n as u64)?);
    }
    let pooled = fit_pooled_bm(&blocks)?;
    println!("mpmr fit: eta {:.4}, tail index {:.3}", a.mpmr_fit.eta, a.mpmr_fit.ti);
    println!("emr fit:  eta {:.4}, tail index {:.3}", a.emr_fit.eta, a.emr_fit.ti);
    println!("pooled:   eta {:.4}, tail index {:.3}", pooled.eta, pooled.ti);
    for n in [20_000u64, 100_000] {
        println!(
            "n = {n}: extrapolated mpmr {:.1} (exact {:.1})",
            a.mpmr_fit.extrapolate(n as f64),
            spec.mpmr_closed_form(n)?
        );
    }
    Ok(())
}
