//! Earthquake energies: magnitude conversion, scaling fit of the largest quake and the
//! implied Gutenberg-Richter exponents. A synthetic catalog stands in for real data;
//! pass a USGS CSV (`time,mag,...`) to use that instead.
//!
//! cargo run --release --example earthquake_energy -- [catalog.csv]

use std::path::Path;

use tailrisk::blockmax::{make_grid, RawSample};
use tailrisk::distributions::DistributionSpec;
use tailrisk::ingest::{energy_to_magnitude, eta_to_gr, load_catalog_csv, magnitude_to_energy, CatalogSchema, SchemaKind};
use tailrisk::mode::ModeConfig;
use tailrisk::scaling::ScalingAnalysis;

fn main() -> tailrisk::error::Result<()> {
    let energies = match std::env::args().nth(1) {
        Some(p) => load_catalog_csv(Path::new(&p), &CatalogSchema::preset(SchemaKind::Earthquake))?.values(),
        None => {
            // magnitudes above 5.5 with b = 1.2, i.e. energies with tail index 0.8
            DistributionSpec::pareto(magnitude_to_energy(5.5), 0.8)?.sample(3_000, 5)
        }
    };
    let raw = RawSample::new(energies)?;
    let grid = make_grid(raw.len(), 15)?;
    let (_, a) = ScalingAnalysis::run(&raw, &grid, 600, 42, &ModeConfig::default())?;
    let gr = eta_to_gr(a.mpmr_fit.eta)?;
    println!("{} events, eta = {:.3}, B = {:.3}, b = {:.3}", raw.len(), a.mpmr_fit.eta, gr.big_b, gr.b_value);
    for n in [100u64, 450, 1_000] {
        let e = a.mpmr_fit.extrapolate(n as f64);
        println!("largest of {n:>5} events: {e:.3e} J (Mw {:.2})", energy_to_magnitude(e));
    }
    Ok(())
}
