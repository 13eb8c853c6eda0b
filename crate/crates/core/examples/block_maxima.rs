//! Sub-sampled block maxima over the default log-spaced grid, written as CSV.
//!
//! cargo run --example block_maxima -- [out.csv]

use tailrisk::blockmax::{collect_block_maxima, make_grid, RawSample};
use tailrisk::distributions::DistributionSpec;
use tailrisk::stats::{mean, median};

fn main() -> tailrisk::error::Result<()> {
    let values = DistributionSpec::pareto(1.0, 2.0)?.sample(5_000, 7);
    let raw = RawSample::new(values)?;
    let grid = make_grid(raw.len(), 15)?;
    let blocks = collect_block_maxima(&raw, &grid, 600, 11)?;

    println!("N = {}, grid upper end {}", raw.len(), grid.sizes().last().unwrap());
    for (n, maxima) in blocks.iter() {
        println!("n = {n:>5}  median max {:>9.3}  mean max {:>9.3}", median(maxima), mean(maxima));
    }
    if let Some(path) = std::env::args().nth(1) {
        blocks.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
