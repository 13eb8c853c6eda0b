//! Block maxima by sub-sampling without replacement over a grid of block sizes.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_SUBSAMPLES: usize = 600;
pub const DEFAULT_GRID_POINTS: usize = 15;

/// Raw observations: at least two, all finite.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSample {
    values: Vec<f64>,
}

impl RawSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "raw sample needs at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite observation at index {i}")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Returns every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }
}

/// Largest admissible block size for `raw_size` observations: `floor(N (1 - 1/e))`.
pub fn grid_upper_limit(raw_size: usize) -> usize {
    (raw_size as f64 * (1.0 - (-1.0f64).exp())).floor() as usize
}

/// Strictly increasing block sizes in `[1, floor(N (1 - 1/e))]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    sizes: Vec<usize>,
}

impl BlockGrid {
    pub fn new(sizes: Vec<usize>, raw_size: usize) -> Result<Self> {
        let upper = grid_upper_limit(raw_size);
        if sizes.is_empty() {
            return Err(Error::InvalidInput("block grid is empty".into()));
        }
        if sizes[0] < 1 {
            return Err(Error::InvalidInput("block sizes must be >= 1".into()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("block sizes must be strictly increasing".into()));
        }
        let last = *sizes.last().unwrap();
        if last > upper {
            return Err(Error::InvalidInput(format!(
                "block size {last} exceeds floor(N(1-1/e)) = {upper} for N = {raw_size}"
            )));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

/// `point_count` log-spaced sizes from 1 to `floor(N (1 - 1/e))`, rounded and deduplicated.
/// The result may hold fewer points than requested; both endpoints are always present.
pub fn make_grid(raw_size: usize, point_count: usize) -> Result<BlockGrid> {
    make_grid_capped(raw_size, point_count, None)
}

/// As [`make_grid`], with the upper end additionally capped at `max_block`.
pub fn make_grid_capped(
    raw_size: usize,
    point_count: usize,
    max_block: Option<usize>,
) -> Result<BlockGrid> {
    if point_count < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2 points, got {point_count}"
        )));
    }
    let mut upper = grid_upper_limit(raw_size);
    if let Some(cap) = max_block {
        upper = upper.min(cap);
    }
    if upper < 1 {
        return Err(Error::InvalidInput(format!(
            "floor(N(1-1/e)) < 1 for N = {raw_size}; no admissible block size"
        )));
    }
    let log_upper = (upper as f64).ln();
    let last = point_count - 1;
    let mut sizes: Vec<usize> = (0..point_count)
        .map(|i| match i {
            0 => 1,
            i if i == last => upper,
            i => ((log_upper * i as f64 / last as f64).exp().round() as usize).clamp(1, upper),
        })
        .collect();
    sizes.dedup();
    BlockGrid::new(sizes, raw_size)
}

/// `m` maxima of blocks of `n` distinct elements drawn uniformly without replacement.
/// A pure function of `(values, n, m, seed)`.
pub fn subsample_maxima(values: &[f64], n: usize, m: usize, seed: u64) -> Result<Vec<f64>> {
    let total = values.len();
    if total == 0 {
        return Err(Error::InvalidInput("cannot sub-sample an empty sample".into()));
    }
    if n == 0 || n > total {
        return Err(Error::InvalidInput(format!(
            "block size {n} must lie in [1, {total}]"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidInput("subsample count must be >= 1".into()));
    }
    if n == total {
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok(vec![top; m]);
    }

    let mut rng = seed::rng(seed);
    // partial Fisher-Yates; the index array need not be reset between draws
    let mut idx: Vec<usize> = (0..total).collect();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let j = rng.random_range(i..total);
            idx.swap(i, j);
            best = best.max(values[idx[i]]);
        }
        out.push(best);
    }
    Ok(out)
}

/// Sub-sampled maxima for every size of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMaxima {
    grid: BlockGrid,
    maxima: Vec<Vec<f64>>,
    subsample_count: usize,
    seed: u64,
}

impl BlockMaxima {
    /// Builds from precomputed maxima; each list must hold exactly `subsample_count` entries.
    pub fn from_parts(grid: BlockGrid, maxima: Vec<Vec<f64>>, subsample_count: usize, seed: u64) -> Result<Self> {
        if maxima.len() != grid.len() {
            return Err(Error::InvalidInput("one maxima list per grid size required".into()));
        }
        if maxima.iter().any(|m| m.len() != subsample_count) {
            return Err(Error::InvalidInput(format!(
                "every maxima list must hold {subsample_count} entries"
            )));
        }
        Ok(Self { grid, maxima, subsample_count, seed })
    }

    pub fn grid(&self) -> &BlockGrid {
        &self.grid
    }

    pub fn subsample_count(&self) -> usize {
        self.subsample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(n, maxima)` pairs in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.grid.sizes().iter().copied().zip(self.maxima.iter().map(Vec::as_slice))
    }

    pub fn maxima_for(&self, n: usize) -> Option<&[f64]> {
        self.iter().find(|&(size, _)| size == n).map(|(_, m)| m)
    }

    /// Flat `n,replicate_index,maximum` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "replicate_index", "maximum"])?;
        for (n, maxima) in self.iter() {
            for (r, v) in maxima.iter().enumerate() {
                w.write_record([n.to_string(), r.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs [`subsample_maxima`] for every grid size. Sizes are processed in parallel; each
/// size draws from its own seed `derive(seed, n)`, so output does not depend on scheduling.
pub fn collect_block_maxima(raw: &RawSample, grid: &BlockGrid, m: usize, seed: u64) -> Result<BlockMaxima> {
    if let Some(&last) = grid.sizes().last() {
        if last > grid_upper_limit(raw.len()) {
            return Err(Error::InvalidInput(format!(
                "grid size {last} exceeds floor(N(1-1/e)) for N = {}",
                raw.len()
            )));
        }
    }
    let maxima = grid
        .sizes()
        .par_iter()
        .map(|&n| subsample_maxima(raw.values(), n, m, size_seed(seed, n)))
        .collect::<Result<Vec<_>>>()?;
    BlockMaxima::from_parts(grid.clone(), maxima, m, seed)
}

pub(crate) fn size_seed(seed: u64, n: usize) -> u64 {
    seed::derive(seed, &[n as u64])
}
