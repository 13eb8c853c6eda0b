//! Per-period and per-window MPMR, EMR and tail-index estimates.

use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockmax::{collect_block_maxima, make_grid_capped, subsample_maxima, RawSample};
use crate::error::Result;
use crate::ingest::{aggregation_block_size, ObservationSeries};
use crate::mode::ModeConfig;
use crate::scaling::{block_mode, ScalingAnalysis};
use crate::seed;
use crate::stats::mean;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesConfig {
    /// Fixed block sizes; empty means `ceil((1 - 1/e) * count)` per group.
    pub block_sizes: Vec<usize>,
    pub grid_points: usize,
    pub subsamples: usize,
    pub seed: u64,
    /// Upper cap on every block size, including the tail-index grid.
    pub max_block: Option<usize>,
    pub mode: ModeConfig,
}

impl Default for TimeseriesConfig {
    fn default() -> Self {
        Self {
            block_sizes: Vec::new(),
            grid_points: crate::blockmax::DEFAULT_GRID_POINTS,
            subsamples: crate::blockmax::DEFAULT_SUBSAMPLES,
            seed: 42,
            max_block: None,
            mode: ModeConfig::default(),
        }
    }
}

/// One output row. Estimates that could not be formed are `None` (empty CSV cells).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRow {
    pub label: String,
    pub count: usize,
    pub block_n: usize,
    pub mpmr: Option<f64>,
    pub emr: Option<f64>,
    pub ti_mpmr: Option<f64>,
    pub ti_emr: Option<f64>,
}

fn group_tail_indices(values: &[f64], index: u64, config: &TimeseriesConfig) -> (Option<f64>, Option<f64>) {
    let fit = || -> Result<ScalingAnalysis> {
        let raw = RawSample::new(values.to_vec())?;
        let grid = make_grid_capped(raw.len(), config.grid_points, config.max_block)?;
        let blocks = collect_block_maxima(&raw, &grid, config.subsamples, seed::derive(config.seed, &[index, u64::MAX]))?;
        ScalingAnalysis::from_blocks(&blocks, &config.mode)
    };
    match fit() {
        Ok(a) => (Some(a.mpmr_fit.ti), Some(a.emr_fit.ti)),
        Err(e) => {
            warn!("group {index}: no tail-index fit ({e})");
            (None, None)
        }
    }
}

/// Rows for each labelled group, in input order: one per configured block size that
/// fits inside the group. Groups with fewer than two observations are skipped.
pub fn analyze_groups(groups: &[(String, ObservationSeries)], config: &TimeseriesConfig) -> Result<Vec<TimeseriesRow>> {
    config.mode.validate()?;
    let per_group: Vec<Vec<TimeseriesRow>> = groups
        .par_iter()
        .enumerate()
        .map(|(gi, (label, series))| {
            let values = series.values();
            let count = values.len();
            if count < 2 {
                warn!("{label}: {count} observation(s), skipped");
                return Vec::new();
            }
            let cap = |n: usize| config.max_block.map_or(n, |c| n.min(c));
            let sizes: Vec<usize> = if config.block_sizes.is_empty() {
                vec![cap(aggregation_block_size(count))]
            } else {
                config.block_sizes.iter().map(|&n| cap(n)).collect()
            };
            let (ti_mpmr, ti_emr) = group_tail_indices(&values, gi as u64, config);
            sizes
                .into_iter()
                .filter(|&n| {
                    let fits = n >= 1 && n <= count;
                    if !fits {
                        warn!("{label}: block size {n} exceeds {count} observations, skipped");
                    }
                    fits
                })
                .map(|n| {
                    let maxima = subsample_maxima(&values, n, config.subsamples, seed::derive(config.seed, &[gi as u64, n as u64]));
                    let (mpmr, emr) = match maxima {
                        Ok(m) => (block_mode(n, &m, &config.mode), Some(mean(&m))),
                        Err(e) => {
                            warn!("{label}: block size {n}: {e}");
                            (None, None)
                        }
                    };
                    TimeseriesRow { label: label.clone(), count, block_n: n, mpmr, emr, ti_mpmr, ti_emr }
                })
                .collect()
        })
        .collect();
    Ok(per_group.into_iter().flatten().collect())
}

/// `label,count,block_n,mpmr,emr,ti_mpmr,ti_emr`.
pub fn write_timeseries_csv<W: Write>(rows: &[TimeseriesRow], writer: W) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["label", "count", "block_n", "mpmr", "emr", "ti_mpmr", "ti_emr"])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.count.to_string(),
            r.block_n.to_string(),
            opt(r.mpmr),
            opt(r.emr),
            opt(r.ti_mpmr),
            opt(r.ti_emr),
        ])?;
    }
    w.flush()?;
    Ok(())
}
