//! Tail-index estimators: the scaling-based MPMR/EMR estimators and the classical baselines
//! they are benchmarked against.
//!
//! All baselines work on a [`TailSample`] (the retained upper tail, threshold = its minimum)
//! and are scale invariant: every formula uses ratios or log-differences of the data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::blockmax::{collect_block_maxima, make_grid, RawSample, DEFAULT_GRID_POINTS, DEFAULT_SUBSAMPLES};
use crate::error::{Error, Result};
use crate::mode::ModeConfig;
use crate::scaling::{emr_series, fit_loglog, mpmr_series, FitSource, ScalingFit};
use crate::special::log_gamma;
use crate::stats::{mean, sorted_copy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mpmr,
    Emr,
    Hill,
    LeastSquares,
    WeightedLeastSquares,
    Percentiles,
    ModifiedPercentiles,
    GeometricPercentiles,
    Mle,
    Moments,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Mpmr,
        Method::Emr,
        Method::Hill,
        Method::LeastSquares,
        Method::WeightedLeastSquares,
        Method::Percentiles,
        Method::ModifiedPercentiles,
        Method::GeometricPercentiles,
        Method::Mle,
        Method::Moments,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mpmr => "mpmr",
            Method::Emr => "emr",
            Method::Hill => "hill",
            Method::LeastSquares => "least-squares",
            Method::WeightedLeastSquares => "weighted-least-squares",
            Method::Percentiles => "percentiles",
            Method::ModifiedPercentiles => "modified-percentiles",
            Method::GeometricPercentiles => "geometric-percentiles",
            Method::Mle => "mle",
            Method::Moments => "moments",
        }
    }

    /// True for the estimators built on block-maxima scaling.
    pub fn is_scaling(&self) -> bool {
        matches!(self, Method::Mpmr | Method::Emr)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(Method::as_str).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown estimator '{s}'; valid identifiers: {}",
                    Self::valid_names()
                ))
            })
    }
}

/// A successful tail-index estimate. Failures are reported as errors, never clamped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TIEstimate {
    pub method: Method,
    pub xi_hat: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

fn finish(method: Method, xi_hat: f64, diagnostics: &[(&str, f64)]) -> Result<TIEstimate> {
    if !(xi_hat.is_finite() && xi_hat > 0.0) {
        return Err(Error::Degenerate(format!("{method}: estimate {xi_hat} is not positive")));
    }
    Ok(TIEstimate {
        method,
        xi_hat,
        diagnostics: diagnostics.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
    })
}

/// Retained upper tail: strictly positive values sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct TailSample {
    values: Vec<f64>,
}

impl TailSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("tail sample is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "tail sample values must be finite and > 0, found {v}"
            )));
        }
        Ok(Self { values: sorted_copy(&values) })
    }

    /// The `count` largest values of `raw`.
    pub fn top(raw: &[f64], count: usize) -> Result<Self> {
        if count == 0 || count > raw.len() {
            return Err(Error::InvalidInput(format!(
                "cannot keep {count} of {} values",
                raw.len()
            )));
        }
        let sorted = sorted_copy(raw);
        let top = sorted[sorted.len() - count..].to_vec();
        if !(top[0] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "top {count} values include nonpositive entries; too few positive values"
            )));
        }
        Self::new(top)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn threshold(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    fn require(&self, min: usize, method: Method) -> Result<()> {
        if self.len() < min {
            return Err(Error::InvalidInput(format!(
                "{method} needs at least {min} tail values, got {}",
                self.len()
            )));
        }
        Ok(())
    }

    fn log_excess_sum(&self) -> f64 {
        let t = self.threshold();
        self.values.iter().map(|v| (v / t).ln()).sum()
    }
}

/// The largest `ceil(tail_fraction * count)` values of `raw`.
pub fn make_tail_sample(raw: &[f64], tail_fraction: f64) -> Result<TailSample> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::Config(format!("tail fraction must lie in (0, 1), got {tail_fraction}")));
    }
    if raw.is_empty() {
        return Err(Error::InvalidInput("raw sample is empty".into()));
    }
    TailSample::top(raw, tail_size(raw.len(), tail_fraction))
}

/// `ceil(tail_fraction * count)`, ignoring float noise in the product, at least 1.
pub fn tail_size(count: usize, tail_fraction: f64) -> usize {
    let exact = tail_fraction * count as f64;
    ((exact - 1e-9 * exact.max(1.0)).ceil() as usize).clamp(1, count)
}

/// Hill estimator with `k = count - 1` upper order statistics over the sample minimum.
pub fn hill(tail: &TailSample) -> Result<TIEstimate> {
    tail.require(2, Method::Hill)?;
    let k = tail.len() - 1;
    let s = tail.log_excess_sum();
    if s == 0.0 {
        return Err(Error::Degenerate("hill: all tail values equal".into()));
    }
    finish(Method::Hill, k as f64 / s, &[("k", k as f64)])
}

/// Pareto maximum likelihood with the threshold fixed at the sample minimum.
pub fn mle(tail: &TailSample) -> Result<TIEstimate> {
    tail.require(2, Method::Mle)?;
    let s = tail.log_excess_sum();
    if s == 0.0 {
        return Err(Error::Degenerate("mle: all tail values equal".into()));
    }
    finish(Method::Mle, tail.len() as f64 / s, &[("count", tail.len() as f64)])
}

fn weighted_slope(xs: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64) {
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn distinct_count(sorted: &[f64]) -> usize {
    1 + sorted.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Log empirical CCDF against log value, plotting position `(count - rank + 0.5) / count`.
fn ccdf_points(tail: &TailSample) -> (Vec<f64>, Vec<f64>) {
    let m = tail.len() as f64;
    let xs = tail.values.iter().map(|v| v.ln()).collect();
    let ys = (1..=tail.len())
        .map(|r| ((m - r as f64 + 0.5) / m).ln())
        .collect();
    (xs, ys)
}

/// CCDF regression with arbitrary weights; `xi = -slope`.
pub fn ccdf_regression(tail: &TailSample, weights: &[f64], method: Method) -> Result<TIEstimate> {
    if distinct_count(&tail.values) < 3 {
        return Err(Error::Degenerate(format!("{method}: needs at least 3 distinct values")));
    }
    if weights.len() != tail.len() {
        return Err(Error::InvalidInput("one weight per tail value required".into()));
    }
    let (xs, ys) = ccdf_points(tail);
    let (slope, intercept) = weighted_slope(&xs, &ys, weights);
    finish(method, -slope, &[("intercept", intercept)])
}

/// Unweighted OLS of log empirical CCDF on log value.
pub fn least_squares_ccdf(tail: &TailSample) -> Result<TIEstimate> {
    ccdf_regression(tail, &vec![1.0; tail.len()], Method::LeastSquares)
}

/// CCDF regression weighted by the number of observations at or above each point,
/// which is inversely proportional to the variance of the log-CCDF estimate there.
pub fn weighted_least_squares_ccdf(tail: &TailSample) -> Result<TIEstimate> {
    let m = tail.len();
    let weights: Vec<f64> = (1..=m).map(|r| (m - r + 1) as f64).collect();
    ccdf_regression(tail, &weights, Method::WeightedLeastSquares)
}

/// Empirical quantile with plotting positions `i / (count + 1)`, interpolating `log x`
/// linearly in `log(1 - p)`. Exact on Pareto quantile grids; clamps outside the data.
pub fn pareto_interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    let h = p * (m + 1) as f64;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= m as f64 {
        return sorted[m - 1];
    }
    let i = h.floor() as usize;
    let pos = |j: usize| (1.0 - j as f64 / (m + 1) as f64).ln();
    let (lo, hi) = (pos(i), pos(i + 1));
    let t = ((1.0 - p).ln() - lo) / (hi - lo);
    let (a, b) = (sorted[i - 1].ln(), sorted[i].ln());
    (a + t * (b - a)).exp()
}

/// Pareto quantile-ratio inversion `log((1-p1)/(1-p2)) / log(q2/q1)`.
pub fn percentile_ratio_xi(p1: f64, q1: f64, p2: f64, q2: f64) -> f64 {
    ((1.0 - p1) / (1.0 - p2)).ln() / (q2 / q1).ln()
}

/// Method of percentiles with `(p1, p2) = (0.25, 0.75)`.
pub fn percentiles(tail: &TailSample) -> Result<TIEstimate> {
    tail.require(4, Method::Percentiles)?;
    let (p1, p2) = (0.25, 0.75);
    let q1 = pareto_interpolated_quantile(&tail.values, p1);
    let q2 = pareto_interpolated_quantile(&tail.values, p2);
    if q1 == q2 {
        return Err(Error::Degenerate("percentiles: equal quartiles".into()));
    }
    finish(Method::Percentiles, percentile_ratio_xi(p1, q1, p2, q2), &[("q1", q1), ("q2", q2)])
}

/// Modified percentiles: the median and upper quartile, each measured against the
/// threshold (the sample minimum at plotting position `1 / (count + 1)`), combined as
/// a ratio of summed log-distances. A stand-in recipe; exact on Pareto quantile grids.
pub fn modified_percentiles(tail: &TailSample) -> Result<TIEstimate> {
    tail.require(4, Method::ModifiedPercentiles)?;
    let m = tail.len() as f64;
    let p0 = 1.0 / (m + 1.0);
    let t = tail.threshold();
    let (mut num, mut den) = (0.0, 0.0);
    for p in [0.5, 0.75] {
        let q = pareto_interpolated_quantile(&tail.values, p);
        num += ((1.0 - p0) / (1.0 - p)).ln();
        den += (q / t).ln();
    }
    if den == 0.0 {
        return Err(Error::Degenerate("modified-percentiles: quantiles equal threshold".into()));
    }
    finish(Method::ModifiedPercentiles, num / den, &[])
}

/// Geometric percentiles: the 0.9 quantile against the sample geometric mean.
///
/// For a Pareto law `log q_p - log G = (-log(1 - p) - c) / xi` where `c` is the mean of
/// `-log(1 - i/(count+1))` over the plotting positions (tending to 1). A stand-in recipe;
/// exact on Pareto quantile grids.
pub fn geometric_percentiles(tail: &TailSample) -> Result<TIEstimate> {
    tail.require(4, Method::GeometricPercentiles)?;
    let p = 0.9;
    let m = tail.len() as f64;
    let c = (m + 1.0).ln() - log_gamma(m + 1.0)? / m;
    let log_g = tail.values.iter().map(|v| v.ln()).sum::<f64>() / m;
    let q = pareto_interpolated_quantile(&tail.values, p);
    let den = q.ln() - log_g;
    if den == 0.0 {
        return Err(Error::Degenerate("geometric-percentiles: quantile equals geometric mean".into()));
    }
    finish(Method::GeometricPercentiles, (-(1.0 - p).ln() - c) / den, &[("log_geometric_mean", log_g)])
}

/// First-moment inversion `mean / (mean - threshold)`.
pub fn moments(tail: &TailSample) -> Result<TIEstimate> {
    tail.require(2, Method::Moments)?;
    let mu = mean(&tail.values);
    let t = tail.threshold();
    if !(mu > t) {
        return Err(Error::Existence("moments: sample mean does not exceed threshold".into()));
    }
    let xi = mu / (mu - t);
    let unreliable = if xi <= 1.0 {
        warn!("moments: estimate {xi} <= 1, outside the finite-mean regime the inversion assumes");
        1.0
    } else {
        0.0
    };
    finish(Method::Moments, xi, &[("unreliable", unreliable)])
}

/// Settings for the block-maxima scaling estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingEstimatorConfig {
    pub grid_points: usize,
    pub subsamples: usize,
    pub seed: u64,
    pub mode: ModeConfig,
}

impl Default for ScalingEstimatorConfig {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            subsamples: DEFAULT_SUBSAMPLES,
            seed: 42,
            mode: ModeConfig::default(),
        }
    }
}

/// Runs the block-maxima pipeline once and returns both scaling estimates.
///
/// The outer error covers the shared sub-sampling step; each inner result is the fit of
/// one series, so a degenerate MPMR series does not discard a usable EMR fit.
pub fn scaling_estimates(
    tail: &TailSample,
    config: &ScalingEstimatorConfig,
) -> Result<(Result<TIEstimate>, Result<TIEstimate>)> {
    tail.require(4, Method::Mpmr)?;
    let raw = RawSample::new(tail.values.clone())?;
    let grid = make_grid(raw.len(), config.grid_points)?;
    let blocks = collect_block_maxima(&raw, &grid, config.subsamples, config.seed)?;
    let mpmr = mpmr_series(&blocks, &config.mode)
        .and_then(|s| fit_loglog(&s, FitSource::Mpmr))
        .and_then(|f| fit_estimate(Method::Mpmr, &f));
    let emr = fit_loglog(&emr_series(&blocks), FitSource::Emr).and_then(|f| fit_estimate(Method::Emr, &f));
    Ok((mpmr, emr))
}

fn fit_estimate(method: Method, fit: &ScalingFit) -> Result<TIEstimate> {
    finish(
        method,
        fit.ti,
        &[
            ("eta", fit.eta),
            ("log_prefactor", fit.log_prefactor),
            ("slope_stderr", fit.slope_stderr),
            ("r_squared", fit.r_squared),
        ],
    )
}

/// Tail index from the slope of `log MPMR` against `log n`.
pub fn mpmr_ti(
    tail: &TailSample,
    grid_points: usize,
    m: usize,
    seed: u64,
    mode_config: &ModeConfig,
) -> Result<TIEstimate> {
    let cfg = ScalingEstimatorConfig { grid_points, subsamples: m, seed, mode: *mode_config };
    scaling_estimates(tail, &cfg)?.0
}

/// Tail index from the slope of `log EMR` (per-size mean of maxima) against `log n`.
pub fn emr_ti(
    tail: &TailSample,
    grid_points: usize,
    m: usize,
    seed: u64,
    mode_config: &ModeConfig,
) -> Result<TIEstimate> {
    let cfg = ScalingEstimatorConfig { grid_points, subsamples: m, seed, mode: *mode_config };
    scaling_estimates(tail, &cfg)?.1
}

/// Dispatches one of the classical estimators. Scaling methods go through
/// [`scaling_estimates`] because they share their sub-sampling work.
pub fn classical(method: Method, tail: &TailSample) -> Result<TIEstimate> {
    match method {
        Method::Hill => hill(tail),
        Method::LeastSquares => least_squares_ccdf(tail),
        Method::WeightedLeastSquares => weighted_least_squares_ccdf(tail),
        Method::Percentiles => percentiles(tail),
        Method::ModifiedPercentiles => modified_percentiles(tail),
        Method::GeometricPercentiles => geometric_percentiles(tail),
        Method::Mle => mle(tail),
        Method::Moments => moments(tail),
        Method::Mpmr | Method::Emr => Err(Error::InvalidInput(format!(
            "{method} is a scaling estimator; use scaling_estimates"
        ))),
    }
}

/// Any estimator by name.
pub fn estimate(method: Method, tail: &TailSample, config: &ScalingEstimatorConfig) -> Result<TIEstimate> {
    match method {
        Method::Mpmr => scaling_estimates(tail, config)?.0,
        Method::Emr => scaling_estimates(tail, config)?.1,
        m => classical(m, tail),
    }
}
