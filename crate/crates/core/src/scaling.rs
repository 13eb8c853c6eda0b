//! Sample-size scaling of the block maximum: `MPMR(n) ~ n^eta`, `EMR(n) ~ n^eta`,
//! with the tail index recovered as `1 / eta`.

use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockmax::{collect_block_maxima, BlockGrid, BlockMaxima, RawSample};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::mode::{mean_shift_mode, ModeConfig};
use crate::stats::mean;

/// Which per-size statistic a fit was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSource {
    Mpmr,
    Emr,
    PooledBm,
}

/// Result of regressing `log(value)` on `log(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope, the scaling exponent.
    pub eta: f64,
    /// Intercept, `log` of the prefactor.
    pub log_prefactor: f64,
    /// Tail index `1 / eta`.
    pub ti: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub source: FitSource,
    /// Number of `(n, value)` pairs in the regression.
    pub points: usize,
}

impl ScalingFit {
    /// A fit from known parameters (no regression diagnostics).
    pub fn from_parameters(eta: f64, prefactor: f64, source: FitSource) -> Result<Self> {
        if !(eta.is_finite() && eta != 0.0) {
            return Err(Error::Domain(format!("eta must be finite and nonzero, got {eta}")));
        }
        if !(prefactor > 0.0) {
            return Err(Error::Domain(format!("prefactor must be > 0, got {prefactor}")));
        }
        Ok(Self {
            eta,
            log_prefactor: prefactor.ln(),
            ti: 1.0 / eta,
            slope_stderr: 0.0,
            r_squared: 1.0,
            source,
            points: 0,
        })
    }

    pub fn prefactor(&self) -> f64 {
        self.log_prefactor.exp()
    }

    /// `prefactor * n^eta`.
    pub fn extrapolate(&self, n: f64) -> f64 {
        (self.log_prefactor + self.eta * n.ln()).exp()
    }
}

/// Free-function form of [`ScalingFit::extrapolate`].
pub fn extrapolate(fit: &ScalingFit, n: u64) -> f64 {
    fit.extrapolate(n as f64)
}

struct Ols {
    slope: f64,
    intercept: f64,
    slope_stderr: f64,
    r_squared: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let dof = xs.len().saturating_sub(2);
    let slope_stderr = if dof == 0 { 0.0 } else { (sse / dof as f64 / sxx).sqrt() };
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ols { slope, intercept, slope_stderr, r_squared }
}

/// Ordinary least squares of `log(value)` on `log(n)`.
///
/// Fails on nonpositive values, fewer than two distinct `n`, or a zero slope.
pub fn fit_loglog(points: &[(usize, f64)], source: FitSource) -> Result<ScalingFit> {
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| n == 0 || !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "log-log fit needs n >= 1 and finite positive values, got ({n}, {v})"
        )));
    }
    let first = points.first().map(|p| p.0);
    if points.len() < 2 || points.iter().all(|p| Some(p.0) == first) {
        return Err(Error::Degenerate("log-log fit needs at least 2 distinct block sizes".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let fit = ols(&xs, &ys);
    if fit.slope == 0.0 || !fit.slope.is_finite() {
        return Err(Error::Degenerate("zero scaling exponent; tail index undefined".into()));
    }
    Ok(ScalingFit {
        eta: fit.slope,
        log_prefactor: fit.intercept,
        ti: 1.0 / fit.slope,
        slope_stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
        source,
        points: points.len(),
    })
}

/// Mode of one size's sub-sampled maxima, tolerant of the degenerate cases.
///
/// All-identical maxima report that common value. A degenerate bandwidth gives `None`
/// with a warning; a mean-shift run that hits its iteration cap contributes its last
/// iterate, also with a warning.
pub fn block_mode(n: usize, maxima: &[f64], mode_config: &ModeConfig) -> Option<f64> {
    if maxima.is_empty() {
        return None;
    }
    if maxima.iter().all(|&v| v == maxima[0]) {
        warn!("block size {n}: all {} maxima equal; using the point mass", maxima.len());
        return Some(maxima[0]);
    }
    match mean_shift_mode(maxima, mode_config) {
        Ok(m) => Some(m),
        Err(Error::NonConvergence { iterations, last }) => {
            warn!("block size {n}: mean shift stopped after {iterations} iterations");
            Some(last)
        }
        Err(e) => {
            warn!("block size {n}: skipped ({e})");
            None
        }
    }
}

/// Mode of the sub-sampled maxima at each grid size; see [`block_mode`] for edge cases.
pub fn mpmr_series(blocks: &BlockMaxima, mode_config: &ModeConfig) -> Result<Vec<(usize, f64)>> {
    mode_config.validate()?;
    let per_size: Vec<Option<(usize, f64)>> = blocks
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(n, maxima)| block_mode(n, maxima, mode_config).map(|m| (n, m)))
        .collect();
    Ok(per_size.into_iter().flatten().collect())
}

/// Sample mean of the sub-sampled maxima at each grid size.
pub fn emr_series(blocks: &BlockMaxima) -> Vec<(usize, f64)> {
    blocks.iter().map(|(n, maxima)| (n, mean(maxima))).collect()
}

/// OLS of `log(maximum)` on `log(n)` over every `(n, replicate)` pair.
///
/// Nonpositive maxima are dropped with a warning if they are under 1% of all pairs;
/// otherwise the fit is refused.
pub fn fit_pooled_bm(blocks: &BlockMaxima) -> Result<ScalingFit> {
    let total: usize = blocks.iter().map(|(_, m)| m.len()).sum();
    let pairs: Vec<(usize, f64)> = blocks
        .iter()
        .flat_map(|(n, maxima)| maxima.iter().map(move |&v| (n, v)))
        .filter(|&(_, v)| v > 0.0)
        .collect();
    let dropped = total - pairs.len();
    if dropped > 0 {
        if (dropped as f64) < 0.01 * total as f64 {
            warn!("pooled fit: dropped {dropped} of {total} nonpositive maxima");
        } else {
            return Err(Error::InvalidInput(format!(
                "pooled fit: {dropped} of {total} maxima are nonpositive"
            )));
        }
    }
    fit_loglog(&pairs, FitSource::PooledBm)
}

/// Per-size MPMR/EMR series together with their log-log fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingAnalysis {
    pub mpmr: Vec<(usize, f64)>,
    pub emr: Vec<(usize, f64)>,
    pub mpmr_fit: ScalingFit,
    pub emr_fit: ScalingFit,
}

impl ScalingAnalysis {
    pub fn from_blocks(blocks: &BlockMaxima, mode_config: &ModeConfig) -> Result<Self> {
        let mpmr = mpmr_series(blocks, mode_config)?;
        let emr = emr_series(blocks);
        let mpmr_fit = fit_loglog(&mpmr, FitSource::Mpmr)?;
        let emr_fit = fit_loglog(&emr, FitSource::Emr)?;
        Ok(Self { mpmr, emr, mpmr_fit, emr_fit })
    }

    /// Sub-sample `raw` over `grid` and fit both series.
    pub fn run(
        raw: &RawSample,
        grid: &BlockGrid,
        subsamples: usize,
        seed: u64,
        mode_config: &ModeConfig,
    ) -> Result<(BlockMaxima, Self)> {
        let blocks = collect_block_maxima(raw, grid, subsamples, seed)?;
        let analysis = Self::from_blocks(&blocks, mode_config)?;
        Ok((blocks, analysis))
    }

    /// `n,mpmr,emr` rows; sizes dropped from the MPMR series leave an empty cell.
    pub fn write_series_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "mpmr", "emr"])?;
        for &(n, emr) in &self.emr {
            let mpmr = self
                .mpmr
                .iter()
                .find(|&&(m, _)| m == n)
                .map(|&(_, v)| v.to_string())
                .unwrap_or_default();
            w.write_record([n.to_string(), mpmr, emr.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which stationarity condition of the block-maximum density to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeCondition {
    /// `f'(s) F(s) + (n - 1) f(s)^2 = 0`
    Exact,
    /// Large-`n` form `f'(s) + n f(s)^2 = 0`
    LargeN,
}

const ROOT_MAX_ITER: usize = 200;

/// Root of the block-maximum mode condition on `bracket`, by Brent's method.
///
/// A residual that vanishes exactly at an endpoint returns that endpoint; this is how a
/// mode on the support boundary (Pareto and exponential at `n = 1`) is reported.
pub fn numeric_mpmr<D, DD, C>(
    density: D,
    density_derivative: DD,
    cdf: C,
    n: u64,
    bracket: (f64, f64),
    condition: ModeCondition,
) -> Result<f64>
where
    D: Fn(f64) -> f64,
    DD: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    if n == 0 {
        return Err(Error::Domain("block size must be >= 1".into()));
    }
    let nf = n as f64;
    let residual = |s: f64| {
        let f = density(s);
        match condition {
            ModeCondition::Exact => density_derivative(s) * cdf(s) + (nf - 1.0) * f * f,
            ModeCondition::LargeN => density_derivative(s) + nf * f * f,
        }
    };
    brent(residual, bracket.0, bracket.1)
}

/// Default bracket: from the support's lower end (or the median for two-sided families)
/// up to the `1 - 1/(10 n)` quantile.
pub fn default_bracket(spec: &DistributionSpec, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("block size must be >= 1".into()));
    }
    let lo = match spec {
        DistributionSpec::Normal { .. } | DistributionSpec::StudentT { .. } => 0.0,
        _ => spec.support_lower(),
    };
    let hi = spec.quantile(1.0 - 1.0 / (10.0 * n as f64))?;
    Ok((lo, hi))
}

/// [`numeric_mpmr`] for a parametric family on its [`default_bracket`].
pub fn numeric_mpmr_for(spec: &DistributionSpec, n: u64, condition: ModeCondition) -> Result<f64> {
    let bracket = default_bracket(spec, n)?;
    numeric_mpmr(
        |s| spec.pdf(s),
        |s| spec.pdf_derivative(s),
        |s| spec.cdf(s),
        n,
        bracket,
        condition,
    )
}

fn brent<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..ROOT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NonConvergence { iterations: ROOT_MAX_ITER, last: b })
}
