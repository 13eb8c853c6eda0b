//! One-dimensional mode estimation by Gaussian-kernel mean shift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, median, sample_sd, sorted_copy, sorted_quantile};

/// Where the mean-shift trajectory starts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeInit {
    Median,
    Mean,
    User(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeConfig {
    /// Kernel bandwidth; `None` selects [`rule_of_thumb_bandwidth`].
    pub bandwidth: Option<f64>,
    /// Stop once a step is shorter than `tolerance * bandwidth`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init: ModeInit,
}

impl Default for ModeConfig {
    fn default() -> Self {
        Self {
            bandwidth: None,
            tolerance: 1e-6,
            max_iterations: 500,
            init: ModeInit::Median,
        }
    }
}

impl ModeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("mode tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("mode max_iterations must be >= 1".into()));
        }
        if let Some(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("bandwidth must be finite and > 0, got {h}")));
            }
        }
        Ok(())
    }

    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.bandwidth = Some(h);
        self
    }

    pub fn with_init(mut self, init: ModeInit) -> Self {
        self.init = init;
        self
    }
}

/// `1.06 * min(sd, IQR / 1.34) * count^(-1/5)`.
///
/// When the interquartile range collapses to zero while the sample still has spread
/// (heavy ties, common for large blocks) the standard deviation alone is used.
pub fn rule_of_thumb_bandwidth(points: &[f64]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!(
            "bandwidth needs at least 2 points, got {}",
            points.len()
        )));
    }
    let sd = sample_sd(points);
    if !(sd > 0.0) || points.iter().all(|&p| p == points[0]) {
        return Err(Error::Degenerate("all points identical; bandwidth undefined".into()));
    }
    let sorted = sorted_copy(points);
    let iqr = sorted_quantile(&sorted, 0.75) - sorted_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(1.06 * spread * (points.len() as f64).powf(-0.2))
}

/// Gaussian kernel density estimate at `x`.
pub fn kde_value(points: &[f64], bandwidth: f64, x: f64) -> f64 {
    let norm = 1.0 / (points.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    points
        .iter()
        .map(|p| {
            let z = (x - p) / bandwidth;
            (-0.5 * z * z).exp()
        })
        .sum::<f64>()
        * norm
}

/// Mean-shift fixed point `x = sum K((x - xi)/h) xi / sum K((x - xi)/h)` from a single start.
///
/// Returns [`Error::NonConvergence`] carrying the last iterate if `max_iterations` is hit.
pub fn mean_shift_mode(points: &[f64], config: &ModeConfig) -> Result<f64> {
    config.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidInput("mode of an empty sample".into()));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite point at index {i}")));
    }
    let h = match config.bandwidth {
        Some(h) => h,
        None => rule_of_thumb_bandwidth(points)?,
    };
    if points.iter().all(|&p| p == points[0]) {
        return Ok(points[0]);
    }
    let mut x = match config.init {
        ModeInit::Median => median(points),
        ModeInit::Mean => mean(points),
        ModeInit::User(v) => v,
    };
    let step_tol = config.tolerance * h;
    for _ in 0..config.max_iterations {
        let next = shift(points, h, x);
        let delta = (next - x).abs();
        x = next;
        if delta < step_tol {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence { iterations: config.max_iterations, last: x })
}

// One mean-shift update, with kernel weights rescaled by the largest one so that
// distant starts do not underflow every weight to zero.
fn shift(points: &[f64], h: f64, x: f64) -> f64 {
    let min_sq = points
        .iter()
        .map(|p| {
            let z = (x - p) / h;
            z * z
        })
        .fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for p in points {
        let z = (x - p) / h;
        let w = (-0.5 * (z * z - min_sq)).exp();
        num += w * p;
        den += w;
    }
    num / den
}
