//! Monte-Carlo comparison of tail-index estimators over a grid of tail indices and
//! effective tail sizes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockmax::{DEFAULT_GRID_POINTS, DEFAULT_SUBSAMPLES};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::{classical, scaling_estimates, Method, ScalingEstimatorConfig, TailSample};
use crate::mode::ModeConfig;
use crate::seed;
use crate::stats::{mean, median, sample_sd};

/// Generator for raw samples. The study's `nu` is the tail index of either family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum SimFamily {
    StudentT,
    Pareto { scale_a: f64 },
}

impl Default for SimFamily {
    fn default() -> Self {
        SimFamily::StudentT
    }
}

impl SimFamily {
    pub fn distribution(&self, nu: f64) -> Result<DistributionSpec> {
        match *self {
            SimFamily::StudentT => DistributionSpec::student_t(nu),
            SimFamily::Pareto { scale_a } => DistributionSpec::pareto(scale_a, nu),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub family: SimFamily,
    pub nu_values: Vec<f64>,
    pub effective_sizes: Vec<usize>,
    pub tail_fraction: f64,
    pub replications: usize,
    pub estimators: Vec<Method>,
    pub base_seed: u64,
    pub grid_points: usize,
    pub subsamples: usize,
    pub mode: ModeConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            family: SimFamily::StudentT,
            nu_values: vec![2.0, 3.0, 4.0],
            effective_sizes: vec![100, 1000],
            tail_fraction: 0.1,
            replications: 200,
            estimators: Method::ALL.to_vec(),
            base_seed: 42,
            grid_points: DEFAULT_GRID_POINTS,
            subsamples: DEFAULT_SUBSAMPLES,
            mode: ModeConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return bad(format!("tail_fraction must lie in (0, 1), got {}", self.tail_fraction));
        }
        if self.replications < 2 {
            return bad(format!("replications must be >= 2, got {}", self.replications));
        }
        if self.nu_values.is_empty() || self.effective_sizes.is_empty() || self.estimators.is_empty() {
            return bad("nu_values, effective_sizes and estimators must be nonempty".into());
        }
        for &nu in &self.nu_values {
            self.family.distribution(nu).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(n) = self.effective_sizes.iter().find(|&&n| n < 2) {
            return bad(format!("effective sizes must be >= 2, got {n}"));
        }
        if self.grid_points < 2 || self.subsamples < 2 {
            return bad("grid_points and subsamples must be >= 2".into());
        }
        self.mode.validate()
    }

    /// Number of raw draws whose top `tail_fraction` holds `effective` values.
    pub fn raw_size(&self, effective: usize) -> usize {
        let exact = effective as f64 / self.tail_fraction;
        (exact - 1e-9 * exact).ceil() as usize
    }

    pub fn replication_seed(&self, nu: f64, effective: usize, replication: usize) -> u64 {
        seed::derive(self.base_seed, &[nu.to_bits(), effective as u64, replication as u64])
    }
}

/// Aggregates for one (method, N, nu) cell over the successful replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub method: Method,
    #[serde(rename = "N")]
    pub effective_size: usize,
    pub nu: f64,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub mape: Option<f64>,
    /// Median absolute percentage error, robust to the odd wild replication.
    pub median_ape: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub successes: usize,
    pub failures: usize,
}

impl SimRow {
    fn from_estimates(method: Method, effective_size: usize, nu: f64, xs: &[f64], failures: usize) -> Self {
        let some = |v: f64| (!xs.is_empty()).then_some(v);
        let ape: Vec<f64> = xs.iter().map(|x| (x - nu).abs() / nu).collect();
        Self {
            method,
            effective_size,
            nu,
            mean: some(mean(xs)),
            sd: (xs.len() >= 2).then(|| sample_sd(xs)),
            mape: some(mean(&ape)),
            median_ape: (!xs.is_empty()).then(|| median(&ape)),
            min: some(xs.iter().copied().fold(f64::INFINITY, f64::min)),
            max: some(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            successes: xs.len(),
            failures,
        }
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / (self.failures + self.successes) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub rows: Vec<SimRow>,
}

impl SimSummary {
    pub fn row(&self, method: Method, effective_size: usize, nu: f64) -> Option<&SimRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.effective_size == effective_size && r.nu == nu)
    }
}

/// Every configured estimator's outcome on one replication.
pub fn run_replication(
    config: &SimConfig,
    dist: &DistributionSpec,
    nu: f64,
    effective: usize,
    replication: usize,
) -> Vec<(Method, Result<f64>)> {
    let rep_seed = config.replication_seed(nu, effective, replication);
    let raw = dist.sample(config.raw_size(effective), rep_seed);
    let tail = match TailSample::top(&raw, effective) {
        Ok(t) => t,
        Err(e) => {
            let msg = e.to_string();
            return config
                .estimators
                .iter()
                .map(|&m| (m, Err(Error::InvalidInput(msg.clone()))))
                .collect();
        }
    };
    let needs_scaling = config.estimators.iter().any(Method::is_scaling);
    let (mpmr, emr) = if needs_scaling {
        let cfg = ScalingEstimatorConfig {
            grid_points: config.grid_points,
            subsamples: config.subsamples,
            seed: seed::derive(rep_seed, &[1]),
            mode: config.mode,
        };
        match scaling_estimates(&tail, &cfg) {
            Ok((a, b)) => (a.map(|e| e.xi_hat), b.map(|e| e.xi_hat)),
            Err(e) => (Err(Error::Degenerate(e.to_string())), Err(e)),
        }
    } else {
        (Err(Error::InvalidInput("unused".into())), Err(Error::InvalidInput("unused".into())))
    };
    let (mut mpmr, mut emr) = (Some(mpmr), Some(emr));
    config
        .estimators
        .iter()
        .map(|&m| {
            let r = match m {
                Method::Mpmr => mpmr.take().unwrap_or_else(|| Err(Error::InvalidInput("duplicate method".into()))),
                Method::Emr => emr.take().unwrap_or_else(|| Err(Error::InvalidInput("duplicate method".into()))),
                other => classical(other, &tail).map(|e| e.xi_hat),
            };
            (m, r)
        })
        .collect()
}

/// Runs every (nu, N) cell. Deterministic for a given config regardless of thread count.
pub fn run_study(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let mut estimators = config.estimators.clone();
    estimators.sort();
    estimators.dedup();
    let config = SimConfig { estimators, ..config.clone() };

    let mut rows = Vec::new();
    for &nu in &config.nu_values {
        let dist = config.family.distribution(nu)?;
        for &effective in &config.effective_sizes {
            info!("study cell nu={nu} N={effective}: {} replications", config.replications);
            let outcomes: Vec<Vec<(Method, Result<f64>)>> = (0..config.replications)
                .into_par_iter()
                .map(|r| run_replication(&config, &dist, nu, effective, r))
                .collect();
            let mut per_method: BTreeMap<Method, (Vec<f64>, usize)> = BTreeMap::new();
            for rep in outcomes {
                for (m, r) in rep {
                    let slot = per_method.entry(m).or_default();
                    match r {
                        Ok(x) => slot.0.push(x),
                        Err(_) => slot.1 += 1,
                    }
                }
            }
            rows.extend(
                per_method
                    .into_iter()
                    .map(|(m, (xs, fails))| SimRow::from_estimates(m, effective, nu, &xs, fails)),
            );
        }
    }
    rows.sort_by(|a, b| {
        a.nu.total_cmp(&b.nu)
            .then(a.effective_size.cmp(&b.effective_size))
            .then(a.method.cmp(&b.method))
    });
    Ok(SimSummary { rows })
}

const TABLE_COLUMNS: [&str; 11] = [
    "method", "N", "nu", "mean", "sd", "mape", "median_ape", "min", "max", "successes", "failures",
];

/// `method,N,nu,mean,sd,mape,median_ape,min,max,successes,failures`, sorted by (nu, N, method).
/// Cells without successful replications are left empty.
pub fn write_summary_csv<W: Write>(summary: &SimSummary, writer: W) -> Result<()> {
    if summary.rows.is_empty() {
        return Err(Error::InvalidInput("empty summary".into()));
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TABLE_COLUMNS)?;
    for r in &summary.rows {
        w.write_record([
            r.method.to_string(),
            r.effective_size.to_string(),
            r.nu.to_string(),
            opt(r.mean),
            opt(r.sd),
            opt(r.mape),
            opt(r.median_ape),
            opt(r.min),
            opt(r.max),
            r.successes.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json<W: Write>(summary: &SimSummary, mut writer: W) -> Result<()> {
    if summary.rows.is_empty() {
        return Err(Error::InvalidInput("empty summary".into()));
    }
    serde_json::to_writer_pretty(&mut writer, summary)?;
    writeln!(writer)?;
    Ok(())
}

/// Writes `summary.csv` and `summary.json` into `dir`, returning their paths.
pub fn summarize_to_table(summary: &SimSummary, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("summary.csv");
    let json_path = dir.join("summary.json");
    write_summary_csv(summary, std::fs::File::create(&csv_path)?)?;
    write_summary_json(summary, std::fs::File::create(&json_path)?)?;
    Ok(vec![csv_path, json_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            nu_values: vec![3.0],
            effective_sizes: vec![100],
            replications: 4,
            subsamples: 60,
            ..SimConfig::default()
        }
    }

    #[test]
    fn raw_size_is_ceiling() {
        let c = SimConfig::default();
        assert_eq!(c.raw_size(1000), 10_000);
        assert_eq!(c.raw_size(101), 1010);
        let c3 = SimConfig { tail_fraction: 0.3, ..c };
        assert_eq!(c3.raw_size(100), 334);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { replications: 1, ..small() }.validate().is_err());
        assert!(SimConfig { tail_fraction: 1.0, ..small() }.validate().is_err());
        assert!(SimConfig { nu_values: vec![-1.0], ..small() }.validate().is_err());
        let err = SimConfig::from_json_str(r#"{"estimators": ["hil"]}"#).unwrap_err().to_string();
        assert!(err.contains("weighted-least-squares"), "{err}");
        let cfg = SimConfig::from_json_str(
            r#"{"family": {"name": "pareto", "scale_a": 1.0}, "nu_values": [2], "estimators": ["mle"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.family, SimFamily::Pareto { scale_a: 1.0 });
        assert_eq!(cfg.replications, 200);
    }

    #[test]
    fn study_is_deterministic_and_complete() {
        let cfg = small();
        let a = run_study(&cfg).unwrap();
        let b = run_study(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), Method::ALL.len());
        for r in &a.rows {
            assert_eq!(r.successes + r.failures, 4);
            if let (Some(m), Some(lo), Some(hi)) = (r.mean, r.min, r.max) {
                assert!(lo <= m && m <= hi);
            }
            assert!(r.mape.unwrap_or(0.0) >= 0.0 && r.sd.unwrap_or(0.0) >= 0.0);
        }
    }

    #[test]
    fn table_shape() {
        let summary = SimSummary {
            rows: vec![SimRow::from_estimates(Method::Hill, 100, 3.0, &[2.9, 3.1], 1)],
        };
        let mut buf = Vec::new();
        write_summary_csv(&summary, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("method,N,nu,mean,sd,mape"));
        assert!(lines[1].starts_with("hill,100,3,3,"));
        assert!(write_summary_csv(&SimSummary { rows: vec![] }, Vec::new()).is_err());
    }
}
