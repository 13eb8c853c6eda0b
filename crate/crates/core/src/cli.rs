//! Command-line front end. Every command that writes files also writes `manifest.json`
//! listing them, alongside a digest of the fully resolved configuration.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blockmax::{make_grid_capped, RawSample, DEFAULT_GRID_POINTS, DEFAULT_SUBSAMPLES};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::{make_tail_sample, Method};
use crate::ingest::{
    aggregate_periods, energy_to_magnitude, eta_to_gr, load_catalog_csv, load_values_csv, magnitude_to_energy,
    prices_to_losses, rolling_windows, CatalogSchema, GRParameters, ObservationSeries, Period, SchemaKind,
};
use crate::mode::ModeConfig;
use crate::scaling::{fit_pooled_bm, ScalingAnalysis, ScalingFit};
use crate::sim::{run_study, summarize_to_table, SimConfig};
use crate::timeseries::{analyze_groups, write_timeseries_csv, TimeseriesConfig};

/// Seed used by every randomized command unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "tailrisk", version, about = "Block-maxima tail risk: MPMR, EMR and tail-index estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo comparison of tail-index estimators from a JSON study config.
    Simulate(SimulateArgs),
    /// Block maxima, MPMR/EMR series and log-log scaling fits for one data file.
    Fit(FitArgs),
    /// MPMR, EMR and tail index per calendar period or rolling window.
    Timeseries(TimeseriesArgs),
    /// Convert between moment magnitude and energy in Joules.
    Convert(ConvertArgs),
    /// Write a synthetic sample as an `index,value` CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Study configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub tail_frac: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub subsamples: Option<usize>,
    /// Comma-separated estimator identifiers.
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Column layout preset; explicit column flags override it.
    #[arg(long, value_enum, default_value = "generic")]
    pub schema: SchemaKind,
    #[arg(long)]
    pub value_col: Option<String>,
    #[arg(long)]
    pub time_col: Option<String>,
    /// chrono format string for the time column (default: ISO-8601).
    #[arg(long)]
    pub time_format: Option<String>,
}

impl InputArgs {
    fn schema(&self) -> CatalogSchema {
        let mut s = CatalogSchema::preset(self.schema);
        if let Some(c) = &self.value_col {
            s.value_col = c.clone();
        }
        if let Some(c) = &self.time_col {
            s.time_col = c.clone();
        }
        s.time_format = self.time_format.clone();
        s
    }

    /// Loads the series; price files become daily log losses.
    fn load_series(&self) -> Result<ObservationSeries> {
        let series = load_catalog_csv(&self.input, &self.schema())?;
        if self.schema == SchemaKind::Financial {
            return prices_to_losses(&series);
        }
        Ok(series)
    }

    /// Values only. Without a time column (generic schema, no `--time-col`) timestamps
    /// are not needed, so plain value files work too.
    fn load_values(&self) -> Result<Vec<f64>> {
        if self.schema == SchemaKind::Generic && self.time_col.is_none() {
            let col = self.value_col.clone().unwrap_or_else(|| "value".into());
            return load_values_csv(&self.input, &col);
        }
        Ok(self.load_series()?.values())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLES)]
    pub subsamples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Cap on block sizes (sparse sub-sampling of very large pools).
    #[arg(long)]
    pub max_block: Option<usize>,
    /// Fixed mean-shift bandwidth (default: rule of thumb per block size).
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

impl PipelineArgs {
    fn mode(&self) -> ModeConfig {
        ModeConfig { bandwidth: self.bandwidth, ..ModeConfig::default() }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Keep only this top fraction of the values before fitting (default: all values).
    #[arg(long)]
    pub tail_frac: Option<f64>,
    /// Block sizes at which to report extrapolated MPMR/EMR.
    #[arg(long, value_delimiter = ',')]
    pub extrapolate: Vec<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodArg {
    Year,
    Decade,
    Month,
}

impl From<PeriodArg> for Period {
    fn from(p: PeriodArg) -> Self {
        match p {
            PeriodArg::Year => Period::Year,
            PeriodArg::Decade => Period::Decade,
            PeriodArg::Month => Period::Month,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TimeseriesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Calendar aggregation; ignored when `--window-days` is given.
    #[arg(long, value_enum, default_value = "year")]
    pub period: PeriodArg,
    /// Rolling window length in days.
    #[arg(long)]
    pub window_days: Option<u32>,
    /// Rolling window step in days (default: the window length).
    #[arg(long)]
    pub step_days: Option<u32>,
    /// Fixed block sizes (default: ceil((1 - 1/e) * count) per group).
    #[arg(long, value_delimiter = ',')]
    pub block_n: Vec<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct ConvertArgs {
    /// Moment magnitude to convert to Joules.
    #[arg(long, allow_negative_numbers = true)]
    pub mw: Option<f64>,
    /// Energy in Joules to convert to moment magnitude.
    #[arg(long, allow_negative_numbers = true)]
    pub joules: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Pareto,
    Exponential,
    Normal,
    StudentT,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Pareto scale.
    #[arg(long, default_value_t = 1.0)]
    pub scale_a: f64,
    /// Tail index (Pareto) or rate (exponential).
    #[arg(long, default_value_t = 2.0)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

impl GenerateArgs {
    fn spec(&self) -> Result<DistributionSpec> {
        match self.family {
            FamilyArg::Pareto => DistributionSpec::pareto(self.scale_a, self.xi),
            FamilyArg::Exponential => DistributionSpec::exponential(self.xi),
            FamilyArg::Normal => DistributionSpec::normal(self.sigma),
            FamilyArg::StudentT => DistributionSpec::student_t(self.nu),
        }
        .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the resolved configuration's JSON.
    pub config_digest: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    pub created_at: String,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64, outputs: Vec<PathBuf>) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(Self {
            command: command.into(),
            config_digest: config_digest(&config)?,
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            outputs,
            created_at: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, self)?;
        Ok(())
    }
}

/// SHA-256 (hex) of a configuration's compact JSON encoding.
pub fn config_digest(config: &serde_json::Value) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(config)?)))
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn finish_run<C: Serialize>(command: &str, config: &C, seed: u64, dir: &Path, mut outputs: Vec<PathBuf>) -> Result<()> {
    let manifest_path = dir.join("manifest.json");
    outputs.push(manifest_path.clone());
    RunManifest::new(command, config, seed, outputs)?.write(&manifest_path)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = SimConfig::from_json_file(&args.config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", args.config.display())),
        e => e,
    })?;
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if let Some(f) = args.tail_frac {
        cfg.tail_fraction = f;
    }
    if let Some(g) = args.grid_points {
        cfg.grid_points = g;
    }
    if let Some(m) = args.subsamples {
        cfg.subsamples = m;
    }
    if let Some(names) = &args.estimators {
        cfg.estimators = names.iter().map(|n| n.parse::<Method>()).collect::<Result<_>>()?;
    }
    cfg.validate()?;
    create_out_dir(&args.out_dir)?;
    let summary = run_study(&cfg)?;
    let outputs = summarize_to_table(&summary, &args.out_dir)?;
    println!("{:<24} {:>6} {:>5} {:>10} {:>10} {:>8} {:>5}", "method", "N", "nu", "mean", "sd", "mape", "fail");
    for r in &summary.rows {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:<24} {:>6} {:>5} {:>10} {:>10} {:>8} {:>5}",
            r.method.as_str(),
            r.effective_size,
            r.nu,
            f(r.mean),
            f(r.sd),
            f(r.mape),
            r.failures
        );
    }
    finish_run("simulate", &cfg, cfg.base_seed, &args.out_dir, outputs)
}

/// Everything `fit` writes to `fit.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub count: usize,
    pub units: String,
    pub block_sizes: Vec<usize>,
    pub mpmr_fit: ScalingFit,
    pub emr_fit: ScalingFit,
    pub pooled_fit: Option<ScalingFit>,
    /// Gutenberg-Richter exponents from the MPMR fit (earthquake energies only).
    pub gutenberg_richter: Option<GRParameters>,
    pub extrapolations: Vec<Extrapolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub n: u64,
    pub mpmr: f64,
    pub emr: f64,
}

pub fn fit_values(values: Vec<f64>, args: &FitArgs) -> Result<(FitReport, crate::blockmax::BlockMaxima, ScalingAnalysis)> {
    let values = match args.tail_frac {
        Some(f) => make_tail_sample(&values, f)?.values().to_vec(),
        None => values,
    };
    let raw = RawSample::new(values)?;
    let p = &args.pipeline;
    let grid = make_grid_capped(raw.len(), p.grid_points, p.max_block)?;
    let (blocks, analysis) = ScalingAnalysis::run(&raw, &grid, p.subsamples, p.seed, &p.mode())?;
    let pooled_fit = fit_pooled_bm(&blocks).ok();
    let gutenberg_richter = (args.input.schema == SchemaKind::Earthquake)
        .then(|| eta_to_gr(analysis.mpmr_fit.eta).ok())
        .flatten();
    let extrapolations = args
        .extrapolate
        .iter()
        .map(|&n| Extrapolation {
            n,
            mpmr: analysis.mpmr_fit.extrapolate(n as f64),
            emr: analysis.emr_fit.extrapolate(n as f64),
        })
        .collect();
    let report = FitReport {
        count: raw.len(),
        units: CatalogSchema::preset(args.input.schema).units().to_string(),
        block_sizes: grid.sizes().to_vec(),
        mpmr_fit: analysis.mpmr_fit,
        emr_fit: analysis.emr_fit,
        pooled_fit,
        gutenberg_richter,
        extrapolations,
    };
    Ok((report, blocks, analysis))
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let values = args.input.load_values()?;
    let (report, blocks, analysis) = fit_values(values, args)?;
    create_out_dir(&args.out_dir)?;
    let fit_path = args.out_dir.join("fit.json");
    let series_path = args.out_dir.join("series.csv");
    let bm_path = args.out_dir.join("block_maxima.csv");
    {
        let mut f = BufWriter::new(File::create(&fit_path)?);
        serde_json::to_writer_pretty(&mut f, &report)?;
    }
    analysis.write_series_csv(BufWriter::new(File::create(&series_path)?))?;
    blocks.write_csv(BufWriter::new(File::create(&bm_path)?))?;

    println!("values: {}  block sizes: {:?}", report.count, report.block_sizes);
    for fit in [&report.mpmr_fit, &report.emr_fit] {
        println!(
            "{:?}: eta = {:.4} (se {:.4}), tail index = {:.4}, prefactor = {:.6e}, R^2 = {:.4}",
            fit.source,
            fit.eta,
            fit.slope_stderr,
            fit.ti,
            fit.prefactor(),
            fit.r_squared
        );
    }
    if let Some(gr) = &report.gutenberg_richter {
        println!("Gutenberg-Richter: B = {:.4}, b = {:.4}", gr.big_b, gr.b_value);
    }
    for e in &report.extrapolations {
        println!("n = {}: MPMR ~ {:.6e}, EMR ~ {:.6e}", e.n, e.mpmr, e.emr);
    }
    finish_run("fit", args, args.pipeline.seed, &args.out_dir, vec![fit_path, series_path, bm_path])
}

pub fn cmd_timeseries(args: &TimeseriesArgs) -> Result<()> {
    let series = args.input.load_series()?;
    let groups: Vec<(String, ObservationSeries)> = match args.window_days {
        Some(w) => rolling_windows(&series, w, args.step_days.unwrap_or(w))?
            .into_iter()
            .map(|(end, s)| (end.to_string(), s))
            .collect(),
        None => aggregate_periods(&series, args.period.into()),
    };
    info!("{} groups", groups.len());
    let p = &args.pipeline;
    let cfg = TimeseriesConfig {
        block_sizes: args.block_n.clone(),
        grid_points: p.grid_points,
        subsamples: p.subsamples,
        seed: p.seed,
        max_block: p.max_block,
        mode: p.mode(),
    };
    let rows = analyze_groups(&groups, &cfg)?;
    create_out_dir(&args.out_dir)?;
    let path = args.out_dir.join("timeseries.csv");
    write_timeseries_csv(&rows, BufWriter::new(File::create(&path)?))?;
    println!("{} rows from {} groups written to {}", rows.len(), groups.len(), path.display());
    finish_run("timeseries", args, p.seed, &args.out_dir, vec![path])
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    match (args.mw, args.joules) {
        (Some(mw), None) => println!("{:.12e} J", magnitude_to_energy(mw)),
        (None, Some(j)) if j > 0.0 => println!("Mw {:.12}", energy_to_magnitude(j)),
        (None, Some(j)) => return Err(Error::Domain(format!("energy must be > 0, got {j}"))),
        _ => return Err(Error::Config("give exactly one of --mw or --joules".into())),
    }
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = args.spec()?;
    if args.count == 0 {
        return Err(Error::Config("--count must be >= 1".into()));
    }
    let values = spec.sample(args.count, args.seed);
    if let Some(dir) = args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_out_dir(dir)?;
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&args.output)?));
    w.write_record(["index", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    println!("{} {} values written to {}", args.count, spec.name(), args.output.display());
    let mut manifest = args.output.clone().into_os_string();
    manifest.push(".manifest.json");
    let manifest = PathBuf::from(manifest);
    let resolved = serde_json::json!({ "spec": spec, "count": args.count, "seed": args.seed, "output": args.output });
    RunManifest::new("generate", &resolved, args.seed, vec![args.output.clone(), manifest.clone()])?.write(&manifest)
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Timeseries(a) => cmd_timeseries(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

/// Sizes the global thread pool from `TAILRISK_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("TAILRISK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Config(format!("TAILRISK_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads().and_then(|_| execute(&cli.command)) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    0
}
