//! Command-line front end: `generate`, `fit`, `eval` and `bench`.
//!
//! Summaries go to the writer handed to [`run`]; files are only written
//! where an `-o` path is given. Every command is deterministic given its
//! flags, `--seed` included.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{self, ExperimentSpec, PRESETS};
use crate::datagen::{write_generated, GeneratorConfig, ProfilesConfig, Sim1Config, Sim2Config};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::kmeans::KMeans;
use crate::kmedians::{DataDrivenKMedians, GainConfig, Init, KMedians, DEFAULT_ALPHA, DEFAULT_C_ALPHA};
use crate::metrics::{assign_with_risk, cer, Partition};
use crate::model::ModelFile;
use crate::pam::{Pam, DEFAULT_MAX_N};
use crate::report::{Algorithm, FitReport};

#[derive(Debug, Parser)]
#[command(name = "kmedians", version, about = "Online k-medians clustering with k-means and PAM baselines")]
pub struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    /// Log filter implied by `-v` / `-q`.
    pub fn log_level(&self) -> log::LevelFilter {
        if self.quiet {
            return log::LevelFilter::Error;
        }
        match self.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            2 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset.
    Generate(GenerateArgs),
    /// Fit centers to a dataset and write a model file.
    Fit(FitArgs),
    /// Score a model on a dataset.
    Eval(EvalArgs),
    /// Run an experiment preset or spec file.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorName {
    Sim1,
    Sim2,
    Profiles,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub generator: GeneratorName,
    #[arg(long)]
    pub n: usize,
    /// Dimension (sim2: default 50, profiles: default 1440; sim1 is 2).
    #[arg(long)]
    pub d: Option<usize>,
    /// Contamination level.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Factor applied to whole sim2 rows.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV path; a `.json` sidecar is written next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitName {
    Random,
    Kmeans,
}

impl From<InitName> for Init {
    fn from(value: InitName) -> Self {
        match value {
            InitName::Random => Init::Random,
            InitName::Kmeans => Init::KMeans,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// kmeans, kmedians, kmedians-auto or pam.
    pub algorithm: Algorithm,
    /// Dataset CSV.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Descent constant for kmedians.
    #[arg(long)]
    pub c_gamma: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_C_ALPHA)]
    pub c_alpha: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Present observations in a seeded random order.
    #[arg(long)]
    pub shuffle: bool,
    /// Start of each kmedians restart.
    #[arg(long, value_enum, default_value_t = InitName::Random)]
    pub init: InitName,
    /// Largest n accepted by pam.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub pam_max_n: usize,
    /// Continue the k-medians stream stored in this model over the input.
    #[arg(long, conflicts_with_all = ["c_gamma", "shuffle"])]
    pub resume: Option<PathBuf>,
    /// Model JSON output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model JSON written by `fit`.
    #[arg(short, long)]
    pub model: PathBuf,
    /// Dataset CSV.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Metrics JSON output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Preset name (fig3..fig9, table1) or path to a spec JSON file.
    pub spec: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Comma-separated descent constants.
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    /// Comma-separated sample sizes (timing experiments).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Comma-separated cluster counts (timing experiments).
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Record wall times (on by default for timing experiments only).
    #[arg(long, conflicts_with = "no_timings")]
    pub timings: bool,
    #[arg(long)]
    pub no_timings: bool,
    /// Directory receiving `<name>.csv` and `<name>.summary.json`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Runs a parsed command. Returns `Ok(false)` when the command completed
/// but some of its cells failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Generate(args) => generate(args, out).map(|()| true),
        Command::Fit(args) => fit(args, out).map(|()| true),
        Command::Eval(args) => eval(args, out).map(|()| true),
        Command::Bench(args) => bench_cmd(args, out),
    }
}

pub fn generator_config(args: &GenerateArgs) -> Result<GeneratorConfig> {
    let config = match args.generator {
        GeneratorName::Sim1 => {
            if args.d.is_some_and(|d| d != 2) {
                return Err(invalid("sim1 is two-dimensional"));
            }
            GeneratorConfig::Sim1(Sim1Config {
                n: args.n,
                epsilon: args.epsilon,
                seed: args.seed,
            })
        }
        GeneratorName::Sim2 => GeneratorConfig::Sim2(Sim2Config {
            n: args.n,
            d: args.d.unwrap_or(50),
            epsilon: args.epsilon,
            scale: args.scale,
            seed: args.seed,
        }),
        GeneratorName::Profiles => GeneratorConfig::Profiles(ProfilesConfig {
            n: args.n,
            d: args.d.unwrap_or(1440),
            seed: args.seed,
        }),
    };
    Ok(config)
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let config = generator_config(args)?;
    let data = config.sample()?;
    let outliers = data.outlier_flags().map_or(0, |f| f.iter().filter(|&&o| o).count());
    writeln!(
        out,
        "{}: {} rows x {} columns, {} outliers, seed {}",
        config.name(),
        data.n(),
        data.d(),
        outliers,
        config.seed()
    )?;
    match &args.output {
        Some(path) => {
            let sidecar = write_generated(path, &config, &data)?;
            writeln!(out, "wrote {} and {}", path.display(), sidecar.display())?;
        }
        None => writeln!(out, "no output path given (-o); nothing written")?,
    }
    Ok(())
}

fn fit_report(args: &FitArgs, data: &Dataset) -> Result<(FitReport, Option<FitReport>)> {
    let k = args.k as usize;
    let report = match args.algorithm {
        Algorithm::KMeans => KMeans::new(k)
            .with_restarts(args.restarts)
            .with_seed(args.seed)
            .with_shuffle(args.shuffle)
            .fit(data)?,
        Algorithm::KMedians => {
            let c_gamma = args
                .c_gamma
                .ok_or_else(|| invalid("kmedians needs --c-gamma (or use kmedians-auto)"))?;
            KMedians::new(k, GainConfig::new(c_gamma, args.c_alpha, args.alpha)?)
                .with_restarts(args.restarts)
                .with_seed(args.seed)
                .with_shuffle(args.shuffle)
                .with_init(args.init.into())
                .fit(data)?
        }
        Algorithm::KMediansAuto => {
            let (report, kmeans) = DataDrivenKMedians::new(k)
                .with_restarts(args.restarts)
                .with_seed(args.seed)
                .with_shuffle(args.shuffle)
                .fit_with_kmeans(data)?;
            return Ok((report, Some(kmeans)));
        }
        Algorithm::Pam => Pam::new(k).with_max_n(args.pam_max_n).fit(data)?.1,
    };
    Ok((report, None))
}

fn fmt_counts(counts: &[u64]) -> String {
    counts.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn fit(args: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let data = Dataset::read_csv(&args.input)?;
    if let Some(path) = &args.resume {
        return resume(args, path, &data, out);
    }
    let (report, kmeans) = fit_report(args, &data)?;
    writeln!(out, "algorithm: {}", report.algorithm)?;
    writeln!(out, "data: {} rows x {} columns", data.n(), data.d())?;
    if let Some(kmeans) = &kmeans {
        writeln!(out, "k-means risk: {}", kmeans.risk)?;
    }
    if let Some(c) = report.c_gamma {
        let label = if report.algorithm == Algorithm::KMediansAuto { "chosen c_gamma" } else { "c_gamma" };
        writeln!(out, "{label}: {c}")?;
    }
    writeln!(out, "empirical L1 risk: {}", report.risk)?;
    writeln!(out, "selected restart: {} of {}", report.restart, report.restarts)?;
    if !report.update_counts.is_empty() {
        writeln!(out, "update counts: {}", fmt_counts(&report.update_counts))?;
    }
    if report.skipped > 0 {
        writeln!(out, "skipped observations: {}", report.skipped)?;
    }
    if let Some(m) = &report.medoids {
        writeln!(out, "medoid rows: {}", m.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))?;
    }
    writeln!(out, "wall time: {:.3} s", report.elapsed.as_secs_f64())?;
    if let Some(path) = &args.output {
        ModelFile::from_report(&report, data.n() as u64).write(path)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn resume(args: &FitArgs, path: &Path, data: &Dataset, out: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let mut model = ModelFile::read(path)?;
    let mut snapshot = model
        .kmedians
        .take()
        .ok_or_else(|| invalid(format!("{} holds no k-medians state to resume", path.display())))?;
    snapshot.feed(data)?;
    let centers = snapshot.averaged().clone();
    let (_, risk) = assign_with_risk(data, &centers)?;
    model.algorithm = Algorithm::KMedians;
    model.centers = centers;
    model.risk = risk;
    model.update_counts = snapshot.update_counts().to_vec();
    model.skipped = snapshot.skipped();
    model.kmedians = Some(snapshot);
    let snap = model.kmedians.as_ref().expect("just set");
    writeln!(out, "resumed k-medians stream: {} observations so far", snap.observations)?;
    writeln!(out, "empirical L1 risk on input: {risk}")?;
    writeln!(out, "update counts: {}", fmt_counts(&model.update_counts))?;
    writeln!(out, "wall time: {:.3} s", start.elapsed().as_secs_f64())?;
    let target = args.output.as_deref().unwrap_or(path);
    model.write(target)?;
    writeln!(out, "wrote {}", target.display())?;
    Ok(())
}

/// Metrics written by `eval -o`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub risk: f64,
    pub cer: Option<f64>,
    pub cluster_sizes: Vec<usize>,
}

pub fn evaluate(model: &ModelFile, data: &Dataset) -> Result<EvalReport> {
    if model.d != data.d() {
        return Err(Error::DimensionMismatch {
            expected: model.d,
            found: data.d(),
        });
    }
    let (assignments, risk) = assign_with_risk(data, model.centers())?;
    let mut cluster_sizes = vec![0; model.k];
    assignments.iter().for_each(|&a| cluster_sizes[a] += 1);
    let cer = match data.labels() {
        Some(labels) => Some(cer(
            &Partition::new(assignments),
            &Partition::from_labels(labels),
            data.outlier_flags(),
        )?),
        None => None,
    };
    Ok(EvalReport {
        algorithm: model.algorithm,
        n: data.n(),
        d: data.d(),
        k: model.k,
        risk,
        cer,
        cluster_sizes,
    })
}

fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = ModelFile::read(&args.model)?;
    let data = Dataset::read_csv(&args.input)?;
    let report = evaluate(&model, &data)?;
    writeln!(out, "model: {} with k = {}", report.algorithm, report.k)?;
    writeln!(out, "data: {} rows x {} columns", report.n, report.d)?;
    writeln!(out, "empirical L1 risk: {}", report.risk)?;
    match report.cer {
        Some(c) => writeln!(out, "CER (outliers excluded): {c}")?,
        None => writeln!(out, "CER: unavailable (no label column)")?,
    }
    writeln!(
        out,
        "cluster sizes: {}",
        report.cluster_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
    )?;
    if let Some(path) = &args.output {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

/// Preset or spec file, with the command-line overrides applied.
pub fn bench_spec(args: &BenchArgs) -> Result<ExperimentSpec> {
    let mut spec = if PRESETS.contains(&args.spec.as_str()) {
        ExperimentSpec::preset(&args.spec)?
    } else if Path::new(&args.spec).is_file() {
        ExperimentSpec::read(&args.spec)?
    } else {
        return Err(invalid(format!(
            "unknown preset or missing spec file '{}' (presets: {})",
            args.spec,
            PRESETS.join(", ")
        )));
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    if let Some(r) = args.restarts {
        spec.restarts = r;
    }
    if let Some(c) = &args.c_grid {
        spec.c_grid = c.clone();
    }
    if args.sizes.is_some() || args.ks.is_some() {
        let timing = spec
            .timing
            .as_mut()
            .ok_or_else(|| invalid("--sizes and --ks only apply to timing experiments"))?;
        if let Some(s) = &args.sizes {
            timing.sizes = s.clone();
        }
        if let Some(k) = &args.ks {
            timing.ks = k.clone();
        }
    }
    if args.timings {
        spec.record_timings = true;
    }
    if args.no_timings {
        spec.record_timings = false;
    }
    spec.jobs = args.jobs;
    spec.validate()?;
    Ok(spec)
}

fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<bool> {
    let spec = bench_spec(args)?;
    let table = bench::run(&spec)?;
    let summary = table.summary(&spec.name);
    writeln!(out, "{}: {} rows", spec.name, table.len())?;
    writeln!(out, "{:<16} {:>6} {:>4} {:>8} {:>6} {:>10} {:>10} {:>10}", "algorithm", "n", "k", "c", "ok", "mean L1", "median CER", "median s")?;
    for g in &summary.groups {
        let c = g.c.map_or("-".to_string(), |c| format!("{c}"));
        let l1 = g.l1_risk.as_ref().map_or("-".to_string(), |s| format!("{:.4}", s.mean));
        let cer = g.cer.as_ref().map_or("-".to_string(), |s| format!("{:.4}", s.median));
        let t = g.wall_time.as_ref().map_or("-".to_string(), |s| format!("{:.4}", s.median));
        writeln!(
            out,
            "{:<16} {:>6} {:>4} {:>8} {:>6} {:>10} {:>10} {:>10}",
            g.algorithm,
            g.n,
            g.k,
            c,
            format!("{}/{}", g.ok, g.cells),
            l1,
            cer,
            t
        )?;
    }
    let failures: Vec<_> = table.failures().collect();
    for f in &failures {
        writeln!(out, "failed: {} replication {}: {}", f.algorithm, f.replication, f.status)?;
    }
    if let Some(dir) = &args.output {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", spec.name));
        let json = dir.join(format!("{}.summary.json", spec.name));
        table.write_csv(&csv)?;
        summary.write_json(&json)?;
        writeln!(out, "wrote {} and {}", csv.display(), json.display())?;
    }
    Ok(failures.is_empty())
}
