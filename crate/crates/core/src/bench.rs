//! Replication grids: L1 risk against the descent constant, CER
//! comparisons under contamination, and wall-time tables.
//!
//! An [`ExperimentSpec`] names a generator, the algorithms to run and the
//! grid. Every replication draws its dataset and its fit seed from
//! substreams of the master seed, so a spec always reproduces the same
//! [`ResultTable`]; all algorithms of one replication share the dataset and
//! the fit seed. Replications run on a bounded worker pool and rows come
//! back in grid order whatever the pool size.
//!
//! Wall times are only recorded when [`ExperimentSpec::record_timings`] is
//! set; everything else in a table is a pure function of the spec.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{GeneratorConfig, Sim1Config, Sim2Config};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::kmeans::KMeans;
use crate::kmedians::{DataDrivenKMedians, GainConfig, Init, KMedians};
use crate::metrics::{cer, Partition};
use crate::pam::Pam;
use crate::report::{Algorithm, FitReport};
use crate::rng::substream_seed;

/// Name used for the trimmed k-means placeholder rows.
pub const TRIMMED_KMEANS: &str = "trimmed-kmeans";
pub const NOT_IMPLEMENTED: &str = "not implemented";

pub const PRESETS: [&str; 8] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "table1"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Mean L1 risk over a grid of descent constants.
    Sweep,
    /// Classification error against the true labels, outliers excluded.
    Cer,
    /// Wall time over a grid of sample sizes and cluster counts.
    Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingGrid {
    pub sizes: Vec<usize>,
    pub ks: Vec<usize>,
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_warmup() -> usize {
    1
}

fn default_repeats() -> usize {
    5
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub generator: GeneratorConfig,
    pub algorithms: Vec<Algorithm>,
    pub k: usize,
    pub restarts: usize,
    pub replications: usize,
    /// Descent constants for `kmedians` cells.
    #[serde(default)]
    pub c_grid: Vec<f64>,
    /// Start of the `kmedians` cells.
    #[serde(default)]
    pub kmedians_init: Init,
    pub seed: u64,
    /// Emit placeholder rows for trimmed k-means.
    #[serde(default)]
    pub trimmed_placeholder: bool,
    #[serde(default)]
    pub record_timings: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingGrid>,
    /// Worker threads.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(invalid("jobs must be at least 1"));
        }
        if self.algorithms.is_empty() && !self.trimmed_placeholder {
            return Err(invalid("no algorithms to run"));
        }
        if let Some(bad) = self.c_grid.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(invalid(format!("c grid values must be positive, got {bad}")));
        }
        if self.algorithms.contains(&Algorithm::KMedians) && self.c_grid.is_empty() {
            return Err(invalid("kmedians cells need a non-empty c grid"));
        }
        match (self.kind, &self.timing) {
            (ExperimentKind::Timing, None) => return Err(invalid("timing experiments need a timing grid")),
            (ExperimentKind::Timing, Some(t)) => {
                if t.sizes.is_empty() || t.ks.is_empty() || t.repeats == 0 {
                    return Err(invalid("timing grid needs sizes, ks and at least one repeat"));
                }
                if let Some(bad) = t.ks.iter().find(|&&k| k == 0) {
                    return Err(invalid(format!("k must be at least 1, got {bad}")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Built-in experiments: the L1 sweeps, the CER comparisons and the timing table.
    pub fn preset(name: &str) -> Result<Self> {
        let sim1 = |n, epsilon| GeneratorConfig::Sim1(Sim1Config { n, epsilon, seed: 0 });
        let sim2 = |n, d, epsilon, scale| GeneratorConfig::Sim2(Sim2Config { n, d, epsilon, scale, seed: 0 });
        let sweep = |name: &str, generator, restarts, c_grid: Vec<f64>| Self {
            name: name.to_string(),
            kind: ExperimentKind::Sweep,
            generator,
            algorithms: vec![Algorithm::KMeans, Algorithm::KMedians, Algorithm::Pam],
            k: 3,
            restarts,
            replications: 50,
            c_grid,
            kmedians_init: Init::KMeans,
            seed: 0,
            trimmed_placeholder: false,
            record_timings: false,
            timing: None,
            jobs: 1,
        };
        let cer_experiment = |name: &str, generator, replications| Self {
            name: name.to_string(),
            kind: ExperimentKind::Cer,
            generator,
            algorithms: vec![Algorithm::KMeans, Algorithm::Pam, Algorithm::KMediansAuto],
            k: 3,
            restarts: 10,
            replications,
            c_grid: Vec::new(),
            kmedians_init: Init::Random,
            seed: 0,
            trimmed_placeholder: true,
            record_timings: false,
            timing: None,
            jobs: 1,
        };
        let spec = match name {
            "fig3" => sweep("fig3", sim1(250, 0.05), 10, vec![0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]),
            "fig4" => sweep(
                "fig4",
                sim2(500, 50, 0.05, 1.0),
                25,
                vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0],
            ),
            "fig5" => sweep(
                "fig5",
                sim2(1000, 200, 0.05, 10.0),
                50,
                vec![1.0, 2.5, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            ),
            "fig6" => cer_experiment("fig6", sim1(500, 0.0), 500),
            "fig7" => cer_experiment("fig7", sim1(500, 0.05), 500),
            "fig8" => cer_experiment("fig8", sim1(1000, 0.1), 100),
            "fig9" => cer_experiment("fig9", sim2(500, 50, 0.05, 1.0), 100),
            "table1" => Self {
                name: "table1".to_string(),
                kind: ExperimentKind::Timing,
                generator: sim1(250, 0.05),
                algorithms: vec![Algorithm::KMedians, Algorithm::Pam, Algorithm::KMeans],
                k: 2,
                restarts: 1,
                replications: 1,
                c_grid: vec![2.0],
                kmedians_init: Init::Random,
                seed: 0,
                trimmed_placeholder: true,
                record_timings: true,
                timing: Some(TimingGrid {
                    sizes: vec![250, 500, 2000],
                    ks: vec![2, 4, 5],
                    warmup: 1,
                    repeats: 5,
                }),
                jobs: 1,
            },
            other => {
                return Err(invalid(format!(
                    "unknown preset '{other}' (available: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    /// Dataset seed of replication `rep`.
    pub fn dataset_seed(&self, rep: usize) -> u64 {
        substream_seed(self.seed, "bench-dataset", rep as u64)
    }

    /// Fit seed shared by every algorithm of replication `rep`.
    pub fn fit_seed(&self, rep: usize) -> u64 {
        substream_seed(self.seed, "bench-fit", rep as u64)
    }
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub generator: String,
    pub algorithm: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Grid value for `kmedians`, the chosen constant for `kmedians-auto`.
    pub c: Option<f64>,
    pub replication: usize,
    pub l1_risk: Option<f64>,
    pub cer: Option<f64>,
    /// Seconds; median of the repeats for timing experiments.
    pub wall_time: Option<f64>,
    pub restart: Option<usize>,
    pub distance_evals: Option<u64>,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn is_placeholder(&self) -> bool {
        self.status == NOT_IMPLEMENTED
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows whose cell failed.
    pub fn failures(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| !r.is_ok() && !r.is_placeholder())
    }

    /// Rows of one algorithm, optionally restricted to one grid value.
    pub fn select<'a>(&'a self, algorithm: &'a str, c: Option<f64>) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.algorithm == algorithm && (c.is_none() || r.c == c))
    }

    pub fn to_csv_writer<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_csv_writer(BufWriter::new(File::create(path)?))
    }

    pub fn summary(&self, experiment: &str) -> Summary {
        let mut groups: Vec<GroupSummary> = Vec::new();
        for row in &self.rows {
            let c = (row.algorithm == Algorithm::KMedians.name()).then_some(row.c).flatten();
            let key = (row.algorithm.as_str(), row.n, row.d, row.k, c);
            let idx = match groups
                .iter()
                .position(|g| (g.algorithm.as_str(), g.n, g.d, g.k, g.c) == key)
            {
                Some(i) => i,
                None => {
                    groups.push(GroupSummary::new(row, c));
                    groups.len() - 1
                }
            };
            groups[idx].cells += 1;
            groups[idx].ok += usize::from(row.is_ok());
        }
        for g in &mut groups {
            let members: Vec<&ResultRow> = self
                .rows
                .iter()
                .filter(|r| {
                    let c = (r.algorithm == Algorithm::KMedians.name()).then_some(r.c).flatten();
                    (r.algorithm.as_str(), r.n, r.d, r.k, c) == (g.algorithm.as_str(), g.n, g.d, g.k, g.c)
                })
                .collect();
            g.l1_risk = Stats::of(members.iter().filter_map(|r| r.l1_risk));
            g.cer = Stats::of(members.iter().filter_map(|r| r.cer));
            g.wall_time = Stats::of(members.iter().filter_map(|r| r.wall_time));
            g.chosen_c = Stats::of(
                members
                    .iter()
                    .filter(|r| r.algorithm == Algorithm::KMediansAuto.name())
                    .filter_map(|r| r.c),
            );
        }
        Summary {
            experiment: experiment.to_string(),
            groups,
        }
    }
}

/// Mean, median and quartiles (linear interpolation between order
/// statistics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Self {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: quantile(&v, 0.5),
            q1: quantile(&v, 0.25),
            q3: quantile(&v, 0.75),
            min: v[0],
            max: v[v.len() - 1],
        })
    }
}

/// Quantile of sorted values.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub algorithm: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub c: Option<f64>,
    pub cells: usize,
    pub ok: usize,
    pub l1_risk: Option<Stats>,
    pub cer: Option<Stats>,
    pub wall_time: Option<Stats>,
    /// Constants picked by the data-driven rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_c: Option<Stats>,
}

impl GroupSummary {
    fn new(row: &ResultRow, c: Option<f64>) -> Self {
        Self {
            algorithm: row.algorithm.clone(),
            n: row.n,
            d: row.d,
            k: row.k,
            c,
            cells: 0,
            ok: 0,
            l1_risk: None,
            cer: None,
            wall_time: None,
            chosen_c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub groups: Vec<GroupSummary>,
}

impl Summary {
    pub fn group(&self, algorithm: &str, c: Option<f64>) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.algorithm == algorithm && g.c == c)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

struct Cell {
    algorithm: Algorithm,
    c: Option<f64>,
}

fn cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let mut out = Vec::new();
    for &algorithm in &spec.algorithms {
        if algorithm == Algorithm::KMedians {
            out.extend(spec.c_grid.iter().map(|&c| Cell { algorithm, c: Some(c) }));
        } else {
            out.push(Cell { algorithm, c: None });
        }
    }
    out
}

fn fit_cell(spec: &ExperimentSpec, cell: &Cell, k: usize, restarts: usize, seed: u64, data: &Dataset) -> Result<FitReport> {
    match cell.algorithm {
        Algorithm::KMeans => KMeans::new(k).with_restarts(restarts).with_seed(seed).fit(data),
        Algorithm::KMedians => {
            let gain = GainConfig::with_defaults(cell.c.unwrap_or(1.0))?;
            KMedians::new(k, gain)
                .with_restarts(restarts)
                .with_seed(seed)
                .with_init(spec.kmedians_init)
                .fit(data)
        }
        Algorithm::KMediansAuto => DataDrivenKMedians::new(k).with_restarts(restarts).with_seed(seed).fit(data),
        Algorithm::Pam => Pam::new(k).fit(data).map(|(_, report, _)| report),
    }
}

fn base_row(spec: &ExperimentSpec, algorithm: &str, data: &Dataset, k: usize, c: Option<f64>, rep: usize) -> ResultRow {
    ResultRow {
        experiment: spec.name.clone(),
        generator: spec.generator.name().to_string(),
        algorithm: algorithm.to_string(),
        n: data.n(),
        d: data.d(),
        k,
        c,
        replication: rep,
        l1_risk: None,
        cer: None,
        wall_time: None,
        restart: None,
        distance_evals: None,
        status: "ok".to_string(),
    }
}

fn placeholder_row(spec: &ExperimentSpec, data: &Dataset, k: usize, rep: usize) -> ResultRow {
    let mut row = base_row(spec, TRIMMED_KMEANS, data, k, None, rep);
    row.status = NOT_IMPLEMENTED.to_string();
    row
}

fn failed(mut row: ResultRow, err: &Error) -> ResultRow {
    row.status = format!("error: {err}");
    row
}

fn fill(mut row: ResultRow, report: &FitReport, data: &Dataset, with_cer: bool) -> Result<ResultRow> {
    row.l1_risk = Some(report.risk);
    row.restart = Some(report.restart);
    row.distance_evals = Some(report.distance_evals);
    if report.algorithm == Algorithm::KMediansAuto {
        row.c = report.c_gamma;
    }
    if with_cer {
        let labels = data
            .labels()
            .ok_or_else(|| invalid("CER needs a dataset with labels"))?;
        row.cer = Some(cer(
            &Partition::new(report.assignments.clone()),
            &Partition::from_labels(labels),
            data.outlier_flags(),
        )?);
    }
    Ok(row)
}

fn replication_rows(spec: &ExperimentSpec, rep: usize) -> Vec<ResultRow> {
    let data = match spec.generator.with_seed(spec.dataset_seed(rep)).sample() {
        Ok(data) => data,
        Err(e) => {
            let empty = Dataset::from_flat(vec![0.0], 1).expect("one finite value");
            return cells(spec)
                .iter()
                .map(|cell| {
                    let mut row = failed(base_row(spec, cell.algorithm.name(), &empty, spec.k, cell.c, rep), &e);
                    row.n = spec.generator.n();
                    row.d = 0;
                    row
                })
                .collect();
        }
    };
    let with_cer = match spec.kind {
        ExperimentKind::Cer => true,
        _ => data.labels().is_some(),
    };
    let seed = spec.fit_seed(rep);
    let mut rows: Vec<ResultRow> = cells(spec)
        .iter()
        .map(|cell| {
            let row = base_row(spec, cell.algorithm.name(), &data, spec.k, cell.c, rep);
            let start = Instant::now();
            let outcome = fit_cell(spec, cell, spec.k, spec.restarts, seed, &data);
            let elapsed = start.elapsed();
            match outcome.and_then(|report| fill(row.clone(), &report, &data, with_cer)) {
                Ok(mut row) => {
                    if spec.record_timings {
                        row.wall_time = Some(elapsed.as_secs_f64());
                    }
                    row
                }
                Err(e) => failed(row, &e),
            }
        })
        .collect();
    if spec.trimmed_placeholder {
        rows.push(placeholder_row(spec, &data, spec.k, rep));
    }
    rows
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))
}

fn run_replications(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let per_rep: Vec<Vec<ResultRow>> = pool(spec.jobs)?.install(|| {
        (0..spec.replications)
            .into_par_iter()
            .map(|rep| {
                let rows = replication_rows(spec, rep);
                log::debug!("{}: replication {rep} done", spec.name);
                rows
            })
            .collect()
    });
    Ok(ResultTable {
        rows: per_rep.into_iter().flatten().collect(),
    })
}

/// Mean-risk grid: every algorithm (and every constant of the grid for
/// `kmedians`) on every replication. Cell failures are recorded in the
/// `status` column and do not stop the run.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    run_replications(spec)
}

/// Like [`run_sweep`], with the CER of every fit against the true labels,
/// outliers excluded. The generator must provide labels.
pub fn run_cer_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    if spec.kind != ExperimentKind::Cer {
        let mut spec = spec.clone();
        spec.kind = ExperimentKind::Cer;
        return run_replications(&spec);
    }
    run_replications(spec)
}

/// Median wall time of `repeats` runs after `warmup` discarded ones.
pub fn median_time<T>(warmup: usize, repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(Duration, T)> {
    for _ in 0..warmup {
        f()?;
    }
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed());
        last = Some(out);
    }
    times.sort();
    let mid = times.len() / 2;
    let median = if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2
    };
    Ok((median, last.expect("at least one repeat")))
}

/// Wall-time table over `sizes x ks`, one restart per fit. Cells run one
/// after another on the calling thread whatever `jobs` says, so that
/// timings are not disturbed by concurrent work.
pub fn run_timing(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let grid = spec
        .timing
        .as_ref()
        .ok_or_else(|| invalid("timing experiments need a timing grid"))?;
    let mut rows = Vec::new();
    for (si, &n) in grid.sizes.iter().enumerate() {
        let config = spec.generator.with_n(n).with_seed(spec.dataset_seed(si));
        let data = config.sample()?;
        for &k in &grid.ks {
            let seed = spec.fit_seed(si);
            for cell in cells(spec) {
                let row = base_row(spec, cell.algorithm.name(), &data, k, cell.c, 0);
                let timed = median_time(grid.warmup, grid.repeats, || fit_cell(spec, &cell, k, spec.restarts, seed, &data));
                let row = match timed.and_then(|(t, report)| Ok((t, fill(row.clone(), &report, &data, false)?))) {
                    Ok((t, mut row)) => {
                        if spec.record_timings {
                            row.wall_time = Some(t.as_secs_f64());
                        }
                        row
                    }
                    Err(e) => failed(row, &e),
                };
                log::info!("{}: {} n={n} k={k} {}", spec.name, row.algorithm, row.status);
                rows.push(row);
            }
            if spec.trimmed_placeholder {
                rows.push(placeholder_row(spec, &data, k, 0));
            }
        }
    }
    Ok(ResultTable { rows })
}

/// Dispatches on [`ExperimentSpec::kind`].
pub fn run(spec: &ExperimentSpec) -> Result<ResultTable> {
    match spec.kind {
        ExperimentKind::Sweep => run_sweep(spec),
        ExperimentKind::Cer => run_cer_experiment(spec),
        ExperimentKind::Timing => run_timing(spec),
    }
}
