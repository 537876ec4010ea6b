//! Model files: the JSON artifact written by `fit` and read by `eval`.
//!
//! A k-medians model carries a [`KMediansSnapshot`] holding the complete
//! recursion state, so a stream can be resumed later on new observations
//! and produce bit-for-bit the same centers as an uninterrupted run.
//! Floats are written with round-trip precision.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{CenterSet, Dataset};
use crate::error::{invalid, Result};
use crate::kmeans::KMeansState;
use crate::kmedians::{GainConfig, KMediansState, StepOutcome};
use crate::report::{Algorithm, FitReport};

pub const MODEL_FORMAT: &str = "online-kmedians-model";
pub const MODEL_VERSION: u32 = 1;

/// Resumable k-medians state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMediansSnapshot {
    pub k: usize,
    pub d: usize,
    /// Master seed the initial centers were drawn with, if any.
    pub rng_seed: Option<u64>,
    pub seeds: CenterSet,
    /// Observations consumed so far, skipped ones included.
    pub observations: u64,
    pub state: KMediansState,
}

impl KMediansSnapshot {
    pub fn new(seeds: CenterSet, state: KMediansState, rng_seed: Option<u64>, observations: u64) -> Self {
        Self {
            k: seeds.k(),
            d: seeds.d(),
            rng_seed,
            seeds,
            observations,
            state,
        }
    }

    /// Starts a fresh stream from `seeds`.
    pub fn start(seeds: CenterSet, gain: GainConfig, rng_seed: Option<u64>) -> Result<Self> {
        let state = KMediansState::new(seeds.clone(), gain)?;
        Ok(Self::new(seeds, state, rng_seed, 0))
    }

    pub fn gain(&self) -> &GainConfig {
        self.state.gain()
    }

    pub fn raw(&self) -> &CenterSet {
        self.state.raw()
    }

    pub fn averaged(&self) -> &CenterSet {
        self.state.averaged()
    }

    pub fn update_counts(&self) -> &[u64] {
        self.state.update_counts()
    }

    pub fn current_steps(&self) -> &[f64] {
        self.state.current_steps()
    }

    pub fn skipped(&self) -> u64 {
        self.state.skipped()
    }

    pub fn step(&mut self, z: &[f64]) -> Result<StepOutcome> {
        let outcome = self.state.step(z)?;
        self.observations += 1;
        Ok(outcome)
    }

    /// Feeds every row of `data` in order.
    pub fn feed(&mut self, data: &Dataset) -> Result<()> {
        if data.d() != self.d {
            return Err(crate::Error::DimensionMismatch {
                expected: self.d,
                found: data.d(),
            });
        }
        for z in data.rows() {
            self.state.step_unchecked(z);
        }
        self.observations += data.n() as u64;
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let consistent = self.seeds.k() == self.k
            && self.seeds.d() == self.d
            && self.state.raw().k() == self.k
            && self.state.raw().d() == self.d
            && self.state.averaged().k() == self.k
            && self.state.averaged().d() == self.d
            && self.state.update_counts().len() == self.k
            && self.state.current_steps().len() == self.k;
        if !consistent {
            return Err(invalid("k-medians snapshot has inconsistent shapes"));
        }
        self.state.gain().validate()
    }
}

/// Everything `fit` knows about a fitted model, minus timings, so that
/// identical fits give identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub algorithm: Algorithm,
    pub k: usize,
    pub d: usize,
    pub centers: CenterSet,
    pub seeds: CenterSet,
    pub risk: f64,
    pub restart: usize,
    pub restarts: usize,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gamma: Option<f64>,
    pub update_counts: Vec<u64>,
    pub skipped: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medoids: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmedians: Option<KMediansSnapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmeans: Option<KMeansState>,
}

impl ModelFile {
    pub fn from_report(report: &FitReport, observations: u64) -> Self {
        let kmedians = report
            .kmedians
            .clone()
            .map(|state| KMediansSnapshot::new(report.seeds.clone(), state, report.seed, observations));
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            algorithm: report.algorithm,
            k: report.centers.k(),
            d: report.centers.d(),
            centers: report.centers.clone(),
            seeds: report.seeds.clone(),
            risk: report.risk,
            restart: report.restart,
            restarts: report.restarts,
            seed: report.seed,
            c_gamma: report.c_gamma,
            update_counts: report.update_counts.clone(),
            skipped: report.skipped,
            medoids: report.medoids.clone(),
            kmedians,
            kmeans: report.kmeans.clone(),
        }
    }

    pub fn centers(&self) -> &CenterSet {
        &self.centers
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let model: Self = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(invalid(format!("not a model file (format '{}')", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(invalid(format!("unsupported model version {}", self.version)));
        }
        if self.centers.k() != self.k || self.centers.d() != self.d {
            return Err(invalid("model centers do not match the declared k and d"));
        }
        if let Some(snapshot) = &self.kmedians {
            snapshot.check()?;
        }
        Ok(())
    }
}
