use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dataset::CenterSet;
use crate::error::{invalid, Error, Result};
use crate::kmeans::KMeansState;
use crate::kmedians::KMediansState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    KMeans,
    KMedians,
    KMediansAuto,
    Pam,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::KMedians => "kmedians",
            Algorithm::KMediansAuto => "kmedians-auto",
            Algorithm::Pam => "pam",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Algorithm::KMeans),
            "kmedians" => Ok(Algorithm::KMedians),
            "kmedians-auto" => Ok(Algorithm::KMediansAuto),
            "pam" => Ok(Algorithm::Pam),
            other => Err(invalid(format!(
                "unknown algorithm '{other}' (expected kmeans, kmedians, kmedians-auto or pam)"
            ))),
        }
    }
}

/// Outcome of a fit: the selected centers and everything needed to judge
/// or resume it.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub algorithm: Algorithm,
    /// The estimate. For k-medians these are the averaged centers.
    pub centers: CenterSet,
    /// Initial centers of the selected restart.
    pub seeds: CenterSet,
    /// Nearest-center index of every observation under `centers`.
    pub assignments: Vec<usize>,
    /// Empirical L1 risk of `centers` on the fitted data.
    pub risk: f64,
    /// Index of the selected restart.
    pub restart: usize,
    pub restarts: usize,
    /// Per-cluster update counts of the selected restart.
    pub update_counts: Vec<u64>,
    /// Observations skipped because they coincided with their center.
    pub skipped: u64,
    /// Distance evaluations spent in the fitting pass of the selected
    /// restart (excludes the final assignment pass).
    pub distance_evals: u64,
    /// Descent constant used, when the algorithm has one.
    pub c_gamma: Option<f64>,
    /// Master seed of the fit when it drew its own initial centers.
    pub seed: Option<u64>,
    pub kmedians: Option<KMediansState>,
    pub kmeans: Option<KMeansState>,
    pub medoids: Option<Vec<usize>>,
    /// Wall time of the whole fit, restarts included.
    pub elapsed: Duration,
}

/// Runs `restarts` fits and keeps the one with the smallest risk
/// (first index on ties).
pub(crate) fn best_of<F>(restarts: usize, mut fit: F) -> Result<FitReport>
where
    F: FnMut(usize) -> Result<FitReport>,
{
    if restarts == 0 {
        return Err(invalid("restarts must be at least 1"));
    }
    let mut best: Option<FitReport> = None;
    for r in 0..restarts {
        let mut report = fit(r)?;
        report.restart = r;
        if best.as_ref().is_none_or(|b| report.risk < b.risk) {
            best = Some(report);
        }
    }
    let mut best = best.expect("restarts >= 1");
    best.restarts = restarts;
    Ok(best)
}
