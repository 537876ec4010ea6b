//! Recursive stochastic-gradient k-medians with averaging.
//!
//! Each observation `z` moves only its nearest raw center `X^r`, by a unit
//! step (in the normalized norm) towards `z`:
//!
//! ```text
//! X^r <- X^r - a^r (X^r - z) / ||X^r - z||
//! a^r  = c_gamma / (1 + c_alpha * n_r)^alpha
//! ```
//!
//! where `n_r` is the number of updates cluster `r` has already received.
//! The estimate returned is, per cluster, the running mean of the raw
//! iterates produced by its updates (the seed until the first update),
//! which is far less noisy than the last iterate.
//! Clusters that do not receive the observation keep their step, average
//! and count unchanged.
//!
//! An observation that coincides exactly with its nearest raw center has no
//! descent direction; it is skipped and counted in [`KMediansState::skipped`].

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{CenterSet, Dataset};
use crate::error::{invalid, Result};
use crate::geometry::{nearest, norm_unchecked};
use crate::kmeans::{self, KMeans};
use crate::metrics::assign_with_risk;
use crate::report::{best_of, Algorithm, FitReport};
use crate::rng::{shuffled_order, substream, SeedPool};

pub const DEFAULT_ALPHA: f64 = 0.75;
pub const DEFAULT_C_ALPHA: f64 = 1.0;

/// Parameters of the step schedule `c_gamma / (1 + c_alpha * n)^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainConfig {
    c_gamma: f64,
    c_alpha: f64,
    alpha: f64,
    /// Optional per-cluster override of `c_gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster_c_gamma: Option<Vec<f64>>,
}

impl GainConfig {
    pub fn new(c_gamma: f64, c_alpha: f64, alpha: f64) -> Result<Self> {
        let gain = Self {
            c_gamma,
            c_alpha,
            alpha,
            cluster_c_gamma: None,
        };
        gain.validate()?;
        Ok(gain)
    }

    /// `alpha = 3/4`, `c_alpha = 1`.
    pub fn with_defaults(c_gamma: f64) -> Result<Self> {
        Self::new(c_gamma, DEFAULT_C_ALPHA, DEFAULT_ALPHA)
    }

    /// Gives each cluster its own `c_gamma`.
    pub fn with_cluster_gains(mut self, c_gammas: Vec<f64>) -> Result<Self> {
        self.cluster_c_gamma = Some(c_gammas);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.c_gamma) {
            return Err(invalid(format!("c_gamma must be positive, got {}", self.c_gamma)));
        }
        if !positive(self.c_alpha) {
            return Err(invalid(format!("c_alpha must be positive, got {}", self.c_alpha)));
        }
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (1/2, 1], got {}", self.alpha)));
        }
        if let Some(c) = &self.cluster_c_gamma {
            if let Some(bad) = c.iter().find(|v| !positive(**v)) {
                return Err(invalid(format!("per-cluster c_gamma must be positive, got {bad}")));
            }
        }
        Ok(())
    }

    pub fn c_gamma(&self) -> f64 {
        self.c_gamma
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cluster_c_gamma(&self) -> Option<&[f64]> {
        self.cluster_c_gamma.as_deref()
    }

    fn c_gamma_for(&self, r: usize) -> f64 {
        self.cluster_c_gamma.as_ref().map_or(self.c_gamma, |c| c[r])
    }

    /// Step used by cluster `r` for its update after `updates` earlier ones.
    pub fn step(&self, r: usize, updates: u64) -> f64 {
        self.c_gamma_for(r) / (1.0 + self.c_alpha * updates as f64).powf(self.alpha)
    }
}

/// What a single observation did to the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Updated(usize),
    /// The observation equalled raw center `r`.
    Skipped(usize),
}

/// Full recursion state. Serializable so a stream can be resumed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMediansState {
    raw: CenterSet,
    averaged: CenterSet,
    update_counts: Vec<u64>,
    current_steps: Vec<f64>,
    gain: GainConfig,
    bound: Option<f64>,
    max_step_used: f64,
    skipped: u64,
    distance_evals: u64,
    bound_violations: u64,
}

impl KMediansState {
    pub fn new(seeds: CenterSet, gain: GainConfig) -> Result<Self> {
        gain.validate()?;
        seeds.ensure_distinct()?;
        let k = seeds.k();
        if let Some(c) = gain.cluster_c_gamma() {
            if c.len() != k {
                return Err(invalid(format!("{} per-cluster gains for k = {k}", c.len())));
            }
        }
        let current_steps = (0..k).map(|r| gain.step(r, 0)).collect();
        Ok(Self {
            averaged: seeds.clone(),
            raw: seeds,
            update_counts: vec![0; k],
            current_steps,
            gain,
            bound: None,
            max_step_used: 0.0,
            skipped: 0,
            distance_evals: 0,
            bound_violations: 0,
        })
    }

    /// Enables the boundedness check: with every observation and seed of
    /// normalized norm at most `k_bound`, raw centers must stay within
    /// `k_bound + 2 * (largest step used)`.
    pub fn with_bound(mut self, k_bound: f64) -> Self {
        self.bound = Some(k_bound);
        self
    }

    pub fn step(&mut self, z: &[f64]) -> Result<StepOutcome> {
        self.raw.ensure_dim(z.len())?;
        Ok(self.step_unchecked(z))
    }

    pub(crate) fn step_unchecked(&mut self, z: &[f64]) -> StepOutcome {
        let (r, dist) = nearest(z, &self.raw);
        self.distance_evals += self.raw.k() as u64;
        if dist == 0.0 {
            self.skipped += 1;
            return StepOutcome::Skipped(r);
        }

        let n_r = self.update_counts[r];
        let a = self.gain.step(r, n_r);
        let scale = a / dist;
        let raw = self.raw.center_mut(r);
        for (x, zj) in raw.iter_mut().zip(z) {
            *x -= scale * (*x - zj);
        }
        let w = n_r as f64;
        for (m, x) in self.averaged.center_mut(r).iter_mut().zip(self.raw.center(r)) {
            *m = (w * *m + x) / (w + 1.0);
        }
        self.update_counts[r] = n_r + 1;
        self.current_steps[r] = a;
        self.max_step_used = self.max_step_used.max(a);

        if let Some(k_bound) = self.bound {
            let limit = k_bound + 2.0 * self.max_step_used + 1e-12 * k_bound.max(1.0);
            if norm_unchecked(self.raw.center(r)) > limit {
                self.bound_violations += 1;
                debug_assert!(false, "raw center {r} left the ball of radius {limit}");
            }
        }
        StepOutcome::Updated(r)
    }

    pub fn raw(&self) -> &CenterSet {
        &self.raw
    }

    pub fn averaged(&self) -> &CenterSet {
        &self.averaged
    }

    pub fn update_counts(&self) -> &[u64] {
        &self.update_counts
    }

    /// Step of the most recent update of each cluster (the first step for
    /// clusters never updated).
    pub fn current_steps(&self) -> &[f64] {
        &self.current_steps
    }

    pub fn gain(&self) -> &GainConfig {
        &self.gain
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn max_step_used(&self) -> f64 {
        self.max_step_used
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn distance_evals(&self) -> u64 {
        self.distance_evals
    }

    pub fn bound_violations(&self) -> u64 {
        self.bound_violations
    }
}

/// One pass of averaged k-medians over `data` in row order.
pub fn kmedians_fit(data: &Dataset, gain: &GainConfig, seeds: &CenterSet) -> Result<FitReport> {
    fit_in_order(data, gain, seeds, None)
}

pub(crate) fn fit_in_order(
    data: &Dataset,
    gain: &GainConfig,
    seeds: &CenterSet,
    order: Option<&[usize]>,
) -> Result<FitReport> {
    let start = Instant::now();
    seeds.ensure_dim(data.d())?;
    if seeds.k() > data.n() {
        return Err(invalid(format!("k = {} exceeds n = {}", seeds.k(), data.n())));
    }
    let mut state = KMediansState::new(seeds.clone(), gain.clone())?;
    match order {
        Some(order) => order.iter().for_each(|&i| {
            state.step_unchecked(data.row(i));
        }),
        None => data.rows().for_each(|z| {
            state.step_unchecked(z);
        }),
    }
    let (assignments, risk) = assign_with_risk(data, state.averaged())?;
    Ok(FitReport {
        algorithm: Algorithm::KMedians,
        centers: state.averaged.clone(),
        seeds: seeds.clone(),
        assignments,
        risk,
        restart: 0,
        restarts: 1,
        update_counts: state.update_counts.clone(),
        skipped: state.skipped,
        distance_evals: state.distance_evals,
        c_gamma: Some(gain.c_gamma()),
        seed: None,
        kmedians: Some(state),
        kmeans: None,
        medoids: None,
        elapsed: start.elapsed(),
    })
}

/// Where each k-medians restart starts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// `k` distinct observations drawn at random.
    #[default]
    Random,
    /// The centers of a one-pass k-means run from the same random draw that
    /// [`KMeans`] with the same seed uses for that restart. As `c_gamma`
    /// goes to zero the fit reduces to the k-means fit.
    KMeans,
}

/// Averaged k-medians with random restarts, selected by empirical L1 risk
/// of the averaged centers.
#[derive(Debug, Clone)]
pub struct KMedians {
    k: usize,
    gain: GainConfig,
    restarts: usize,
    seed: u64,
    shuffle: bool,
    init: Init,
}

impl KMedians {
    pub fn new(k: usize, gain: GainConfig) -> Self {
        Self {
            k,
            gain,
            restarts: 10,
            seed: 0,
            shuffle: false,
            init: Init::Random,
        }
    }

    #[must_use]
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    #[must_use]
    pub fn with_shuffle(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }

    #[must_use]
    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn fit(&self, data: &Dataset) -> Result<FitReport> {
        let start = Instant::now();
        if self.k == 0 || self.k > data.n() {
            return Err(invalid(format!("k = {} must be in 1..={}", self.k, data.n())));
        }
        let order = self
            .shuffle
            .then(|| shuffled_order(data.n(), &mut substream(self.seed, "kmedians-order", 0)));
        let kmeans_order = match self.init {
            Init::KMeans if self.shuffle => {
                Some(shuffled_order(data.n(), &mut substream(self.seed, "kmeans-order", 0)))
            }
            _ => None,
        };
        let pool = SeedPool::new(data);
        let mut report = best_of(self.restarts, |r| {
            let seeds = match self.init {
                Init::Random => pool.draw(self.k, &mut substream(self.seed, "kmedians-seeds", r as u64))?,
                Init::KMeans => {
                    let draw = pool.draw(self.k, &mut substream(self.seed, "kmeans-seeds", r as u64))?;
                    kmeans::fit_in_order(data, &draw, kmeans_order.as_deref())?.centers
                }
            };
            fit_in_order(data, &self.gain, &seeds, order.as_deref())
        })?;
        report.seed = Some(self.seed);
        report.elapsed = start.elapsed();
        Ok(report)
    }
}

/// Data-driven k-medians: the descent constant is set to the empirical L1
/// risk of a preliminary MacQueen k-means fit, then averaged k-medians runs
/// with `c_alpha = 1`, `alpha = 3/4`.
///
/// k-means restarts run first and yield a single global `c_gamma`; the
/// k-medians restarts follow. A k-means risk of exactly zero means the
/// k-means centers already fit perfectly, and they are returned as is.
#[derive(Debug, Clone)]
pub struct DataDrivenKMedians {
    k: usize,
    restarts: usize,
    seed: u64,
    shuffle: bool,
}

impl DataDrivenKMedians {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 10,
            seed: 0,
            shuffle: false,
        }
    }

    #[must_use]
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    #[must_use]
    pub fn with_shuffle(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }

    pub fn fit(&self, data: &Dataset) -> Result<FitReport> {
        Ok(self.fit_with_kmeans(data)?.0)
    }

    /// Also returns the preliminary k-means report.
    pub fn fit_with_kmeans(&self, data: &Dataset) -> Result<(FitReport, FitReport)> {
        let start = Instant::now();
        let kmeans = KMeans::new(self.k)
            .with_restarts(self.restarts)
            .with_seed(self.seed)
            .with_shuffle(self.shuffle)
            .fit(data)?;
        let c_gamma = kmeans.risk;
        let mut report = if c_gamma > 0.0 {
            KMedians::new(self.k, GainConfig::with_defaults(c_gamma)?)
                .with_restarts(self.restarts)
                .with_seed(self.seed)
                .with_shuffle(self.shuffle)
                .fit(data)?
        } else {
            kmeans.clone()
        };
        report.algorithm = Algorithm::KMediansAuto;
        report.c_gamma = Some(c_gamma);
        report.elapsed = start.elapsed();
        Ok((report, kmeans))
    }
}

pub fn kmedians_fit_data_driven(data: &Dataset, k: usize, restarts: usize, seed: u64) -> Result<FitReport> {
    DataDrivenKMedians::new(k).with_restarts(restarts).with_seed(seed).fit(data)
}

/// Monte-Carlo estimate of the k-medians gradient over a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    /// One vector per center.
    pub components: Vec<Vec<f64>>,
    /// Sample points that coincided with their nearest center and were left out.
    pub skipped: usize,
}

/// Sample mean of `I_r(z; x) (x^r - z) / ||x^r - z||` for every cluster `r`.
///
/// This is the gradient with respect to the normalized inner product
/// `<u, v> = d^-1 sum u_j v_j`; the ordinary partial derivatives of the
/// empirical risk are these components divided by `d`.
pub fn mc_gradient(centers: &CenterSet, sample: &Dataset) -> Result<GradientEstimate> {
    centers.ensure_dim(sample.d())?;
    let d = centers.d();
    let mut components = vec![vec![0.0; d]; centers.k()];
    let mut skipped = 0;
    for z in sample.rows() {
        let (r, dist) = nearest(z, centers);
        if dist == 0.0 {
            skipped += 1;
            continue;
        }
        for ((g, x), zj) in components[r].iter_mut().zip(centers.center(r)).zip(z) {
            *g += (x - zj) / dist;
        }
    }
    let n = sample.n() as f64;
    components.iter_mut().flatten().for_each(|g| *g /= n);
    Ok(GradientEstimate { components, skipped })
}
