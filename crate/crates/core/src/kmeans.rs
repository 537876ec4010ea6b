//! MacQueen's sequential k-means.
//!
//! Each observation moves only its nearest center, by a step of
//! `1 / (1 + n_r)` where `n_r` counts the points already allocated to that
//! cluster, seed included. Every center is therefore the running barycenter
//! of its seed and the observations allocated to it.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{CenterSet, Dataset};
use crate::error::{invalid, Result};
use crate::geometry::nearest;
use crate::metrics::assign_with_risk;
use crate::report::{best_of, Algorithm, FitReport};
use crate::rng::{shuffled_order, substream, SeedPool};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansState {
    centers: CenterSet,
    counts: Vec<u64>,
    distance_evals: u64,
}

impl KMeansState {
    /// Starts one group per seed, each holding only its seed point.
    pub fn new(seeds: CenterSet) -> Result<Self> {
        seeds.ensure_distinct()?;
        let k = seeds.k();
        Ok(Self {
            centers: seeds,
            counts: vec![1; k],
            distance_evals: 0,
        })
    }

    /// Allocates `z` to its nearest center and moves that center. Returns
    /// the cluster index.
    pub fn step(&mut self, z: &[f64]) -> Result<usize> {
        self.centers.ensure_dim(z.len())?;
        Ok(self.step_unchecked(z))
    }

    pub(crate) fn step_unchecked(&mut self, z: &[f64]) -> usize {
        let (r, _) = nearest(z, &self.centers);
        self.distance_evals += self.centers.k() as u64;
        let gain = 1.0 / (1.0 + self.counts[r] as f64);
        for (x, zj) in self.centers.center_mut(r).iter_mut().zip(z) {
            *x -= gain * (*x - zj);
        }
        self.counts[r] += 1;
        r
    }

    pub fn centers(&self) -> &CenterSet {
        &self.centers
    }

    /// Points allocated to each cluster, seed included.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn distance_evals(&self) -> u64 {
        self.distance_evals
    }
}

/// One pass of MacQueen k-means over `data` in row order from the given
/// seeds.
pub fn kmeans_fit(data: &Dataset, seeds: &CenterSet) -> Result<FitReport> {
    fit_in_order(data, seeds, None)
}

pub(crate) fn fit_in_order(
    data: &Dataset,
    seeds: &CenterSet,
    order: Option<&[usize]>,
) -> Result<FitReport> {
    let start = Instant::now();
    seeds.ensure_dim(data.d())?;
    if seeds.k() > data.n() {
        return Err(invalid(format!("k = {} exceeds n = {}", seeds.k(), data.n())));
    }
    let mut state = KMeansState::new(seeds.clone())?;
    match order {
        Some(order) => order.iter().for_each(|&i| {
            state.step_unchecked(data.row(i));
        }),
        None => data.rows().for_each(|z| {
            state.step_unchecked(z);
        }),
    }
    let (assignments, risk) = assign_with_risk(data, state.centers())?;
    Ok(FitReport {
        algorithm: Algorithm::KMeans,
        centers: state.centers.clone(),
        seeds: seeds.clone(),
        assignments,
        risk,
        restart: 0,
        restarts: 1,
        update_counts: state.counts.iter().map(|c| c - 1).collect(),
        skipped: 0,
        distance_evals: state.distance_evals,
        c_gamma: None,
        seed: None,
        kmedians: None,
        kmeans: Some(state),
        medoids: None,
        elapsed: start.elapsed(),
    })
}

/// MacQueen k-means with random restarts; the restart with the smallest
/// empirical L1 risk is kept.
#[derive(Debug, Clone)]
pub struct KMeans {
    k: usize,
    restarts: usize,
    seed: u64,
    shuffle: bool,
}

impl KMeans {
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

    /// Present the observations in a seeded random order instead of row
    /// order.
    #[must_use]
    pub fn with_shuffle(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }

    pub fn fit(&self, data: &Dataset) -> Result<FitReport> {
        let start = Instant::now();
        if self.k == 0 || self.k > data.n() {
            return Err(invalid(format!("k = {} must be in 1..={}", self.k, data.n())));
        }
        let order = self
            .shuffle
            .then(|| shuffled_order(data.n(), &mut substream(self.seed, "kmeans-order", 0)));
        let pool = SeedPool::new(data);
        let mut report = best_of(self.restarts, |r| {
            let seeds = pool.draw(self.k, &mut substream(self.seed, "kmeans-seeds", r as u64))?;
            fit_in_order(data, &seeds, order.as_deref())
        })?;
        report.seed = Some(self.seed);
        report.elapsed = start.elapsed();
        Ok(report)
    }
}
