//! Partitioning around medoids: greedy BUILD followed by SWAP.
//!
//! Dissimilarity is the normalized distance between rows. The full n x n
//! matrix is cached for small inputs and recomputed on the fly otherwise.
//! SWAP scans `(medoid position, candidate row)` lexicographically and
//! accepts the first exchange that strictly lowers the total dissimilarity,
//! until a full scan finds none.

use std::time::Instant;

use crate::dataset::{CenterSet, Dataset};
use crate::error::{invalid, Error, Result};
use crate::geometry::distance_unchecked;
use crate::metrics::assign_with_risk;
use crate::report::{Algorithm, FitReport};

pub const DEFAULT_MAX_N: usize = 5000;
pub const DEFAULT_CACHE_MAX_N: usize = 2048;

/// Row indices of the selected medoids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedoidSet {
    pub indices: Vec<usize>,
}

/// Dissimilarity evaluations spent in each phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PamCounters {
    pub build: u64,
    pub swap: u64,
    pub swaps_accepted: u64,
}

#[derive(Debug, Clone)]
pub struct Pam {
    k: usize,
    max_n: usize,
    cache_max_n: usize,
}

struct Dissimilarity<'a> {
    data: &'a Dataset,
    cache: Option<Vec<f64>>,
    evals: u64,
}

impl<'a> Dissimilarity<'a> {
    fn new(data: &'a Dataset, cache: bool) -> Self {
        let cache = cache.then(|| {
            let n = data.n();
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..i {
                    let v = distance_unchecked(data.row(i), data.row(j));
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
            m
        });
        Self { data, cache, evals: 0 }
    }

    #[inline]
    fn get(&mut self, i: usize, j: usize) -> f64 {
        self.evals += 1;
        match &self.cache {
            Some(m) => m[i * self.data.n() + j],
            None => distance_unchecked(self.data.row(i), self.data.row(j)),
        }
    }
}

impl Pam {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_n: DEFAULT_MAX_N,
            cache_max_n: DEFAULT_CACHE_MAX_N,
        }
    }

    /// Largest n accepted before failing with [`Error::TooLarge`].
    #[must_use]
    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n;
        self
    }

    /// Largest n for which the dissimilarity matrix is cached.
    #[must_use]
    pub fn with_cache_max_n(mut self, cache_max_n: usize) -> Self {
        self.cache_max_n = cache_max_n;
        self
    }

    pub fn fit(&self, data: &Dataset) -> Result<(MedoidSet, FitReport, PamCounters)> {
        let start = Instant::now();
        let n = data.n();
        let k = self.k;
        if k == 0 || k > n {
            return Err(invalid(format!("k = {k} must be in 1..={n}")));
        }
        if n > self.max_n {
            return Err(Error::TooLarge { n, cap: self.max_n });
        }
        let mut dis = Dissimilarity::new(data, n <= self.cache_max_n);
        let mut counters = PamCounters::default();

        let mut medoids = build(&mut dis, n, k);
        counters.build = dis.evals;

        swap(&mut dis, n, &mut medoids, &mut counters);
        counters.swap = dis.evals - counters.build;

        let centers = CenterSet::from_dataset_rows(data, &medoids)?;
        let (assignments, risk) = assign_with_risk(data, &centers)?;
        let report = FitReport {
            algorithm: Algorithm::Pam,
            seeds: centers.clone(),
            centers,
            assignments,
            risk,
            restart: 0,
            restarts: 1,
            update_counts: Vec::new(),
            skipped: 0,
            distance_evals: counters.build + counters.swap,
            c_gamma: None,
            seed: None,
            kmedians: None,
            kmeans: None,
            medoids: Some(medoids.clone()),
            elapsed: start.elapsed(),
        };
        Ok((MedoidSet { indices: medoids }, report, counters))
    }
}

/// Convenience wrapper with default caps.
pub fn pam_fit(data: &Dataset, k: usize) -> Result<(MedoidSet, FitReport)> {
    let (m, r, _) = Pam::new(k).fit(data)?;
    Ok((m, r))
}

fn build(dis: &mut Dissimilarity<'_>, n: usize, k: usize) -> Vec<usize> {
    let mut is_medoid = vec![false; n];
    let mut medoids = Vec::with_capacity(k);

    let mut best = (f64::INFINITY, 0);
    for i in 0..n {
        let total: f64 = (0..n).filter(|&j| j != i).map(|j| dis.get(i, j)).sum();
        if total < best.0 {
            best = (total, i);
        }
    }
    medoids.push(best.1);
    is_medoid[best.1] = true;
    let mut nearest: Vec<f64> = (0..n).map(|j| if j == best.1 { 0.0 } else { dis.get(j, best.1) }).collect();

    while medoids.len() < k {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for i in (0..n).filter(|&i| !is_medoid[i]) {
            let mut gain = 0.0;
            for j in (0..n).filter(|&j| j != i && !is_medoid[j]) {
                gain += (nearest[j] - dis.get(i, j)).max(0.0);
            }
            if gain > best.0 {
                best = (gain, i);
            }
        }
        let m = best.1;
        medoids.push(m);
        is_medoid[m] = true;
        for j in 0..n {
            let v = if j == m { 0.0 } else { dis.get(j, m) };
            if v < nearest[j] {
                nearest[j] = v;
            }
        }
    }
    medoids
}

/// Nearest medoid position, its distance, and the second-nearest distance.
fn assignment_table(dis: &mut Dissimilarity<'_>, n: usize, medoids: &[usize]) -> Vec<(usize, f64, f64)> {
    (0..n)
        .map(|j| {
            let mut first = (usize::MAX, f64::INFINITY);
            let mut second = f64::INFINITY;
            for (p, &m) in medoids.iter().enumerate() {
                let v = if j == m { 0.0 } else { dis.get(j, m) };
                if v < first.1 {
                    second = first.1;
                    first = (p, v);
                } else if v < second {
                    second = v;
                }
            }
            (first.0, first.1, second)
        })
        .collect()
}

fn swap(dis: &mut Dissimilarity<'_>, n: usize, medoids: &mut [usize], counters: &mut PamCounters) {
    let k = medoids.len();
    let mut table = assignment_table(dis, n, medoids);
    let mut is_medoid = vec![false; n];
    medoids.iter().for_each(|&m| is_medoid[m] = true);

    loop {
        let total: f64 = table.iter().map(|t| t.1).sum();
        let tolerance = 1e-12 * total.max(1.0);
        let mut improved = false;
        for p in 0..k {
            for h in 0..n {
                if is_medoid[h] {
                    continue;
                }
                let mut delta = 0.0;
                for (j, &(near, d_near, d_second)) in table.iter().enumerate() {
                    let d_h = if j == h { 0.0 } else { dis.get(j, h) };
                    delta += if near == p {
                        d_h.min(d_second) - d_near
                    } else {
                        (d_h - d_near).min(0.0)
                    };
                }
                if delta < -tolerance {
                    is_medoid[medoids[p]] = false;
                    medoids[p] = h;
                    is_medoid[h] = true;
                    table = assignment_table(dis, n, medoids);
                    counters.swaps_accepted += 1;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_cost(data: &Dataset, medoids: &[usize]) -> f64 {
        data.rows()
            .map(|z| {
                medoids
                    .iter()
                    .map(|&m| distance_unchecked(z, data.row(m)))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    #[test]
    fn distinct_points_are_their_own_medoids() {
        let data = Dataset::from_rows(vec![vec![0.0, 0.0], vec![5.0, 1.0], vec![-2.0, 9.0]]).unwrap();
        let (m, report) = pam_fit(&data, 3).unwrap();
        let mut idx = m.indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2]);
        assert_eq!(report.risk, 0.0);
    }

    #[test]
    fn toy_line_matches_exhaustive() {
        let data = Dataset::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![10.0, 0.0],
            vec![11.0, 0.0],
        ])
        .unwrap();
        let (m, _) = pam_fit(&data, 2).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..5 {
            for b in a + 1..5 {
                best = best.min(total_cost(&data, &[a, b]));
            }
        }
        assert!((total_cost(&data, &m.indices) - best).abs() < 1e-12);
        assert!(m.indices.contains(&1));
    }

    #[test]
    fn caps_and_bad_k() {
        let data = Dataset::from_rows((0..20).map(|i| vec![i as f64, 1.0]).collect()).unwrap();
        assert!(matches!(Pam::new(2).with_max_n(10).fit(&data), Err(Error::TooLarge { n: 20, cap: 10 })));
        assert!(Pam::new(0).fit(&data).is_err());
        assert!(Pam::new(21).fit(&data).is_err());
    }

    #[test]
    fn cached_and_uncached_agree() {
        let data = Dataset::from_rows(
            (0..60).map(|i| vec![((i * 37) % 11) as f64, ((i * 13) % 7) as f64 * 0.5]).collect(),
        )
        .unwrap();
        let (a, ra, ca) = Pam::new(3).fit(&data).unwrap();
        let (b, rb, cb) = Pam::new(3).with_cache_max_n(0).fit(&data).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.risk, rb.risk);
        assert_eq!(ca, cb);
    }

    #[test]
    fn medoids_are_rows_and_k1_is_optimal() {
        let data = Dataset::from_rows((0..15).map(|i| vec![(i * i % 17) as f64, i as f64]).collect()).unwrap();
        let (m, report) = pam_fit(&data, 1).unwrap();
        let best = (0..15).map(|i| total_cost(&data, &[i])).fold(f64::INFINITY, f64::min);
        assert!((total_cost(&data, &m.indices) - best).abs() < 1e-12);
        for c in report.centers.iter() {
            assert!(data.rows().any(|r| r == c));
        }
    }
}
