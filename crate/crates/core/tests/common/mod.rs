#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use online_kmedians::datagen::{ar1_fill, sim1_sample, Sim1Config};
use online_kmedians::geometry::{normalized_distance, normalized_norm};
use online_kmedians::rng::{rng_from_seed, Rng};
use online_kmedians::{empirical_l1_risk, mc_gradient, CenterSet, Dataset, GainConfig, KMeansState, KMediansState};
use rand::Rng as _;
use rand_distr::StandardNormal;

/// CER by enumerating every unordered pair.
pub fn brute_cer(p: &[usize], q: &[usize], outliers: Option<&[bool]>) -> f64 {
    let keep: Vec<usize> = (0..p.len()).filter(|&i| outliers.is_none_or(|o| !o[i])).collect();
    let m = keep.len();
    let mut disagree = 0usize;
    for a in 0..m {
        for b in 0..a {
            let (i, j) = (keep[a], keep[b]);
            if (p[i] == p[j]) != (q[i] == q[j]) {
                disagree += 1;
            }
        }
    }
    disagree as f64 / (m * (m - 1) / 2) as f64
}

/// Sum of distances to the nearest of the given rows.
pub fn medoid_cost(data: &Dataset, medoids: &[usize]) -> f64 {
    data.rows()
        .map(|z| {
            medoids
                .iter()
                .map(|&m| normalized_distance(z, data.row(m)).unwrap())
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Lowest cost over every k-subset of rows.
pub fn exhaustive_medoid_cost(data: &Dataset, k: usize) -> f64 {
    fn rec(data: &Dataset, k: usize, from: usize, chosen: &mut Vec<usize>, best: &mut f64) {
        if chosen.len() == k {
            *best = best.min(medoid_cost(data, chosen));
            return;
        }
        for i in from..data.n() {
            chosen.push(i);
            rec(data, k, i + 1, chosen, best);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(data, k, 0, &mut Vec::new(), &mut best);
    best
}

pub fn random_rows(rng: &mut Rng, n: usize, d: usize, spread: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-spread..spread)).collect())
        .collect()
}

/// A point drawn uniformly in direction with normalized norm at most `radius`.
fn point_in_ball(rng: &mut Rng, d: usize, radius: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = normalized_norm(&v).unwrap().max(1e-300);
    let r = if rng.random_bool(0.2) { radius } else { radius * rng.random::<f64>() };
    v.iter().map(|x| x / norm * r).collect()
}

/// Runs randomized k-medians streams for `steps` observations in total and
/// counts steps after which a raw center left the ball of radius
/// `K + 2 * max step + 1e-12 * max(K, 1)`.
pub fn boundedness_violations(seed: u64, steps: usize) -> (u64, usize) {
    let mut rng = rng_from_seed(seed);
    let mut done = 0;
    let mut violations = 0;
    let mut runs = 0;
    while done < steps {
        let d = rng.random_range(1..=6);
        let k = rng.random_range(1..=5);
        let radius = 10f64.powf(rng.random_range(-1.0..3.0));
        let gain = GainConfig::new(
            10f64.powf(rng.random_range(-2.0..1.5)),
            10f64.powf(rng.random_range(-1.0..1.0)),
            rng.random_range(0.5001..=1.0),
        )
        .unwrap();
        let mut seeds: Vec<Vec<f64>> = Vec::with_capacity(k);
        while seeds.len() < k {
            let s = point_in_ball(&mut rng, d, radius);
            if !seeds.contains(&s) {
                seeds.push(s);
            }
        }
        let mut state = KMediansState::new(CenterSet::from_rows(seeds).unwrap(), gain).unwrap();
        let len = rng.random_range(1_000..20_000).min(steps - done);
        for _ in 0..len {
            let z = point_in_ball(&mut rng, d, radius);
            state.step(&z).unwrap();
            let limit = radius + 2.0 * state.max_step_used() + 1e-12 * radius.max(1.0);
            if state.raw().iter().any(|c| normalized_norm(c).unwrap() > limit) {
                violations += 1;
            }
        }
        done += len;
        runs += 1;
    }
    (violations, runs)
}

/// Largest relative deviation between the averaged centers and the mean of
/// the raw iterates produced by each cluster's updates.
pub fn running_mean_max_error(seed: u64, steps: usize) -> f64 {
    let mut rng = rng_from_seed(seed);
    let (k, d) = (rng.random_range(1..=4), rng.random_range(1..=5));
    let seeds = CenterSet::from_rows(random_rows(&mut rng, k, d, 5.0)).unwrap();
    let gain = GainConfig::new(rng.random_range(0.1..4.0), rng.random_range(0.2..2.0), rng.random_range(0.51..=1.0)).unwrap();
    let mut state = KMediansState::new(seeds, gain).unwrap();
    let mut sums = vec![vec![0.0; d]; k];
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let z: Vec<f64> = (0..d).map(|_| rng.random_range(-6.0..6.0)).collect();
        if let online_kmedians::kmedians::StepOutcome::Updated(r) = state.step(&z).unwrap() {
            sums[r].iter_mut().zip(state.raw().center(r)).for_each(|(s, x)| *s += x);
        }
        for r in 0..k {
            let m = state.update_counts()[r];
            if m == 0 {
                continue;
            }
            for j in 0..d {
                let expect = sums[r][j] / m as f64;
                let got = state.averaged().center(r)[j];
                worst = worst.max((got - expect).abs() / expect.abs().max(1.0));
            }
        }
    }
    worst
}

/// Largest relative deviation between MacQueen centers and the direct
/// barycenter of seed plus allocated points.
pub fn barycenter_max_error(seed: u64, steps: usize) -> f64 {
    let mut rng = rng_from_seed(seed);
    let (k, d) = (rng.random_range(1..=5), rng.random_range(1..=4));
    let seeds = random_rows(&mut rng, k, d, 8.0);
    let mut state = KMeansState::new(CenterSet::from_rows(seeds.clone()).unwrap()).unwrap();
    let mut sums = seeds;
    let mut counts = vec![1u64; k];
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let z: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let r = state.step(&z).unwrap();
        counts[r] += 1;
        sums[r].iter_mut().zip(&z).for_each(|(s, x)| *s += x);
        assert_eq!(state.counts(), &counts[..]);
        for c in 0..k {
            for j in 0..d {
                let expect = sums[c][j] / counts[c] as f64;
                let got = state.centers().center(c)[j];
                worst = worst.max((got - expect).abs() / expect.abs().max(1.0));
            }
        }
    }
    worst
}

/// Largest component gap between `mc_gradient` and `d` times the central
/// finite difference (step `h`) of the empirical L1 risk, at random centers
/// over a large Simulation 1 sample.
pub fn gradient_fd_max_error(seed: u64, n: usize, h: f64) -> f64 {
    let data = sim1_sample(&Sim1Config { n, epsilon: 0.05, seed }).unwrap();
    let mut rng = rng_from_seed(seed ^ 0x9e37);
    let centers = CenterSet::from_rows(random_rows(&mut rng, 3, 2, 6.0)).unwrap();
    let grad = mc_gradient(&centers, &data).unwrap();
    let d = centers.d() as f64;
    let mut worst: f64 = 0.0;
    for r in 0..centers.k() {
        for j in 0..centers.d() {
            let shifted = |delta: f64| {
                let mut c = centers.clone();
                c.center_mut(r)[j] += delta;
                empirical_l1_risk(&data, &c).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            worst = worst.max((grad.components[r][j] - d * fd).abs());
        }
    }
    worst
}

pub fn ar1_covariance(d: usize, rho: f64, variance: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| variance * rho.powi((i as i32 - j as i32).abs()))
}

/// Draws from N(0, cov) through the Cholesky factor of the full matrix.
pub fn cholesky_sample(cov: &DMatrix<f64>, n: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let l = cov.clone().cholesky().expect("positive definite").l();
    let d = cov.nrows();
    (0..n)
        .map(|_| {
            let eta = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            (&l * eta).iter().copied().collect()
        })
        .collect()
}

pub fn sample_covariance(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean = DVector::from_fn(d, |j, _| rows.iter().map(|r| r[j]).sum::<f64>() / n);
    let mut cov = DMatrix::zeros(d, d);
    for r in rows {
        let v = DVector::from_column_slice(r) - &mean;
        cov += &v * v.transpose();
    }
    cov / (n - 1.0)
}

/// Largest entrywise gap between the empirical covariances of the AR(1)
/// recursion and of the full-covariance sampler, and between each of them
/// and the exact matrix.
pub fn ar1_vs_cholesky(d: usize, rho: f64, n: usize, seed: u64) -> (f64, f64) {
    let variance = 1.5;
    let mut rng = rng_from_seed(seed);
    let recursion: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row = vec![0.0; d];
            ar1_fill(&mut rng, rho, variance, &mut row);
            row
        })
        .collect();
    let exact = ar1_covariance(d, rho, variance);
    let full = cholesky_sample(&exact, n, &mut rng);
    let a = sample_covariance(&recursion);
    let b = sample_covariance(&full);
    let between = (&a - &b).abs().max();
    let to_exact = (&a - &exact).abs().max().max((&b - &exact).abs().max());
    (between, to_exact)
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_kmedians"))
}

pub fn run_cli(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(bin()).args(args).current_dir(dir).output().expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Runs every seeded command twice in fresh directories and compares the
/// written files byte for byte. Returns the names of files that differ.
pub fn reproducibility_mismatches() -> Vec<String> {
    let commands: Vec<Vec<&str>> = vec![
        vec!["generate", "sim1", "--n", "300", "--epsilon", "0.05", "--seed", "7", "-o", "sim1.csv"],
        vec!["generate", "sim2", "--n", "120", "--d", "20", "--epsilon", "0.05", "--scale", "10", "--seed", "2", "-o", "sim2.csv"],
        vec!["generate", "profiles", "--n", "40", "--d", "96", "--seed", "5", "-o", "profiles.csv"],
        vec!["fit", "kmeans", "-i", "sim1.csv", "--seed", "3", "-o", "kmeans.json"],
        vec!["fit", "kmedians", "-i", "sim1.csv", "--c-gamma", "2", "--restarts", "10", "--seed", "3", "-o", "kmedians.json"],
        vec!["fit", "kmedians", "-i", "sim2.csv", "--c-gamma", "20", "--restarts", "4", "--seed", "3", "--shuffle", "--init", "kmeans", "-o", "kmedians2.json"],
        vec!["fit", "kmedians-auto", "-i", "sim1.csv", "--seed", "3", "-o", "auto.json"],
        vec!["fit", "pam", "-i", "sim1.csv", "-o", "pam.json"],
        vec!["fit", "kmedians", "-i", "sim2.csv", "--resume", "kmedians2.json", "-o", "resumed.json"],
        vec!["eval", "-m", "auto.json", "-i", "sim1.csv", "-o", "eval.json"],
        vec!["bench", "fig3", "--seed", "11", "--replications", "2", "--c-grid", "0.5,2", "-o", "bench"],
        vec!["bench", "fig7", "--seed", "11", "--replications", "3", "--jobs", "2", "-o", "bench"],
    ];
    let run_all = || {
        let dir = tempfile::tempdir().unwrap();
        for args in &commands {
            let out = run_cli(args, dir.path());
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        dir
    };
    let (a, b) = (run_all(), run_all());
    let mut files = Vec::new();
    collect_files(a.path(), a.path(), &mut files);
    assert!(files.len() >= 15, "{files:?}");
    files
        .into_iter()
        .filter(|rel| std::fs::read(a.path().join(rel)).unwrap() != std::fs::read(b.path().join(rel)).ok().unwrap_or_default())
        .collect()
}

fn collect_files(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<String>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(root, &path, out);
        } else {
            out.push(path.strip_prefix(root).unwrap().to_string_lossy().into_owned());
        }
    }
}
