//! Seeded generators for the benchmark datasets.
//!
//! * `sim1`: three bivariate Gaussians plus an outlier atom at (-14, 14).
//! * `sim2`: three d-dimensional Gaussians with sinusoidal means and AR(1)
//!   covariances `1.5 * rho^|j - l|` (rho = 0.1, 0.5, 0.9), an outlier atom
//!   at (4, ..., 4), and an optional global scale factor.
//! * `profiles`: binary-ish minute-level viewing profiles in `[0, 1]^d`,
//!   only meant for runtime benchmarks at realistic size.
//!
//! Rows are generated in fixed chunks of [`CHUNK_ROWS`], each with its own
//! RNG substream, so output depends on the seed alone and chunks can be
//! produced in parallel.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::rng::{substream, Rng, RNG_ALGORITHM};

pub const CHUNK_ROWS: usize = 4096;

pub const SIM1_MEANS: [[f64; 2]; 3] = [[-3.0, -3.0], [3.0, -3.0], [4.5, -4.5]];
pub const SIM1_COVARIANCES: [[[f64; 2]; 2]; 3] = [
    [[2.0, 1.0], [1.0, 3.0]],
    [[3.0, 1.0], [1.0, 2.0]],
    [[2.0, -1.0], [-1.0, 3.0]],
];
pub const SIM1_OUTLIER: [f64; 2] = [-14.0, 14.0];

pub const SIM2_RHO: [f64; 3] = [0.1, 0.5, 0.9];
pub const SIM2_VARIANCE: f64 = 1.5;
pub const SIM2_OUTLIER_VALUE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sim1Config {
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sim2Config {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    #[serde(default = "one")]
    pub scale: f64,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilesConfig {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(())
}

/// One generated row: coordinates written in place, label, outlier flag.
type RowFn<'a> = dyn Fn(&mut Rng, &mut [f64]) -> (u32, bool) + Sync + 'a;

fn generate(n: usize, d: usize, seed: u64, tag: &str, row: &RowFn<'_>) -> (Vec<f64>, Vec<u32>, Vec<bool>) {
    let chunks: Vec<_> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let rows = CHUNK_ROWS.min(n - c * CHUNK_ROWS);
            let mut rng = substream(seed, tag, c as u64);
            let mut values = vec![0.0; rows * d];
            let mut labels = Vec::with_capacity(rows);
            let mut flags = Vec::with_capacity(rows);
            for out in values.chunks_exact_mut(d) {
                let (label, flag) = row(&mut rng, out);
                labels.push(label);
                flags.push(flag);
            }
            (values, labels, flags)
        })
        .collect();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for (v, l, f) in chunks {
        values.extend(v);
        labels.extend(l);
        flags.extend(f);
    }
    (values, labels, flags)
}

/// Lower Cholesky factor of a 2 x 2 covariance.
fn cholesky2(c: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let l00 = c[0][0].sqrt();
    let l10 = c[1][0] / l00;
    let l11 = (c[1][1] - l10 * l10).sqrt();
    [[l00, 0.0], [l10, l11]]
}

pub fn sim1_sample(cfg: &Sim1Config) -> Result<Dataset> {
    check_n(cfg.n)?;
    check_epsilon(cfg.epsilon)?;
    let factors = SIM1_COVARIANCES.map(|c| cholesky2(&c));
    let epsilon = cfg.epsilon;
    let row = move |rng: &mut Rng, out: &mut [f64]| {
        if rng.random::<f64>() < epsilon {
            out.copy_from_slice(&SIM1_OUTLIER);
            return (0, true);
        }
        let comp = rng.random_range(0..3usize);
        let e0: f64 = rng.sample(StandardNormal);
        let e1: f64 = rng.sample(StandardNormal);
        let l = &factors[comp];
        out[0] = SIM1_MEANS[comp][0] + l[0][0] * e0;
        out[1] = SIM1_MEANS[comp][1] + l[1][0] * e0 + l[1][1] * e1;
        (comp as u32 + 1, false)
    };
    let (values, labels, flags) = generate(cfg.n, 2, cfg.seed, "sim1", &row);
    Dataset::from_flat(values, 2)?.with_labels(labels)?.with_outlier_flags(flags)
}

/// Mean of component `comp` (0-based) at coordinate `j` (1-based).
pub fn sim2_mean(comp: usize, j: usize, d: usize) -> f64 {
    let phase = 2.0 * PI * comp as f64 / 3.0;
    2.0 * (phase + 2.0 * PI * j as f64 / (d as f64 - 1.0)).sin()
}

/// Zero-mean stationary AR(1) draw with variance `variance` and lag-one
/// correlation `rho`, by forward recursion.
pub fn ar1_fill(rng: &mut Rng, rho: f64, variance: f64, out: &mut [f64]) {
    let innovation = (variance * (1.0 - rho * rho)).sqrt();
    let mut prev = variance.sqrt() * rng.sample::<f64, _>(StandardNormal);
    out[0] = prev;
    for v in out.iter_mut().skip(1) {
        prev = rho * prev + innovation * rng.sample::<f64, _>(StandardNormal);
        *v = prev;
    }
}

pub fn sim2_sample(cfg: &Sim2Config) -> Result<Dataset> {
    check_n(cfg.n)?;
    check_epsilon(cfg.epsilon)?;
    if cfg.d < 2 {
        return Err(invalid(format!("sim2 needs d >= 2, got {}", cfg.d)));
    }
    if !(cfg.scale.is_finite() && cfg.scale > 0.0) {
        return Err(invalid(format!("scale must be positive, got {}", cfg.scale)));
    }
    let d = cfg.d;
    let means: Vec<Vec<f64>> = (0..3).map(|c| (1..=d).map(|j| sim2_mean(c, j, d)).collect()).collect();
    let (epsilon, scale) = (cfg.epsilon, cfg.scale);
    let row = move |rng: &mut Rng, out: &mut [f64]| {
        if rng.random::<f64>() < epsilon {
            out.fill(scale * SIM2_OUTLIER_VALUE);
            return (0, true);
        }
        let comp = rng.random_range(0..3usize);
        ar1_fill(rng, SIM2_RHO[comp], SIM2_VARIANCE, out);
        for (v, m) in out.iter_mut().zip(&means[comp]) {
            *v = scale * (*v + m);
        }
        (comp as u32 + 1, false)
    };
    let (values, labels, flags) = generate(cfg.n, d, cfg.seed, "sim2", &row);
    Dataset::from_flat(values, d)?.with_labels(labels)?.with_outlier_flags(flags)
}

/// Typical viewing times, as fractions of the day, for the profile types.
const PROFILE_PEAKS: [&[f64]; 5] = [&[0.33], &[0.54, 0.85], &[0.87], &[0.45, 0.6, 0.75], &[0.05, 0.9]];

/// Synthetic minute-level viewing profiles in `[0, 1]^d`.
///
/// Each row picks one of a few viewing habits and switches the set on for
/// one to four intervals near that habit's peak times. Boundary minutes
/// hold the fraction of the minute watched; all other entries are 0 or 1.
pub fn profiles_sample(cfg: &ProfilesConfig) -> Result<Dataset> {
    check_n(cfg.n)?;
    if cfg.d < 2 {
        return Err(invalid(format!("profiles need d >= 2, got {}", cfg.d)));
    }
    let d = cfg.d;
    let df = d as f64;
    let row = move |rng: &mut Rng, out: &mut [f64]| {
        let habit = rng.random_range(0..PROFILE_PEAKS.len());
        let peaks = PROFILE_PEAKS[habit];
        let intervals = rng.random_range(1..=4usize);
        for _ in 0..intervals {
            let peak = peaks[rng.random_range(0..peaks.len())];
            let jitter: f64 = rng.sample(StandardNormal);
            let center = (peak + 0.04 * jitter).clamp(0.0, 1.0) * df;
            let length = rng.random_range(0.01..0.12) * df;
            let lo = (center - length / 2.0).max(0.0);
            let hi = (center + length / 2.0).min(df);
            let (first, last) = (lo.floor() as usize, (hi.ceil() as usize).min(d));
            for (m, v) in out.iter_mut().enumerate().take(last).skip(first) {
                let covered = (hi.min(m as f64 + 1.0) - lo.max(m as f64)).clamp(0.0, 1.0);
                *v = v.max(covered);
            }
        }
        (habit as u32 + 1, false)
    };
    let (values, _, _) = generate(cfg.n, d, cfg.seed, "profiles", &row);
    Dataset::from_flat(values, d)
}

/// Named generator with its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase")]
pub enum GeneratorConfig {
    Sim1(Sim1Config),
    Sim2(Sim2Config),
    Profiles(ProfilesConfig),
}

impl GeneratorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorConfig::Sim1(_) => "sim1",
            GeneratorConfig::Sim2(_) => "sim2",
            GeneratorConfig::Profiles(_) => "profiles",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            GeneratorConfig::Sim1(c) => c.seed,
            GeneratorConfig::Sim2(c) => c.seed,
            GeneratorConfig::Profiles(c) => c.seed,
        }
    }

    /// Same generator with a different seed.
    #[must_use]
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            GeneratorConfig::Sim1(c) => c.seed = seed,
            GeneratorConfig::Sim2(c) => c.seed = seed,
            GeneratorConfig::Profiles(c) => c.seed = seed,
        }
        out
    }

    /// Same generator with a different sample size.
    #[must_use]
    pub fn with_n(&self, n: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            GeneratorConfig::Sim1(c) => c.n = n,
            GeneratorConfig::Sim2(c) => c.n = n,
            GeneratorConfig::Profiles(c) => c.n = n,
        }
        out
    }

    pub fn n(&self) -> usize {
        match self {
            GeneratorConfig::Sim1(c) => c.n,
            GeneratorConfig::Sim2(c) => c.n,
            GeneratorConfig::Profiles(c) => c.n,
        }
    }

    pub fn sample(&self) -> Result<Dataset> {
        match self {
            GeneratorConfig::Sim1(c) => sim1_sample(c),
            GeneratorConfig::Sim2(c) => sim2_sample(c),
            GeneratorConfig::Profiles(c) => profiles_sample(c),
        }
    }
}

/// JSON sidecar written next to a generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub config: GeneratorConfig,
    pub n: usize,
    pub d: usize,
    pub rng: String,
    pub chunk_rows: usize,
    pub generator_version: String,
}

impl DatasetMetadata {
    pub fn new(config: &GeneratorConfig, data: &Dataset) -> Self {
        Self {
            config: config.clone(),
            n: data.n(),
            d: data.d(),
            rng: RNG_ALGORITHM.to_string(),
            chunk_rows: CHUNK_ROWS,
            generator_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Path of the sidecar for a dataset CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV and its JSON sidecar.
pub fn write_generated(path: &Path, config: &GeneratorConfig, data: &Dataset) -> Result<PathBuf> {
    data.write_csv(path)?;
    let sidecar = sidecar_path(path);
    if sidecar == path {
        return Err(invalid("dataset path must not end in .json"));
    }
    let meta = DatasetMetadata::new(config, data);
    std::fs::write(&sidecar, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim1_all_outliers() {
        let data = sim1_sample(&Sim1Config { n: 50, epsilon: 1.0, seed: 3 }).unwrap();
        assert!(data.rows().all(|r| r == SIM1_OUTLIER));
        assert!(data.outlier_flags().unwrap().iter().all(|&f| f));
        assert!(data.labels().unwrap().iter().all(|&l| l == 0));
    }

    #[test]
    fn sim2_all_outliers_scaled() {
        let data = sim2_sample(&Sim2Config { n: 10, d: 7, epsilon: 1.0, scale: 10.0, seed: 3 }).unwrap();
        assert!(data.values().iter().all(|&v| v == 40.0));
    }

    #[test]
    fn sim2_mean_uses_one_based_index() {
        let d = 50;
        assert!((sim2_mean(0, 1, d) - 2.0 * (2.0 * PI / 49.0).sin()).abs() < 1e-15);
        assert!((sim2_mean(1, d, d) - 2.0 * (2.0 * PI / 3.0 + 2.0 * PI * 50.0 / 49.0).sin()).abs() < 1e-15);
        assert!((sim2_mean(2, 3, d) - 2.0 * (4.0 * PI / 3.0 + 6.0 * PI / 49.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn generators_are_deterministic_across_chunks() {
        let cfg = Sim1Config { n: 3 * CHUNK_ROWS + 17, epsilon: 0.05, seed: 99 };
        assert_eq!(sim1_sample(&cfg).unwrap(), sim1_sample(&cfg).unwrap());
        let other = sim1_sample(&Sim1Config { seed: 100, ..cfg.clone() }).unwrap();
        assert_ne!(sim1_sample(&cfg).unwrap(), other);
        let p = ProfilesConfig { n: 100, d: 1440, seed: 1 };
        assert_eq!(profiles_sample(&p).unwrap(), profiles_sample(&p).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(sim1_sample(&Sim1Config { n: 10, epsilon: 1.5, seed: 0 }).is_err());
        assert!(sim1_sample(&Sim1Config { n: 0, epsilon: 0.0, seed: 0 }).is_err());
        assert!(sim2_sample(&Sim2Config { n: 10, d: 1, epsilon: 0.0, scale: 1.0, seed: 0 }).is_err());
        assert!(sim2_sample(&Sim2Config { n: 10, d: 5, epsilon: 0.0, scale: 0.0, seed: 0 }).is_err());
    }

    #[test]
    fn profiles_in_unit_cube_and_not_empty() {
        let data = profiles_sample(&ProfilesConfig { n: 500, d: 1440, seed: 4 }).unwrap();
        assert!(data.values().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(data.rows().all(|r| r.iter().any(|&v| v > 0.0)));
    }

    #[test]
    fn generator_config_json_tagged() {
        let g = GeneratorConfig::Sim2(Sim2Config { n: 36, d: 50, epsilon: 0.0, scale: 1.0, seed: 1 });
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"generator\":\"sim2\""));
        assert_eq!(serde_json::from_str::<GeneratorConfig>(&text).unwrap(), g);
    }
}
