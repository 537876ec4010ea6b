//! Seeded random streams and initial-center draws.
//!
//! All randomness is derived from one master seed. A substream is keyed by
//! a text tag and an index, so independent jobs (restarts, replications,
//! bench cells) never share state and can run in any order.

use std::collections::HashSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{CenterSet, Dataset};
use crate::error::{invalid, Result};

pub type Rng = ChaCha8Rng;

/// Identifier recorded in generated metadata.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9) with splitmix64-derived substream seeds";

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed for substream `(tag, index)` under `master`.
pub fn substream_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(fnv1a(tag))) ^ splitmix64(index.wrapping_add(1)))
}

pub fn substream(master: u64, tag: &str, index: u64) -> Rng {
    Rng::seed_from_u64(substream_seed(master, tag, index))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Row indices of the distinct observations (first occurrence of each).
pub fn distinct_rows(data: &Dataset) -> Vec<usize> {
    let mut seen = HashSet::with_capacity(data.n());
    (0..data.n())
        .filter(|&i| seen.insert(data.row(i).iter().map(|v| v.to_bits()).collect::<Vec<u64>>()))
        .collect()
}

/// Initial-center sampler over the distinct rows of a dataset.
///
/// Repeated observations (an outlier atom, say) count once, so each seed is
/// a uniform draw without replacement among distinct points. When fewer
/// than `k` distinct points exist, the draw is padded with repeated rows
/// and the duplicates are separated by a jitter of a few ulps.
#[derive(Debug, Clone)]
pub struct SeedPool<'a> {
    data: &'a Dataset,
    distinct: Vec<usize>,
}

impl<'a> SeedPool<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        Self {
            data,
            distinct: distinct_rows(data),
        }
    }

    pub fn distinct_count(&self) -> usize {
        self.distinct.len()
    }

    pub fn draw(&self, k: usize, rng: &mut Rng) -> Result<CenterSet> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        let n = self.data.n();
        if k > n {
            return Err(invalid(format!("k = {k} exceeds the number of observations n = {n}")));
        }
        if k <= self.distinct.len() {
            let picked: Vec<usize> = index::sample(rng, self.distinct.len(), k)
                .into_iter()
                .map(|i| self.distinct[i])
                .collect();
            return CenterSet::from_dataset_rows(self.data, &picked);
        }
        let picked = index::sample(rng, n, k).into_vec();
        let mut centers = CenterSet::from_dataset_rows(self.data, &picked)?;
        jitter_duplicates(&mut centers);
        Ok(centers)
    }
}

/// Draws `k` distinct observations; see [`SeedPool`].
pub fn draw_seeds(data: &Dataset, k: usize, rng: &mut Rng) -> Result<CenterSet> {
    SeedPool::new(data).draw(k, rng)
}

/// Moves each repeated center by a few ulps per coordinate until all are
/// distinct.
fn jitter_duplicates(centers: &mut CenterSet) {
    for r in 1..centers.k() {
        let mut bump = 1u32;
        while (0..r).any(|q| centers.center(q) == centers.center(r)) {
            for x in centers.center_mut(r) {
                let ulp = if *x == 0.0 { f64::MIN_POSITIVE } else { x.abs() * f64::EPSILON };
                *x += 4.0 * f64::from(bump) * ulp;
            }
            bump += 1;
        }
    }
}

/// A seeded permutation of `0..n`.
pub fn shuffled_order(n: usize, rng: &mut Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}
