//! Dimension-normalized distances and nearest-center assignment.
//!
//! Every distance in the crate uses `||z|| = sqrt(d^-1 * sum z_j^2)`, i.e.
//! the Euclidean norm divided by `sqrt(d)`, so risks are comparable across
//! dimensions.

use crate::dataset::CenterSet;
use crate::error::{invalid, Error, Result};

/// Normalized norm of `z`.
pub fn normalized_norm(z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(invalid("empty vector"));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite coordinate"));
    }
    Ok(norm_unchecked(z))
}

/// Normalized distance between two points of equal dimension.
pub fn normalized_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(invalid("empty vector"));
    }
    Ok(distance_unchecked(a, b))
}

/// Index (0-based) of the center nearest to `z`; ties go to the lowest index.
pub fn nearest_center(z: &[f64], centers: &CenterSet) -> Result<usize> {
    centers.ensure_dim(z.len())?;
    Ok(nearest(z, centers).0)
}

#[inline]
pub(crate) fn norm_unchecked(z: &[f64]) -> f64 {
    (z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64).sqrt()
}

#[inline]
pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

#[inline]
pub(crate) fn distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    (squared_euclidean(a, b) / a.len() as f64).sqrt()
}

/// Nearest center and its normalized distance. Computes exactly `k`
/// distances. Comparison is on raw squared sums, which has the same argmin.
#[inline]
pub(crate) fn nearest(z: &[f64], centers: &CenterSet) -> (usize, f64) {
    let mut best = 0;
    let mut best_sq = f64::INFINITY;
    for (r, c) in centers.iter().enumerate() {
        let sq = squared_euclidean(z, c);
        if sq < best_sq {
            best_sq = sq;
            best = r;
        }
    }
    (best, (best_sq / z.len() as f64).sqrt())
}
