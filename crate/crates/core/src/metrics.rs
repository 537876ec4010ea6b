//! Empirical L1 risk and the pairwise classification error rate (CER).

use crate::dataset::{CenterSet, Dataset};
use crate::error::{invalid, Result};
use crate::geometry::nearest;

/// Mean normalized distance from each observation to its nearest center.
pub fn empirical_l1_risk(data: &Dataset, centers: &CenterSet) -> Result<f64> {
    Ok(assign_with_risk(data, centers)?.1)
}

/// Nearest-center index (0-based) for every observation.
pub fn assign(data: &Dataset, centers: &CenterSet) -> Result<Vec<usize>> {
    Ok(assign_with_risk(data, centers)?.0)
}

/// Assignments and empirical L1 risk from a single pass.
pub fn assign_with_risk(data: &Dataset, centers: &CenterSet) -> Result<(Vec<usize>, f64)> {
    centers.ensure_dim(data.d())?;
    let mut total = 0.0;
    let labels = data
        .rows()
        .map(|z| {
            let (r, dist) = nearest(z, centers);
            total += dist;
            r
        })
        .collect();
    Ok((labels, total / data.n() as f64))
}

/// Cluster membership of each element. Ids are only compared for
/// equality, so any labelling works.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Self {
        Self(assignment)
    }

    pub fn from_labels(labels: &[u32]) -> Self {
        Self(labels.iter().map(|&l| l as usize).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Partition {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Classification error rate between two partitions: the fraction of
/// element pairs on which they disagree about co-membership.
///
/// Elements flagged in `outlier_flags` are dropped before pairs are formed.
pub fn cer(p: &Partition, q: &Partition, outlier_flags: Option<&[bool]>) -> Result<f64> {
    if p.len() != q.len() {
        return Err(invalid(format!("partitions have lengths {} and {}", p.len(), q.len())));
    }
    if let Some(flags) = outlier_flags {
        if flags.len() != p.len() {
            return Err(invalid("outlier flag count differs from partition length"));
        }
    }
    let kept: Vec<(usize, usize)> = p
        .0
        .iter()
        .zip(&q.0)
        .enumerate()
        .filter(|(i, _)| outlier_flags.is_none_or(|f| !f[*i]))
        .map(|(_, (&a, &b))| (a, b))
        .collect();
    let m = kept.len();
    if m < 2 {
        return Err(invalid(format!("CER needs at least 2 non-outlying elements, got {m}")));
    }

    let mut disagreements: u64 = 0;
    for (i, &(pi, qi)) in kept.iter().enumerate() {
        for &(pj, qj) in &kept[..i] {
            if (pi == pj) != (qi == qj) {
                disagreements += 1;
            }
        }
    }
    let pairs = (m as u64) * (m as u64 - 1) / 2;
    Ok(disagreements as f64 / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn risk_examples() {
        let data = Dataset::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let c = CenterSet::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        let r = empirical_l1_risk(&data, &c).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-15);

        let c = CenterSet::from_rows(vec![vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(empirical_l1_risk(&data, &c).unwrap(), 0.0);
        assert_eq!(assign(&data, &c).unwrap(), vec![1, 0]);
    }

    #[test]
    fn risk_dimension_mismatch() {
        let data = Dataset::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        let c = CenterSet::from_rows(vec![vec![0.0]]).unwrap();
        assert!(empirical_l1_risk(&data, &c).is_err());
    }

    #[test]
    fn cer_examples() {
        let p = Partition::new(vec![1, 1, 2]);
        let q = Partition::new(vec![1, 2, 2]);
        assert!((cer(&p, &q, None).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cer(&p, &p, None).unwrap(), 0.0);
        let relabelled = Partition::new(vec![7, 7, 0]);
        assert_eq!(cer(&p, &relabelled, None).unwrap(), 0.0);
    }

    #[test]
    fn cer_outlier_exclusion() {
        let p = Partition::new(vec![0, 0, 1, 1]);
        let q = Partition::new(vec![0, 0, 1, 0]);
        assert!(cer(&p, &q, None).unwrap() > 0.0);
        assert_eq!(cer(&p, &q, Some(&[false, false, false, true])).unwrap(), 0.0);
        assert!(cer(&p, &q, Some(&[true, true, true, false])).is_err());
        assert!(cer(&p, &Partition::new(vec![0]), None).is_err());
    }

    fn brute_force_cer(p: &[usize], q: &[usize], flags: &[bool]) -> f64 {
        let idx: Vec<usize> = (0..p.len()).filter(|&i| !flags[i]).collect();
        let mut total = 0usize;
        let mut pairs = 0usize;
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                if a > b {
                    let (i, j) = (idx[a], idx[b]);
                    let same_p = usize::from(p[i] == p[j]);
                    let same_q = usize::from(q[i] == q[j]);
                    total += same_p.abs_diff(same_q);
                    pairs += 1;
                }
            }
        }
        total as f64 / pairs as f64
    }

    fn partitions() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<bool>)> {
        (2usize..=30).prop_flat_map(|n| {
            (
                prop::collection::vec(0usize..4, n),
                prop::collection::vec(0usize..4, n),
                prop::collection::vec(prop::bool::weighted(0.15), n),
            )
        })
    }

    proptest! {
        #[test]
        fn cer_matches_brute_force((p, q, flags) in partitions()) {
            prop_assume!(flags.iter().filter(|f| !**f).count() >= 2);
            let got = cer(&Partition::new(p.clone()), &Partition::new(q.clone()), Some(&flags)).unwrap();
            prop_assert_eq!(got, brute_force_cer(&p, &q, &flags));
        }

        #[test]
        fn cer_symmetric_bounded_relabel_invariant((p, q, _f) in partitions(), shift in 1usize..10) {
            let pp = Partition::new(p.clone());
            let qq = Partition::new(q.clone());
            let a = cer(&pp, &qq, None).unwrap();
            prop_assert_eq!(a, cer(&qq, &pp, None).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(cer(&pp, &pp, None).unwrap(), 0.0);
            // injective relabelling of p
            let relabelled = Partition::new(p.iter().map(|&l| (l + shift) * 3).collect());
            prop_assert_eq!(a, cer(&relabelled, &qq, None).unwrap());
        }

        #[test]
        fn risk_translation_and_scaling(
            rows in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 3), 1..20),
            centers in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 3), 1..4),
            shift in prop::collection::vec(-20.0..20.0f64, 3),
            lambda in 0.1..10.0f64,
        ) {
            let data = Dataset::from_rows(rows.clone()).unwrap();
            let c = CenterSet::from_rows(centers.clone()).unwrap();
            let base = empirical_l1_risk(&data, &c).unwrap();

            let mv = |v: &Vec<f64>| v.iter().zip(&shift).map(|(a, s)| a + s).collect::<Vec<_>>();
            let data_t = Dataset::from_rows(rows.iter().map(mv).collect()).unwrap();
            let c_t = CenterSet::from_rows(centers.iter().map(mv).collect()).unwrap();
            let moved = empirical_l1_risk(&data_t, &c_t).unwrap();
            prop_assert!((moved - base).abs() <= 1e-9 * (1.0 + base));

            let sc = |v: &Vec<f64>| v.iter().map(|a| a * lambda).collect::<Vec<_>>();
            let data_s = Dataset::from_rows(rows.iter().map(sc).collect()).unwrap();
            let c_s = CenterSet::from_rows(centers.iter().map(sc).collect()).unwrap();
            let scaled = empirical_l1_risk(&data_s, &c_s).unwrap();
            prop_assert!((scaled - lambda * base).abs() <= 1e-9 * (1.0 + lambda * base));
        }
    }
}
