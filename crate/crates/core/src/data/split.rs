use std::collections::BTreeMap;

use crate::data::{Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::math::Rng;
use crate::scalar::Scalar;

/// Stratified train/val/test partition.
///
/// Samples are grouped by their full label tuple; each group is shuffled and
/// cut by the fractions (train and val rounded, test takes the rest). Each
/// split is then shuffled so classes are interleaved.
pub fn split<T: Scalar>(
    data: &Dataset<T>,
    fractions: [f64; 3],
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>, Dataset<T>)> {
    let total: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| f.is_nan() || *f < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split fractions {fractions:?} must be non-negative and sum to 1")));
    }
    let parts = fractions.iter().filter(|&&f| f > 0.0).count();
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for k in 0..data.len() {
        let key = data.all_labels().iter().map(|l| l[k]).collect();
        groups.entry(key).or_default().push(k);
    }
    let mut rng = Rng::new(seed);
    let mut idx: [Vec<usize>; 3] = Default::default();
    for (key, mut members) in groups {
        if members.len() < parts {
            return Err(Error::Config(format!(
                "label group {key:?} has {} samples, fewer than the {parts} requested splits",
                members.len()
            )));
        }
        rng.shuffle(&mut members);
        let n = members.len();
        let n_train = ((fractions[0] * n as f64).round() as usize).min(n);
        let n_val = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
        let n_val = if fractions[2] == 0.0 { n - n_train } else { n_val };
        idx[0].extend_from_slice(&members[..n_train]);
        idx[1].extend_from_slice(&members[n_train..n_train + n_val]);
        idx[2].extend_from_slice(&members[n_train + n_val..]);
    }
    for part in idx.iter_mut() {
        rng.shuffle(part);
    }
    Ok((
        data.subset(&idx[0], SplitTag::Train),
        data.subset(&idx[1], SplitTag::Val),
        data.subset(&idx[2], SplitTag::Test),
    ))
}

/// The 60/20/20 protocol.
pub const STANDARD_SPLIT: [f64; 3] = [0.6, 0.2, 0.2];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSchema, SYNTHETIC_ATTRIBUTE};
    use crate::math::Tensor;

    /// Feature 0 holds the sample index so splits can be traced back.
    fn indexed(m: usize) -> Dataset<f64> {
        let x = Tensor::new(vec![m, 1], (0..m).map(|i| i as f64 / m as f64).collect()).unwrap();
        let labels = (0..m).map(|i| i % 2).collect();
        Dataset::new(x, vec![labels], AttributeSchema::binary(SYNTHETIC_ATTRIBUTE)).unwrap()
    }

    fn ids(d: &Dataset<f64>, m: usize) -> Vec<usize> {
        d.features().as_slice().iter().map(|v| (v * m as f64).round() as usize).collect()
    }

    #[test]
    fn sixty_twenty_twenty() {
        let (tr, va, te) = split(&indexed(100), STANDARD_SPLIT, 1).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (60, 20, 20));
        for (d, per) in [(&tr, 30), (&va, 10), (&te, 10)] {
            let ones = d.labels(SYNTHETIC_ATTRIBUTE).unwrap().iter().sum::<usize>();
            assert_eq!(ones, per);
        }
    }

    #[test]
    fn degenerate_all_train() {
        let (tr, va, te) = split(&indexed(10), [1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (10, 0, 0));
    }

    #[test]
    fn partition_is_exact() {
        let (tr, va, te) = split(&indexed(37), STANDARD_SPLIT, 5).unwrap();
        let mut all: Vec<usize> = [ids(&tr, 37), ids(&va, 37), ids(&te, 37)].concat();
        all.sort_unstable();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn tiny_class_rejected() {
        assert!(split(&indexed(4), STANDARD_SPLIT, 1).is_err());
        assert!(split(&indexed(10), [0.5, 0.2, 0.2], 1).is_err());
    }

    #[test]
    fn seed_deterministic() {
        let d = indexed(50);
        assert_eq!(split(&d, STANDARD_SPLIT, 3).unwrap().0, split(&d, STANDARD_SPLIT, 3).unwrap().0);
    }
}
