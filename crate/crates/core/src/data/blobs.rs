use serde::{Deserialize, Serialize};

use crate::data::{AttributeSchema, Dataset};
use crate::error::{Error, Result};
use crate::math::{Rng, Tensor};
use crate::scalar::Scalar;

/// Attribute name used by the synthetic generators.
pub const SYNTHETIC_ATTRIBUTE: &str = "class";

/// Isotropic Gaussian clusters in the plane, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub centers: Vec<[f64; 2]>,
    pub sigmas: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.centers.len();
        if k < 2 || self.sigmas.len() != k || self.counts.len() != k {
            return Err(Error::Config(format!(
                "blob spec needs matching centers/sigmas/counts for at least 2 classes (got {}, {}, {})",
                k,
                self.sigmas.len(),
                self.counts.len()
            )));
        }
        if let Some(s) = self.sigmas.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("blob sigma must be positive, got {s}")));
        }
        if self.counts.contains(&0) {
            return Err(Error::Config("every class needs at least one sample".into()));
        }
        Ok(())
    }
}

/// Samples the blobs class by class, then min-max normalises each feature
/// over the whole sample into `[0,1]`.
pub fn gen_blobs<T: Scalar>(spec: &BlobSpec, seed: u64) -> Result<Dataset<T>> {
    spec.validate()?;
    let mut rng = Rng::new(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (class, ((c, &s), &n)) in spec.centers.iter().zip(&spec.sigmas).zip(&spec.counts).enumerate() {
        for _ in 0..n {
            points.push([rng.normal(c[0], s), rng.normal(c[1], s)]);
            labels.push(class);
        }
    }
    let mut data = Vec::with_capacity(points.len() * 2);
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &points {
        for j in 0..2 {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    for p in &points {
        for j in 0..2 {
            let range = hi[j] - lo[j];
            let v = if range > 0.0 { (p[j] - lo[j]) / range } else { 0.5 };
            data.push(T::of(v.clamp(0.0, 1.0)));
        }
    }
    let schema = if spec.centers.len() == 2 {
        AttributeSchema::binary(SYNTHETIC_ATTRIBUTE)
    } else {
        AttributeSchema::new(vec![crate::data::Attribute {
            name: SYNTHETIC_ATTRIBUTE.into(),
            classes: spec.centers.len(),
        }])?
    };
    Dataset::new(Tensor::new(vec![points.len(), 2], data)?, vec![labels], schema)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separated() -> BlobSpec {
        BlobSpec { centers: vec![[-3.0, 0.0], [3.0, 0.0]], sigmas: vec![0.3, 0.3], counts: vec![100, 300] }
    }

    #[test]
    fn hand_threshold_separates() {
        let ds: Dataset<f64> = gen_blobs(&separated(), 5).unwrap();
        let labels = ds.labels(SYNTHETIC_ATTRIBUTE).unwrap();
        let correct = ds
            .features()
            .row_iter()
            .zip(labels)
            .filter(|(x, &y)| usize::from(x[0] > 0.5) == y)
            .count();
        assert_eq!(correct, ds.len());
    }

    #[test]
    fn deterministic_and_prior() {
        let a: Dataset<f64> = gen_blobs(&separated(), 9).unwrap();
        let b: Dataset<f64> = gen_blobs(&separated(), 9).unwrap();
        assert_eq!(a, b);
        let ones = a.labels(SYNTHETIC_ATTRIBUTE).unwrap().iter().filter(|&&l| l == 1).count();
        assert_eq!(ones as f64 / a.len() as f64, 0.75);
    }

    #[test]
    fn features_in_unit_square() {
        let a: Dataset<f64> = gen_blobs(&separated(), 1).unwrap();
        assert!(a.features().as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn bad_sigma_rejected() {
        let mut s = separated();
        s.sigmas[1] = 0.0;
        assert!(gen_blobs::<f64>(&s, 1).is_err());
    }
}
