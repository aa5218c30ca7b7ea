use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::math::Tensor;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub classes: usize,
}

/// The attribute set of a dataset: each attribute with its class count.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        for (i, a) in attributes.iter().enumerate() {
            if a.classes < 2 {
                return Err(Error::Config(format!(
                    "attribute '{}' needs at least 2 classes, has {}",
                    a.name, a.classes
                )));
            }
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("duplicate attribute '{}'", a.name)));
            }
        }
        Ok(Self { attributes })
    }

    /// Single binary attribute.
    pub fn binary(name: &str) -> Self {
        Self { attributes: vec![Attribute { name: name.to_string(), classes: 2 }] }
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::Config(format!("unknown attribute '{name}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
    All,
}

/// Samples with features in `[0,1]` and one integer label vector per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Tensor<T>,
    labels: Vec<Vec<usize>>,
    schema: AttributeSchema,
    pub split: SplitTag,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Tensor<T>, labels: Vec<Vec<usize>>, schema: AttributeSchema) -> Result<Self> {
        if x.shape().len() != 2 {
            return dim_err(format!("features must be an m×d matrix, got {:?}", x.shape()));
        }
        if labels.len() != schema.len() {
            return dim_err(format!(
                "{} label vectors for {} attributes",
                labels.len(),
                schema.len()
            ));
        }
        let m = x.rows();
        for (attr, lab) in schema.attributes().iter().zip(&labels) {
            if lab.len() != m {
                return dim_err(format!("attribute '{}' has {} labels for {m} samples", attr.name, lab.len()));
            }
            if let Some(&bad) = lab.iter().find(|&&l| l >= attr.classes) {
                return Err(Error::LabelOutOfRange { label: bad, classes: attr.classes });
            }
        }
        if let Some(v) = x.as_slice().iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::Config(format!("feature value {v} outside [0,1]")));
        }
        Ok(Self { x, labels, schema, split: SplitTag::All })
    }

    pub fn with_split(mut self, split: SplitTag) -> Self {
        self.split = split;
        self
    }

    pub fn features(&self) -> &Tensor<T> {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn all_labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn labels(&self, attribute: &str) -> Result<&[usize]> {
        Ok(&self.labels[self.schema.index_of(attribute)?])
    }

    pub fn classes(&self, attribute: &str) -> Result<usize> {
        Ok(self.schema.attributes()[self.schema.index_of(attribute)?].classes)
    }

    /// Rows `idx` in that order, keeping the schema.
    pub fn subset(&self, idx: &[usize], split: SplitTag) -> Self {
        Self {
            x: self.x.select_rows(idx),
            labels: self.labels.iter().map(|l| idx.iter().map(|&i| l[i]).collect()).collect(),
            schema: self.schema.clone(),
            split,
        }
    }

    /// Same labels with new features, which must stay in `[0,1]`.
    pub fn with_features(&self, x: Tensor<T>) -> Result<Self> {
        if x.shape() != self.x.shape() {
            return dim_err(format!(
                "replacement features {:?} do not match {:?}",
                x.shape(),
                self.x.shape()
            ));
        }
        let mut out = Self::new(x, self.labels.clone(), self.schema.clone())?;
        out.split = self.split;
        Ok(out)
    }

    /// Concatenates datasets sharing a schema and dimension.
    pub fn concat(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyDataset)?;
        let d = first.dim();
        let mut data = Vec::new();
        let mut labels = vec![Vec::new(); first.schema.len()];
        for p in parts {
            if p.dim() != d || p.schema != first.schema {
                return dim_err("datasets to concatenate disagree on dimension or schema");
            }
            data.extend_from_slice(p.x.as_slice());
            for (acc, l) in labels.iter_mut().zip(&p.labels) {
                acc.extend_from_slice(l);
            }
        }
        let m = data.len() / d.max(1);
        Self::new(Tensor::new(vec![m, d], data)?, labels, first.schema.clone())
    }
}
