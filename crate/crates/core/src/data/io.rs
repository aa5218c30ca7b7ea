//! CSV and IDX (MNIST) readers and writers.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};

use crate::data::{Attribute, AttributeSchema, Dataset};
use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::scalar::Scalar;

pub const LABEL_PREFIX: &str = "label:";
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Writes a header row (`label:<name>` columns then `x0..x{d-1}`) and one
/// row per sample.
pub fn save_csv<T: Scalar>(data: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> =
        data.schema().attributes().iter().map(|a| format!("{LABEL_PREFIX}{}", a.name)).collect();
    header.extend((0..data.dim()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for k in 0..data.len() {
        let mut rec: Vec<String> = data.all_labels().iter().map(|l| l[k].to_string()).collect();
        rec.extend(data.features().row(k).iter().map(|v| v.to_f64_lossy().to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`save_csv`]. Class counts are inferred as one more
/// than the largest label seen (at least 2).
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    read_csv(path, None)
}

/// Reads a CSV against a known schema; column names must match it.
pub fn load_csv_with_schema<T: Scalar>(path: impl AsRef<Path>, schema: &AttributeSchema) -> Result<Dataset<T>> {
    read_csv(path, Some(schema))
}

fn read_csv<T: Scalar>(path: impl AsRef<Path>, schema: Option<&AttributeSchema>) -> Result<Dataset<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let names: Vec<String> = header
        .iter()
        .take_while(|h| h.starts_with(LABEL_PREFIX))
        .map(|h| h[LABEL_PREFIX.len()..].to_string())
        .collect();
    let n_labels = names.len();
    for (j, h) in header.iter().skip(n_labels).enumerate() {
        if h != format!("x{j}") {
            return Err(Error::Format(format!("expected column x{j}, found '{h}'")));
        }
    }
    let d = header.len() - n_labels;
    let mut labels = vec![Vec::new(); n_labels];
    let mut feats = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Format(format!("row {} has {} fields, expected {}", line + 1, rec.len(), header.len())));
        }
        for (a, field) in rec.iter().take(n_labels).enumerate() {
            let v = field
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("row {}: bad label '{field}'", line + 1)))?;
            labels[a].push(v);
        }
        for field in rec.iter().skip(n_labels) {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("row {}: bad feature '{field}'", line + 1)))?;
            feats.push(T::of(v));
        }
    }
    let schema = match schema {
        Some(s) => {
            let expected: Vec<&str> = s.attributes().iter().map(|a| a.name.as_str()).collect();
            if expected != names.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::Format(format!("label columns {names:?} do not match schema {expected:?}")));
            }
            s.clone()
        }
        None => AttributeSchema::new(
            names
                .into_iter()
                .zip(&labels)
                .map(|(name, l)| Attribute { name, classes: l.iter().max().map_or(2, |&m| (m + 1).max(2)) })
                .collect(),
        )?,
    };
    let m = labels.first().map_or(feats.len() / d.max(1), Vec::len);
    Dataset::new(Tensor::new(vec![m, d], feats)?, labels, schema)
}

fn read_idx_header(r: &mut impl Read, magic: u32, what: &str) -> Result<Vec<usize>> {
    let found = r.read_u32::<BigEndian>().map_err(|_| Error::Format(format!("{what}: missing IDX header")))?;
    if found != magic {
        return Err(Error::Format(format!("{what}: IDX magic {found:#010x}, expected {magic:#010x}")));
    }
    let ndim = (magic & 0xff) as usize;
    (0..ndim)
        .map(|_| {
            r.read_u32::<BigEndian>()
                .map(|v| v as usize)
                .map_err(|_| Error::Format(format!("{what}: truncated IDX dimensions")))
        })
        .collect()
}

/// Reads an IDX image file (`u8`, 3-D) and matching label file; pixels are
/// scaled by 1/255. The single attribute is named `label`.
pub fn load_idx<T: Scalar>(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset<T>> {
    let mut ri = BufReader::new(File::open(images)?);
    let dims = read_idx_header(&mut ri, IDX_IMAGES_MAGIC, "images")?;
    let (m, d) = (dims[0], dims[1] * dims[2]);
    let mut pixels = vec![0u8; m * d];
    ri.read_exact(&mut pixels).map_err(|_| Error::Format("images: truncated pixel data".into()))?;

    let mut rl = BufReader::new(File::open(labels)?);
    let ldims = read_idx_header(&mut rl, IDX_LABELS_MAGIC, "labels")?;
    if ldims[0] != m {
        return Err(Error::Format(format!("{} labels for {m} images", ldims[0])));
    }
    let mut raw = vec![0u8; m];
    rl.read_exact(&mut raw).map_err(|_| Error::Format("labels: truncated label data".into()))?;
    let labels: Vec<usize> = raw.iter().map(|&b| b as usize).collect();
    let classes = labels.iter().max().map_or(2, |&c| (c + 1).max(2));

    let x = Tensor::new(vec![m, d], pixels.iter().map(|&p| T::of(p as f64 / 255.0)).collect())?;
    Dataset::new(x, vec![labels], AttributeSchema::new(vec![Attribute { name: "label".into(), classes }])?)
}
