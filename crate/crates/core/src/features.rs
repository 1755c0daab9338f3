//! Fixed-length block-count feature vectors.
//!
//! The normalized frame is tiled from the top left into square blocks and
//! the minutiae falling in each block are counted. The vector length
//! depends only on the frame and block size: a 320x224 frame gives 1120,
//! 280 or 70 features for 8, 16 or 32 pixel blocks.

use crate::error::{Error, Result};
use crate::minutiae::{MinutiaKind, MinutiaeSet};

/// Block sizes the pipeline supports.
pub const BLOCK_SIZES: [u32; 3] = [8, 16, 32];

/// Per-block minutiae counts in row-major block order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub block_size: u32,
    pub counts: Vec<u32>,
    /// Person identifier, when known.
    pub label: Option<String>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Counts as floating-point inputs for the classifier.
    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| f64::from(c)).collect()
    }
}

/// Expected vector length for a frame tiled with `block_size` blocks;
/// partial blocks at the right and bottom edges count as whole blocks.
pub fn grid_len(width: u32, height: u32, block_size: u32) -> usize {
    let across = width.div_ceil(block_size) as usize;
    let down = height.div_ceil(block_size) as usize;
    across * down
}

/// Counts minutiae per block. Terminations and bifurcations always count;
/// normal points only when `include_normal` is set.
pub fn block_features(
    set: &MinutiaeSet,
    block_size: u32,
    include_normal: bool,
) -> Result<FeatureVector> {
    if !BLOCK_SIZES.contains(&block_size) {
        return Err(Error::InvalidBlockSize(block_size));
    }
    let across = set.width.div_ceil(block_size) as usize;
    let mut counts = vec![0u32; grid_len(set.width, set.height, block_size)];
    for m in &set.points {
        if m.kind == MinutiaKind::Normal && !include_normal {
            continue;
        }
        let block = (m.y / block_size) as usize * across + (m.x / block_size) as usize;
        counts[block] += 1;
    }
    Ok(FeatureVector {
        block_size,
        counts,
        label: None,
    })
}

/// Writes feature vectors as CSV: header, then one `label,c0,...,cN-1` row
/// per vector. Labels must not contain commas or line breaks.
pub fn features_to_csv(vectors: &[FeatureVector]) -> Result<String> {
    let dim = match vectors.first() {
        Some(v) => v.len(),
        None => return Err(Error::EmptyDataset),
    };
    let mut out = String::from("label");
    for i in 0..dim {
        out.push_str(&format!(",c{i}"));
    }
    out.push('\n');
    for v in vectors {
        if v.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "feature vector of length {} in a set of length {dim}",
                v.len()
            )));
        }
        let label = v.label.as_deref().unwrap_or("");
        if label.contains(',') || label.contains('\n') {
            return Err(Error::malformed("feature csv", format!("label {label:?}")));
        }
        out.push_str(label);
        for c in &v.counts {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses the CSV form written by [`features_to_csv`]. The block size is
/// not stored in the file; the caller supplies it.
pub fn features_from_csv(text: &str, block_size: u32) -> Result<Vec<FeatureVector>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::malformed("feature csv", "missing header"))?;
    let dim = header.split(',').count().saturating_sub(1);
    if dim == 0 || !header.starts_with("label,") {
        return Err(Error::malformed("feature csv", "header must be label,c0,..."));
    }
    let mut vectors = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or("").to_string();
        let counts: Vec<u32> = fields
            .map(|f| {
                f.parse::<u32>().map_err(|e| {
                    Error::malformed("feature csv", format!("line {}: {e}", lineno + 2))
                })
            })
            .collect::<Result<_>>()?;
        if counts.len() != dim {
            return Err(Error::malformed(
                "feature csv",
                format!("line {} has {} counts, expected {dim}", lineno + 2, counts.len()),
            ));
        }
        vectors.push(FeatureVector {
            block_size,
            counts,
            label: if label.is_empty() { None } else { Some(label) },
        });
    }
    Ok(vectors)
}
