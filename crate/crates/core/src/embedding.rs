//! Sub-item embedding table and sequence embeddings.

use crate::config::PQConfig;
use crate::error::{Error, Result};

/// The shared sub-item embedding table: `num_splits x num_sub_ids` rows of
/// width `sub_dim`, stored contiguously split-major. Entry `(k, j)` is the
/// embedding of sub-id `j` in split `k`. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SubItemEmbeddings {
    config: PQConfig,
    table: Vec<f32>,
}

impl SubItemEmbeddings {
    pub fn new(config: PQConfig, table: Vec<f32>) -> Result<Self> {
        config.validate()?;
        let expected = config.num_splits * config.num_sub_ids * config.sub_dim();
        if table.len() != expected {
            return Err(Error::LengthMismatch {
                what: "sub-item embedding table",
                expected,
                actual: table.len(),
            });
        }
        let embeddings = Self { config, table };
        embeddings.check_finite()?;
        Ok(embeddings)
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let b = self.config.num_sub_ids;
        let w = self.config.sub_dim();
        for (pos, &v) in self.table.iter().enumerate() {
            if !v.is_finite() {
                let row = pos / w;
                return Err(Error::NonFinite {
                    split: row / b,
                    sub_id: row % b,
                    component: pos % w,
                });
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &PQConfig {
        &self.config
    }

    /// Embedding of sub-id `sub_id` in `split`.
    #[inline]
    pub fn sub_embedding(&self, split: usize, sub_id: usize) -> &[f32] {
        let w = self.config.sub_dim();
        let start = (split * self.config.num_sub_ids + sub_id) * w;
        &self.table[start..start + w]
    }

    /// All `num_sub_ids` rows of one split as a contiguous slice.
    #[inline]
    pub fn split_table(&self, split: usize) -> &[f32] {
        let w = self.config.sub_dim() * self.config.num_sub_ids;
        &self.table[split * w..(split + 1) * w]
    }

    pub fn table(&self) -> &[f32] {
        &self.table
    }
}

/// A d-dimensional query-side embedding, splittable into `m` sub-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEmbedding {
    values: Vec<f32>,
}

impl SequenceEmbedding {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig(
                "sequence embedding must be non-empty".into(),
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                split: 0,
                sub_id: 0,
                component: pos,
            });
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Borrowing split into `m` contiguous sub-vectors of equal width.
    pub fn split(&self, num_splits: usize) -> Result<Vec<&[f32]>> {
        split_embedding(&self.values, num_splits)
    }
}

/// Slice `phi` into `num_splits` sub-vectors; sub-vector `k` holds components
/// `[k*d/m, (k+1)*d/m)`. Concatenating the result reproduces `phi` exactly.
pub fn split_embedding(phi: &[f32], num_splits: usize) -> Result<Vec<&[f32]>> {
    if num_splits == 0 {
        return Err(Error::InvalidConfig("num_splits must be >= 1".into()));
    }
    if !phi.len().is_multiple_of(num_splits) {
        return Err(Error::InvalidConfig(format!(
            "embedding of dim {} not divisible into {} splits",
            phi.len(),
            num_splits
        )));
    }
    let w = phi.len() / num_splits;
    Ok(phi.chunks_exact(w).collect())
}
