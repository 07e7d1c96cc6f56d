//! Per-query sub-id score precomputation and single-item scoring.

use crate::codebook::Codebook;
use crate::config::PQConfig;
use crate::embedding::{SequenceEmbedding, SubItemEmbeddings};
use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `num_splits x num_sub_ids` table of precomputed scores. Entry `(k, j)` is
/// the dot product of sub-id `j`'s embedding in split `k` with the query
/// sub-embedding of split `k`. Computed once per query, reused for all items.
#[derive(Debug, Clone, PartialEq)]
pub struct SubIdScoreMatrix {
    num_splits: usize,
    num_sub_ids: usize,
    values: Vec<f32>,
}

impl SubIdScoreMatrix {
    pub fn num_splits(&self) -> usize {
        self.num_splits
    }

    pub fn num_sub_ids(&self) -> usize {
        self.num_sub_ids
    }

    #[inline]
    pub fn score(&self, split: usize, sub_id: usize) -> f32 {
        self.values[split * self.num_sub_ids + sub_id]
    }

    /// All scores of one split.
    #[inline]
    pub fn split_scores(&self, split: usize) -> &[f32] {
        &self.values[split * self.num_sub_ids..(split + 1) * self.num_sub_ids]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub(crate) fn check_shape(&self, config: &PQConfig) -> Result<()> {
        if self.num_splits != config.num_splits {
            return Err(Error::DimensionMismatch {
                what: "sub-id score matrix splits",
                expected: config.num_splits,
                actual: self.num_splits,
            });
        }
        if self.num_sub_ids != config.num_sub_ids {
            return Err(Error::DimensionMismatch {
                what: "sub-id score matrix sub-ids",
                expected: config.num_sub_ids,
                actual: self.num_sub_ids,
            });
        }
        Ok(())
    }
}

/// Dot product accumulated strictly in ascending component order.
#[inline]
fn dot_ascending(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

fn split_row(embeddings: &SubItemEmbeddings, phi_k: &[f32], split: usize) -> Vec<f32> {
    let config = embeddings.config();
    let w = config.sub_dim();
    embeddings
        .split_table(split)
        .chunks_exact(w)
        .map(|psi| dot_ascending(psi, phi_k))
        .collect()
}

/// Build the sub-id score matrix for one query embedding.
///
/// Each entry is summed in ascending component order; entries are mutually
/// independent, so splits are computed in parallel when the table is large.
pub fn compute_sub_id_scores(
    embeddings: &SubItemEmbeddings,
    phi: &SequenceEmbedding,
) -> Result<SubIdScoreMatrix> {
    let config = embeddings.config();
    if phi.dim() != config.embed_dim {
        return Err(Error::DimensionMismatch {
            what: "sequence embedding dim",
            expected: config.embed_dim,
            actual: phi.dim(),
        });
    }
    let sub_phis = phi.split(config.num_splits)?;

    #[cfg(feature = "parallel")]
    let values: Vec<f32> = if config.num_splits * config.num_sub_ids * config.sub_dim() >= (1 << 14)
    {
        (0..config.num_splits)
            .into_par_iter()
            .flat_map_iter(|k| split_row(embeddings, sub_phis[k], k))
            .collect()
    } else {
        (0..config.num_splits)
            .flat_map(|k| split_row(embeddings, sub_phis[k], k))
            .collect()
    };

    #[cfg(not(feature = "parallel"))]
    let values: Vec<f32> = (0..config.num_splits)
        .flat_map(|k| split_row(embeddings, sub_phis[k], k))
        .collect();

    Ok(SubIdScoreMatrix {
        num_splits: config.num_splits,
        num_sub_ids: config.num_sub_ids,
        values,
    })
}

/// Score one item as the sum of its sub-id scores, accumulated in ascending
/// split order in f32.
pub fn score_item(scores: &SubIdScoreMatrix, codebook: &Codebook, item: u64) -> Result<f32> {
    let config = codebook.config();
    scores.check_shape(config)?;
    if item >= config.num_items {
        return Err(Error::ItemOutOfRange {
            item,
            num_items: config.num_items,
        });
    }
    Ok(accumulate_item(
        codebook.item_codes(item),
        &scores.values,
        scores.num_sub_ids,
    ))
}

/// The shared per-item accumulation: start at zero and add the looked-up
/// sub-id score of each split in ascending order. Every scoring path that
/// promises bitwise-identical results routes through this exact sequence.
#[inline]
pub(crate) fn accumulate_item(codes: &[u16], score_table: &[f32], num_sub_ids: usize) -> f32 {
    let mut acc = 0.0f32;
    for (row, &code) in score_table.chunks_exact(num_sub_ids).zip(codes) {
        acc += row[code as usize];
    }
    acc
}

/// Rebuild an item's embedding by concatenating its sub-id embeddings in
/// split order.
pub fn reconstruct_item_embedding(
    embeddings: &SubItemEmbeddings,
    codebook: &Codebook,
    item: u64,
) -> Result<Vec<f32>> {
    let config = codebook.config();
    if embeddings.config() != config {
        return Err(Error::InvalidConfig(
            "codebook and embeddings built from different configs".into(),
        ));
    }
    if item >= config.num_items {
        return Err(Error::ItemOutOfRange {
            item,
            num_items: config.num_items,
        });
    }
    let mut out = Vec::with_capacity(config.embed_dim);
    for (split, &code) in codebook.item_codes(item).iter().enumerate() {
        out.extend_from_slice(embeddings.sub_embedding(split, code as usize));
    }
    Ok(out)
}
