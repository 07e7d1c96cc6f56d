//! Dense matrix-multiplication scoring, the uncompressed baseline.

use crate::codebook::Codebook;
use crate::embedding::{SequenceEmbedding, SubItemEmbeddings};
use crate::error::{Error, Result};
use crate::scoring::subid::reconstruct_item_embedding;
use crate::scoring::subset::ItemSubset;
use crate::scoring::topk::{select_by_index, TopKResult};
use crate::synthetic::check_budget;

/// Row-major `num_items x dim` matrix of explicit item embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEmbeddingMatrix {
    num_items: u64,
    dim: usize,
    data: Vec<f32>,
}

impl DenseEmbeddingMatrix {
    pub fn new(num_items: u64, dim: usize, data: Vec<f32>) -> Result<Self> {
        if num_items == 0 || dim == 0 {
            return Err(Error::InvalidConfig(
                "dense matrix must have at least one row and column".into(),
            ));
        }
        let expected = num_items as usize * dim;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                what: "dense matrix data",
                expected,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                split: 0,
                sub_id: pos / dim,
                component: pos % dim,
            });
        }
        Ok(Self {
            num_items,
            dim,
            data,
        })
    }

    /// Expand a quantised instance into its explicit embedding matrix,
    /// refusing if the allocation would exceed `budget_bytes`. Rows come
    /// from validated finite sub-embeddings, so no re-scan is needed.
    pub fn from_reconstruction(
        codebook: &Codebook,
        embeddings: &SubItemEmbeddings,
        budget_bytes: u64,
    ) -> Result<Self> {
        crate::validate_instance(codebook, embeddings)?;
        let config = codebook.config();
        check_budget(config.dense_bytes(), budget_bytes)?;
        let mut data = Vec::with_capacity(config.num_items as usize * config.embed_dim);
        for item in 0..config.num_items {
            data.extend_from_slice(&reconstruct_item_embedding(embeddings, codebook, item)?);
        }
        Ok(Self {
            num_items: config.num_items,
            dim: config.embed_dim,
            data,
        })
    }

    pub fn num_items(&self) -> u64 {
        self.num_items
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, item: u64) -> &[f32] {
        let start = item as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Dot product over eight running lanes, folded in a fixed order.
/// The grouping differs from strictly ascending accumulation, so dense scores
/// agree with sub-id score sums only up to float32 reassociation error.
#[inline]
pub(crate) fn dot_lanes(a: &[f32], b: &[f32]) -> f32 {
    const LANES: usize = 8;
    let mut lanes = [0.0f32; LANES];
    let mut chunks_a = a.chunks_exact(LANES);
    let mut chunks_b = b.chunks_exact(LANES);
    for (ca, cb) in (&mut chunks_a).zip(&mut chunks_b) {
        for l in 0..LANES {
            lanes[l] += ca[l] * cb[l];
        }
    }
    let mut acc = ((lanes[0] + lanes[4]) + (lanes[2] + lanes[6]))
        + ((lanes[1] + lanes[5]) + (lanes[3] + lanes[7]));
    for (x, y) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
        acc += x * y;
    }
    acc
}

/// Exact top-K of the matrix-vector product `W * phi` over `subset`.
///
/// Materialises the full score vector for the subset before selecting, the
/// way the uncompressed scoring head computes all item scores at once.
pub fn matmul_topk(
    matrix: &DenseEmbeddingMatrix,
    phi: &SequenceEmbedding,
    k: usize,
    subset: &ItemSubset,
) -> Result<TopKResult> {
    if phi.dim() != matrix.dim {
        return Err(Error::DimensionMismatch {
            what: "sequence embedding dim",
            expected: matrix.dim,
            actual: phi.dim(),
        });
    }
    let n = subset.validate(matrix.num_items)?;
    let query = phi.values();
    let mut scores = Vec::with_capacity(n);
    match subset {
        ItemSubset::All => {
            for row in matrix.data.chunks_exact(matrix.dim) {
                scores.push(dot_lanes(row, query));
            }
        }
        ItemSubset::Explicit(ids) => {
            for &id in ids {
                scores.push(dot_lanes(matrix.row(id), query));
            }
        }
    }
    Ok(select_by_index(&scores, |pos| subset.id_at(pos), k))
}
