//! Quantisation geometry shared by every instance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of sub-ids per split representable by a `u16` code.
pub const MAX_SUB_IDS: usize = 1 << 16;

/// Shape of a product-quantised catalogue: `num_items` items, each mapped to
/// one sub-id in each of `num_splits` splits with `num_sub_ids` choices per
/// split, reconstructing `embed_dim`-dimensional embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PQConfig {
    pub num_items: u64,
    pub num_splits: usize,
    pub num_sub_ids: usize,
    pub embed_dim: usize,
}

impl PQConfig {
    pub fn new(
        num_items: u64,
        num_splits: usize,
        num_sub_ids: usize,
        embed_dim: usize,
    ) -> Result<Self> {
        let config = Self {
            num_items,
            num_splits,
            num_sub_ids,
            embed_dim,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_items == 0 {
            return Err(Error::InvalidConfig("num_items must be >= 1".into()));
        }
        if self.num_splits == 0 {
            return Err(Error::InvalidConfig("num_splits must be >= 1".into()));
        }
        if self.num_sub_ids == 0 {
            return Err(Error::InvalidConfig("num_sub_ids must be >= 1".into()));
        }
        if self.num_sub_ids > MAX_SUB_IDS {
            return Err(Error::InvalidConfig(format!(
                "num_sub_ids {} exceeds the u16 code limit {}",
                self.num_sub_ids, MAX_SUB_IDS
            )));
        }
        if self.embed_dim < self.num_splits {
            return Err(Error::InvalidConfig(format!(
                "embed_dim {} must be >= num_splits {}",
                self.embed_dim, self.num_splits
            )));
        }
        if !self.embed_dim.is_multiple_of(self.num_splits) {
            return Err(Error::InvalidConfig(format!(
                "embed_dim {} not divisible by num_splits {}",
                self.embed_dim, self.num_splits
            )));
        }
        Ok(())
    }

    /// Width of each sub-embedding, `embed_dim / num_splits`.
    pub fn sub_dim(&self) -> usize {
        self.embed_dim / self.num_splits
    }

    /// Bytes held by the code table: one u16 per (item, split).
    pub fn code_table_bytes(&self) -> u64 {
        saturating_u64(self.num_items as u128 * self.num_splits as u128 * 2)
    }

    /// Bytes held by the sub-item embedding table (f32 entries).
    pub fn sub_embedding_bytes(&self) -> u64 {
        saturating_u64(
            self.num_splits as u128 * self.num_sub_ids as u128 * self.sub_dim() as u128 * 4,
        )
    }

    /// Bytes a full dense embedding matrix of this catalogue would occupy.
    pub fn dense_bytes(&self) -> u64 {
        saturating_u64(self.num_items as u128 * self.embed_dim as u128 * 4)
    }

    /// Bytes of an in-memory instance (code table + sub-item embeddings).
    pub fn instance_bytes(&self) -> u64 {
        self.code_table_bytes()
            .saturating_add(self.sub_embedding_bytes())
    }
}

fn saturating_u64(v: u128) -> u64 {
    v.min(u64::MAX as u128) as u64
}
