//! CPU-only product-quantisation scoring for large item catalogues.
//!
//! Items are represented by `m` sub-ids drawn from per-split vocabularies of
//! size `b`; item embeddings are concatenations of shared sub-id embeddings.
//! Scoring a query then reduces to precomputing an `m x b` table of sub-id
//! scores and summing `m` table entries per item, instead of a `d`-wide dot
//! product against an explicit embedding row. This crate provides:
//!
//! - the item-major top-K scan ([`scoring::pq_topk`]), data-parallel over
//!   item chunks with a deterministic merge;
//! - the split-major accumulator baseline ([`scoring::recjpq_score`]) and the
//!   dense matrix-multiplication baseline ([`scoring::matmul_topk`]);
//! - a k-means codebook builder for explicit embedding matrices
//!   ([`quantize::build_pq_codebook`]);
//! - a deterministic synthetic-instance generator and a scaling benchmark
//!   harness with CSV/JSON reports ([`bench`]).
//!
//! All three scoring paths return the same ranking; the two sub-id paths are
//! bit-identical because both add each item's sub-id scores in ascending
//! split order in f32.
//!
//! The `parallel` feature (default) enables the rayon scan; without it every
//! path runs single-threaded with identical results.

pub mod bench;
mod codebook;
mod config;
pub mod demo;
mod embedding;
mod error;
pub mod io;
pub mod quantize;
pub mod scoring;
pub mod synthetic;
pub mod verify;

pub use codebook::Codebook;
pub use config::{PQConfig, MAX_SUB_IDS};
pub use embedding::{split_embedding, SequenceEmbedding, SubItemEmbeddings};
pub use error::{Error, Result};

/// Check that a codebook and an embedding table form a consistent instance:
/// identical configs, every code within range, every value finite.
pub fn validate_instance(
    codebook: &Codebook,
    embeddings: &SubItemEmbeddings,
) -> Result<()> {
    if codebook.config() != embeddings.config() {
        return Err(Error::InvalidConfig(format!(
            "codebook config {:?} does not match embeddings config {:?}",
            codebook.config(),
            embeddings.config()
        )));
    }
    codebook.config().validate()?;
    codebook.check_codes()?;
    embeddings.check_finite()?;
    Ok(())
}
