//! Item-major top-K scoring over precomputed sub-id scores.

use crate::codebook::Codebook;
use crate::error::Result;
use crate::scoring::subid::{accumulate_item, SubIdScoreMatrix};
use crate::scoring::subset::ItemSubset;
use crate::scoring::topk::{BoundedTopK, Candidate, TopKResult};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Items per worker chunk. Each chunk keeps a bounded local selection, so
/// only `chunks * K` candidates survive to the merge.
pub const DEFAULT_CHUNK_ITEMS: usize = 8192;

/// Exact top-K of per-item sub-id score sums over `subset`.
///
/// Each item's scores are added together in ascending split order; the result
/// is therefore bit-identical to the split-major accumulator path and
/// independent of chunking and thread count. With the `parallel` feature the
/// chunk scans run on the rayon pool; otherwise they run on this thread.
pub fn pq_topk(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    k: usize,
    subset: &ItemSubset,
) -> Result<TopKResult> {
    #[cfg(feature = "parallel")]
    {
        pq_topk_impl::<true>(codebook, scores, k, subset, DEFAULT_CHUNK_ITEMS)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pq_topk_impl(codebook, scores, k, subset, DEFAULT_CHUNK_ITEMS)
    }
}

/// Single-threaded variant of [`pq_topk`]; same chunking, same output bits.
pub fn pq_topk_sequential(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    k: usize,
    subset: &ItemSubset,
) -> Result<TopKResult> {
    #[cfg(feature = "parallel")]
    {
        pq_topk_impl::<false>(codebook, scores, k, subset, DEFAULT_CHUNK_ITEMS)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pq_topk_impl(codebook, scores, k, subset, DEFAULT_CHUNK_ITEMS)
    }
}

/// Verification fallback: materialise every score in subset order, then run
/// one exact selection over the full buffer.
pub fn pq_topk_materialized(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    k: usize,
    subset: &ItemSubset,
) -> Result<TopKResult> {
    let config = codebook.config();
    scores.check_shape(config)?;
    let n = subset.validate(config.num_items)?;
    let b = scores.num_sub_ids();
    let table = scores.values();
    let mut buffer = Vec::with_capacity(n);
    for pos in 0..n {
        let codes = codebook.item_codes(subset.id_at(pos));
        buffer.push(accumulate_item(codes, table, b));
    }
    Ok(crate::scoring::topk::select_by_index(
        &buffer,
        |pos| subset.id_at(pos),
        k,
    ))
}

#[cfg(feature = "parallel")]
fn pq_topk_impl<const PAR: bool>(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    k: usize,
    subset: &ItemSubset,
    chunk_items: usize,
) -> Result<TopKResult> {
    let config = codebook.config();
    scores.check_shape(config)?;
    let n = subset.validate(config.num_items)?;
    if k == 0 || n == 0 {
        return Ok(TopKResult::from_ranked(Vec::new()));
    }

    let starts: Vec<usize> = (0..n).step_by(chunk_items).collect();
    let scan = |start: usize| scan_chunk(codebook, scores, subset, start, chunk_items.min(n - start), k);

    let per_chunk: Vec<Vec<Candidate>> = if PAR && starts.len() > 1 {
        starts.into_par_iter().map(scan).collect()
    } else {
        starts.into_iter().map(scan).collect()
    };

    Ok(merge_chunks(per_chunk, k))
}

#[cfg(not(feature = "parallel"))]
fn pq_topk_impl(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    k: usize,
    subset: &ItemSubset,
    chunk_items: usize,
) -> Result<TopKResult> {
    let config = codebook.config();
    scores.check_shape(config)?;
    let n = subset.validate(config.num_items)?;
    if k == 0 || n == 0 {
        return Ok(TopKResult::from_ranked(Vec::new()));
    }

    let per_chunk: Vec<Vec<Candidate>> = (0..n)
        .step_by(chunk_items)
        .map(|start| scan_chunk(codebook, scores, subset, start, chunk_items.min(n - start), k))
        .collect();

    Ok(merge_chunks(per_chunk, k))
}

/// Score `len` items of `subset` starting at `start`, keeping the chunk-local
/// top `k`. Returned candidates are unordered; the merge re-ranks them.
fn scan_chunk(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    subset: &ItemSubset,
    start: usize,
    len: usize,
    k: usize,
) -> Vec<Candidate> {
    let b = scores.num_sub_ids();
    let table = scores.values();
    let mut local = BoundedTopK::new(k);
    match subset {
        ItemSubset::All => {
            let m = codebook.config().num_splits;
            let codes = codebook.codes();
            for id in start as u64..(start + len) as u64 {
                let row = &codes[id as usize * m..id as usize * m + m];
                local.push(Candidate {
                    score: accumulate_item(row, table, b),
                    id,
                });
            }
        }
        ItemSubset::Explicit(ids) => {
            for &id in &ids[start..start + len] {
                local.push(Candidate {
                    score: accumulate_item(codebook.item_codes(id), table, b),
                    id,
                });
            }
        }
    }
    local.into_unsorted()
}

/// The top-K set under a total order is unique, so merging chunk-local
/// selections in any order yields the same ranking.
fn merge_chunks(per_chunk: Vec<Vec<Candidate>>, k: usize) -> TopKResult {
    let mut merged = BoundedTopK::new(k);
    for chunk in per_chunk {
        for candidate in chunk {
            merged.push(candidate);
        }
    }
    TopKResult::from_ranked(merged.into_ranked())
}
