//! Split-major accumulator scoring, the measured baseline.

use crate::codebook::Codebook;
use crate::error::Result;
use crate::scoring::subid::SubIdScoreMatrix;
use crate::scoring::subset::ItemSubset;
use crate::scoring::topk::{select_by_index, TopKResult};

/// Top-K via a full score accumulator filled one split at a time.
///
/// The outer loop over splits is deliberately sequential and the whole score
/// buffer for `subset` is materialised before selection; this reproduces the
/// accumulator scoring cost profile that the item-major path improves on.
/// Because each item still receives its additions in ascending split order,
/// the result is bit-identical to [`crate::scoring::pq_topk`].
pub fn recjpq_score(
    codebook: &Codebook,
    scores: &SubIdScoreMatrix,
    k: usize,
    subset: &ItemSubset,
) -> Result<TopKResult> {
    let config = codebook.config();
    scores.check_shape(config)?;
    let n = subset.validate(config.num_items)?;

    let m = config.num_splits;
    let mut accumulator = vec![0.0f32; n];
    for split in 0..m {
        let row = scores.split_scores(split);
        match subset {
            ItemSubset::All => {
                let codes = codebook.codes();
                for (pos, acc) in accumulator.iter_mut().enumerate() {
                    *acc += row[codes[pos * m + split] as usize];
                }
            }
            ItemSubset::Explicit(ids) => {
                for (acc, &id) in accumulator.iter_mut().zip(ids) {
                    *acc += row[codebook.code(id, split) as usize];
                }
            }
        }
    }

    Ok(select_by_index(&accumulator, |pos| subset.id_at(pos), k))
}
