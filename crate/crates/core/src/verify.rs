//! Cross-method equivalence checking over random queries.

use std::collections::HashSet;

use crate::codebook::Codebook;
use crate::embedding::SubItemEmbeddings;
use crate::error::Result;
use crate::scoring::{
    compute_sub_id_scores, pq_topk, recjpq_score, DenseEmbeddingMatrix, ItemSubset,
};
use crate::synthetic::random_sequence_embedding;

/// Deviation between two scores, relative to their magnitude with a unit
/// floor. Scores of standard-normal instances scale like sqrt(d), so the
/// floor turns near-zero comparisons into absolute ones instead of letting
/// reassociation noise divide by almost nothing.
pub fn score_deviation(a: f32, b: f32) -> f64 {
    let diff = (a as f64 - b as f64).abs();
    diff / (a.abs() as f64).max(b.abs() as f64).max(1.0)
}

/// One mismatch observed during verification.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationFailure {
    pub query: usize,
    pub item: u64,
    pub detail: String,
}

/// Outcome of [`verify_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub queries: usize,
    /// Queries with no mismatch of any kind.
    pub passed: usize,
    /// Largest per-item deviation between dense and sub-id scores.
    pub max_deviation: f64,
    /// First few mismatches, in query order.
    pub failures: Vec<VerificationFailure>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.queries
    }
}

const MAX_RECORDED_FAILURES: usize = 16;

/// Check, for `queries` random query embeddings, that the item-major and
/// split-major paths return bit-identical rankings, and that both agree with
/// dense scoring over the reconstructed embedding matrix: every item's dense
/// score within `tolerance`, and identical top-K id sets whenever the K-th
/// and (K+1)-th dense scores are separated by more than `tolerance`.
pub fn verify_equivalence(
    codebook: &Codebook,
    embeddings: &SubItemEmbeddings,
    queries: usize,
    k: usize,
    tolerance: f64,
    seed: u64,
    budget_bytes: u64,
) -> Result<VerificationReport> {
    crate::validate_instance(codebook, embeddings)?;
    let config = codebook.config();
    let n = config.num_items as usize;
    let matrix = DenseEmbeddingMatrix::from_reconstruction(codebook, embeddings, budget_bytes)?;

    let mut report = VerificationReport {
        queries,
        passed: 0,
        max_deviation: 0.0,
        failures: Vec::new(),
    };

    for query in 0..queries {
        let phi = random_sequence_embedding(
            config.embed_dim,
            seed ^ (query as u64 + 1).wrapping_mul(0xA076_1D64_78BD_642F),
        )?;
        let scores = compute_sub_id_scores(embeddings, &phi)?;
        let mut query_failure: Option<VerificationFailure> = None;

        let item_major = pq_topk(codebook, &scores, k, &ItemSubset::All)?;
        let split_major = recjpq_score(codebook, &scores, k, &ItemSubset::All)?;
        if !item_major.bitwise_eq(&split_major) {
            let item = first_difference(&item_major, &split_major);
            query_failure = Some(VerificationFailure {
                query,
                item,
                detail: "item-major and split-major rankings differ bitwise".into(),
            });
        }

        // dense scores for every item, in id order
        let query_values = phi.values();
        let mut dense_scores = Vec::with_capacity(n);
        for item in 0..config.num_items {
            dense_scores.push(crate::scoring::dense_dot(matrix.row(item), query_values));
        }

        let b = scores.num_sub_ids();
        let table = scores.values();
        for (item, &dense) in dense_scores.iter().enumerate() {
            let pq = crate::scoring::subid_sum(codebook.item_codes(item as u64), table, b);
            let deviation = score_deviation(dense, pq);
            if deviation > report.max_deviation {
                report.max_deviation = deviation;
            }
            if deviation > tolerance && query_failure.is_none() {
                query_failure = Some(VerificationFailure {
                    query,
                    item: item as u64,
                    detail: format!(
                        "dense score {dense} deviates from sub-id score {pq} by {deviation:.3e}"
                    ),
                });
            }
        }

        // id-set comparison only when the K boundary is unambiguous
        if query_failure.is_none() && k > 0 {
            let boundary = crate::scoring::top_k_select(
                &dense_scores,
                &(0..config.num_items).collect::<Vec<_>>(),
                k + 1,
            )?;
            let gap_is_clear = boundary.len() <= k || {
                let entries = boundary.entries();
                score_deviation(entries[k - 1].1, entries[k].1) > tolerance
            };
            if gap_is_clear {
                let dense_ids: HashSet<u64> =
                    boundary.entries().iter().take(k).map(|e| e.0).collect();
                let pq_ids: HashSet<u64> = item_major.ids().into_iter().collect();
                if dense_ids != pq_ids {
                    let item = pq_ids
                        .symmetric_difference(&dense_ids)
                        .min()
                        .copied()
                        .unwrap_or(0);
                    query_failure = Some(VerificationFailure {
                        query,
                        item,
                        detail: "top-K id sets differ despite a clear score gap".into(),
                    });
                }
            }
        }

        match query_failure {
            None => report.passed += 1,
            Some(failure) => {
                if report.failures.len() < MAX_RECORDED_FAILURES {
                    report.failures.push(failure);
                }
            }
        }
    }

    Ok(report)
}

fn first_difference(
    a: &crate::scoring::TopKResult,
    b: &crate::scoring::TopKResult,
) -> u64 {
    for (ea, eb) in a.entries().iter().zip(b.entries()) {
        if ea.0 != eb.0 || ea.1.to_bits() != eb.1.to_bits() {
            return ea.0;
        }
    }
    a.entries()
        .get(b.len().min(a.len()).saturating_sub(1))
        .map(|e| e.0)
        .unwrap_or(0)
}
