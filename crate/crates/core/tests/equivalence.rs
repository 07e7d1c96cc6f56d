//! Cross-path properties: the two sub-id scoring orders agree bitwise, both
//! agree with dense scoring over reconstructed embeddings up to float32
//! reassociation, and subsetting commutes with ranking.

use proptest::prelude::*;

use pqtopk::scoring::{
    compute_sub_id_scores, matmul_topk, pq_topk, pq_topk_materialized, pq_topk_sequential,
    recjpq_score, score_item, DenseEmbeddingMatrix, ItemSubset,
};
use pqtopk::synthetic::generate_synthetic;
use pqtopk::verify::score_deviation;
use pqtopk::{split_embedding, PQConfig};

/// Small random instance shapes: m in {1,2,4,8}, every d divisible by m.
fn instance_shapes() -> impl Strategy<Value = (u64, usize, usize, usize, u64)> {
    (
        1u64..300,
        prop_oneof![Just(1usize), Just(2), Just(4), Just(8)],
        1usize..32,
        1usize..12,
        any::<u64>(),
    )
        .prop_map(|(items, m, b, sub_dim, seed)| (items, m, b, m * sub_dim, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn item_major_and_split_major_are_bitwise_equal(
        (items, m, b, d, seed) in instance_shapes(),
        k in 0usize..40,
    ) {
        let config = PQConfig::new(items, m, b, d).unwrap();
        let (codebook, embeddings, phi) = generate_synthetic(&config, seed).unwrap();
        let scores = compute_sub_id_scores(&embeddings, &phi).unwrap();
        let item_major = pq_topk(&codebook, &scores, k, &ItemSubset::All).unwrap();
        let split_major = recjpq_score(&codebook, &scores, k, &ItemSubset::All).unwrap();
        prop_assert!(item_major.bitwise_eq(&split_major));

        let sequential = pq_topk_sequential(&codebook, &scores, k, &ItemSubset::All).unwrap();
        let materialized = pq_topk_materialized(&codebook, &scores, k, &ItemSubset::All).unwrap();
        prop_assert!(item_major.bitwise_eq(&sequential));
        prop_assert!(item_major.bitwise_eq(&materialized));
    }

    #[test]
    fn dense_scores_match_sub_id_sums_within_tolerance(
        (items, m, b, d, seed) in instance_shapes(),
    ) {
        let config = PQConfig::new(items, m, b, d).unwrap();
        let (codebook, embeddings, phi) = generate_synthetic(&config, seed).unwrap();
        let scores = compute_sub_id_scores(&embeddings, &phi).unwrap();
        let matrix =
            DenseEmbeddingMatrix::from_reconstruction(&codebook, &embeddings, u64::MAX).unwrap();
        let dense = matmul_topk(&matrix, &phi, items as usize, &ItemSubset::All).unwrap();
        for &(item, dense_score) in dense.entries() {
            let pq_score = score_item(&scores, &codebook, item).unwrap();
            prop_assert!(
                score_deviation(dense_score, pq_score) <= 1e-4,
                "item {item}: dense {dense_score} vs sub-id {pq_score}"
            );
        }
    }

    #[test]
    fn explicit_subset_equals_filtered_full_ranking(
        (items, m, b, d, seed) in instance_shapes(),
        k in 1usize..20,
        subset_mask in any::<u64>(),
    ) {
        let config = PQConfig::new(items, m, b, d).unwrap();
        let (codebook, embeddings, phi) = generate_synthetic(&config, seed).unwrap();
        let scores = compute_sub_id_scores(&embeddings, &phi).unwrap();

        let ids: Vec<u64> = (0..items)
            .filter(|id| subset_mask.rotate_left((*id % 64) as u32) & 1 == 1)
            .collect();
        let subset = ItemSubset::Explicit(ids.clone());

        let restricted = pq_topk(&codebook, &scores, k, &subset).unwrap();
        let full = pq_topk(&codebook, &scores, items as usize, &ItemSubset::All).unwrap();
        let filtered: Vec<(u64, f32)> = full
            .entries()
            .iter()
            .filter(|(id, _)| ids.binary_search(id).is_ok())
            .take(k)
            .copied()
            .collect();
        prop_assert_eq!(restricted.entries(), &filtered[..]);
    }

    #[test]
    fn split_then_concatenate_is_identity(
        parts in prop::collection::vec(-1e3f32..1e3, 1..64),
        m in 1usize..8,
    ) {
        let phi: Vec<f32> = parts.iter().cycle().take(parts.len() * m).copied().collect();
        let splits = split_embedding(&phi, m).unwrap();
        prop_assert_eq!(splits.len(), m);
        let concat: Vec<f32> = splits.into_iter().flatten().copied().collect();
        prop_assert_eq!(concat, phi);
    }

    #[test]
    fn generation_is_a_pure_function_of_config_and_seed(
        (items, m, b, d, seed) in instance_shapes(),
    ) {
        let config = PQConfig::new(items, m, b, d).unwrap();
        let first = generate_synthetic(&config, seed).unwrap();
        let second = generate_synthetic(&config, seed).unwrap();
        prop_assert_eq!(first.0, second.0);
        prop_assert_eq!(first.1, second.1);
        prop_assert_eq!(first.2, second.2);
    }
}

/// Reconstructed dot products must agree with sub-id score sums; this pins
/// the link between embedding reconstruction and the precomputed-score path
/// on a mid-size instance.
#[test]
fn reconstruction_dot_matches_score_item() {
    let config = PQConfig::new(500, 8, 16, 64).unwrap();
    let (codebook, embeddings, phi) = generate_synthetic(&config, 17).unwrap();
    let scores = compute_sub_id_scores(&embeddings, &phi).unwrap();
    for item in 0..500u64 {
        let row =
            pqtopk::scoring::reconstruct_item_embedding(&embeddings, &codebook, item).unwrap();
        let dot: f64 = row
            .iter()
            .zip(phi.values())
            .map(|(a, b)| *a as f64 * *b as f64)
            .sum();
        let via_table = score_item(&scores, &codebook, item).unwrap();
        assert!(
            score_deviation(dot as f32, via_table) <= 1e-4,
            "item {item}: {dot} vs {via_table}"
        );
    }
}
