//! K-means product quantisation of dense embedding matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codebook::Codebook;
use crate::config::{PQConfig, MAX_SUB_IDS};
use crate::embedding::SubItemEmbeddings;
use crate::error::{Error, Result};
use crate::scoring::DenseEmbeddingMatrix;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Quality diagnostics from a codebook build.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantisationReport {
    /// Mean squared reconstruction error of each split.
    pub per_split_mse: Vec<f64>,
    /// Sum of the per-split errors.
    pub total_mse: f64,
    /// Lloyd rounds actually run per split.
    pub iterations: Vec<usize>,
    /// Non-fatal observations, e.g. more sub-ids than items.
    pub warnings: Vec<String>,
}

/// Ratio between the dense matrix footprint and the quantised footprint
/// (u16 code table plus the f32 sub-item embedding table).
pub fn compression_ratio(config: &PQConfig) -> f64 {
    config.dense_bytes() as f64 / config.instance_bytes() as f64
}

struct SplitResult {
    codes: Vec<u16>,
    centroids: Vec<f32>,
    mse: f64,
    iterations: usize,
}

/// Build a codebook and sub-item embedding table from explicit embeddings.
///
/// Runs Lloyd k-means independently per split on the column slices of `W`,
/// with distance-weighted seeding from a PRNG stream derived from `seed` and
/// the split index, so identical inputs rebuild identical codebooks. Stops a
/// split early once assignments stop changing; empty clusters are re-seeded
/// from the point farthest from its current centroid.
pub fn build_pq_codebook(
    matrix: &DenseEmbeddingMatrix,
    num_splits: usize,
    num_sub_ids: usize,
    max_iters: usize,
    seed: u64,
) -> Result<(Codebook, SubItemEmbeddings, QuantisationReport)> {
    if num_sub_ids == 0 || num_sub_ids > MAX_SUB_IDS {
        return Err(Error::InvalidConfig(format!(
            "num_sub_ids must be in [1, {MAX_SUB_IDS}], got {num_sub_ids}"
        )));
    }
    let config = PQConfig::new(
        matrix.num_items(),
        num_splits,
        num_sub_ids,
        matrix.dim(),
    )?;
    let n = matrix.num_items() as usize;

    let mut warnings = Vec::new();
    if num_sub_ids > n {
        warnings.push(format!(
            "num_sub_ids {num_sub_ids} exceeds the {n} items; some sub-ids will be duplicates"
        ));
    }

    let run_split = |split: usize| {
        let data = gather_split(matrix, &config, split);
        kmeans_split(
            &data,
            n,
            config.sub_dim(),
            num_sub_ids,
            max_iters,
            split_seed(seed, split),
        )
    };

    #[cfg(feature = "parallel")]
    let split_results: Vec<SplitResult> =
        (0..num_splits).into_par_iter().map(run_split).collect();
    #[cfg(not(feature = "parallel"))]
    let split_results: Vec<SplitResult> = (0..num_splits).map(run_split).collect();

    let mut codes = vec![0u16; n * num_splits];
    let mut table = Vec::with_capacity(num_splits * num_sub_ids * config.sub_dim());
    let mut per_split_mse = Vec::with_capacity(num_splits);
    let mut iterations = Vec::with_capacity(num_splits);
    for (split, result) in split_results.into_iter().enumerate() {
        for (item, &code) in result.codes.iter().enumerate() {
            codes[item * num_splits + split] = code;
        }
        table.extend_from_slice(&result.centroids);
        per_split_mse.push(result.mse);
        iterations.push(result.iterations);
    }

    let total_mse = per_split_mse.iter().sum();
    Ok((
        Codebook::new(config, codes)?,
        SubItemEmbeddings::new(config, table)?,
        QuantisationReport {
            per_split_mse,
            total_mse,
            iterations,
            warnings,
        },
    ))
}

fn split_seed(seed: u64, split: usize) -> u64 {
    seed.wrapping_add((split as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Contiguous copy of one split's sub-vectors for cache-friendly scans.
fn gather_split(matrix: &DenseEmbeddingMatrix, config: &PQConfig, split: usize) -> Vec<f32> {
    let w = config.sub_dim();
    let offset = split * w;
    let mut data = Vec::with_capacity(config.num_items as usize * w);
    for item in 0..config.num_items {
        let row = matrix.row(item);
        data.extend_from_slice(&row[offset..offset + w]);
    }
    data
}

#[inline]
fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = (*x - *y) as f64;
        acc += d * d;
    }
    acc
}

fn kmeans_split(
    data: &[f32],
    n: usize,
    width: usize,
    b: usize,
    max_iters: usize,
    seed: u64,
) -> SplitResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |i: usize| &data[i * width..(i + 1) * width];

    // Distance-weighted seeding: first centroid uniform, the rest drawn
    // proportionally to squared distance from the chosen set.
    let mut centroids = Vec::with_capacity(b * width);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(point(first));
    let mut seed_dist: Vec<f64> = (0..n).map(|i| sq_dist(point(i), point(first))).collect();
    for c in 1..b {
        let total: f64 = seed_dist.iter().sum();
        let chosen = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in seed_dist.iter().enumerate() {
                r -= d;
                if r <= 0.0 {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            // every point already coincides with a centroid
            c % n
        };
        let start = c * width;
        centroids.extend_from_slice(point(chosen));
        let chosen_slice = &centroids[start..start + width];
        for (i, d) in seed_dist.iter_mut().enumerate() {
            *d = d.min(sq_dist(point(i), chosen_slice));
        }
    }

    let assign = |centroids: &[f32]| -> Vec<u16> {
        (0..n)
            .map(|i| {
                let x = point(i);
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (j, centroid) in centroids.chunks_exact(width).enumerate() {
                    let d = sq_dist(x, centroid);
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                best as u16
            })
            .collect()
    };

    let mut assignment = assign(&centroids);
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;

        // means in f64, then back to f32 centroids
        let mut sums = vec![0.0f64; b * width];
        let mut counts = vec![0usize; b];
        for (i, &code) in assignment.iter().enumerate() {
            counts[code as usize] += 1;
            let target = &mut sums[code as usize * width..(code as usize + 1) * width];
            for (t, &v) in target.iter_mut().zip(point(i)) {
                *t += v as f64;
            }
        }
        for j in 0..b {
            if counts[j] == 0 {
                continue;
            }
            let inv = 1.0 / counts[j] as f64;
            for c in 0..width {
                centroids[j * width + c] = (sums[j * width + c] * inv) as f32;
            }
        }

        // empty clusters grab the point farthest from its centroid
        let mut taken = vec![false; n];
        for j in 0..b {
            if counts[j] > 0 {
                continue;
            }
            let mut far_idx = 0usize;
            let mut far_d = -1.0f64;
            for (i, &code) in assignment.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let d = sq_dist(
                    point(i),
                    &centroids[code as usize * width..(code as usize + 1) * width],
                );
                if d > far_d {
                    far_d = d;
                    far_idx = i;
                }
            }
            taken[far_idx] = true;
            centroids[j * width..(j + 1) * width].copy_from_slice(point(far_idx));
        }

        let next = assign(&centroids);
        let converged = next == assignment;
        assignment = next;
        if converged {
            break;
        }
    }

    let mse = assignment
        .iter()
        .enumerate()
        .map(|(i, &code)| {
            sq_dist(
                point(i),
                &centroids[code as usize * width..(code as usize + 1) * width],
            )
        })
        .sum::<f64>()
        / n as f64;

    SplitResult {
        codes: assignment,
        centroids,
        mse,
        iterations,
    }
}
