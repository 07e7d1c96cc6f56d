//! Deterministic synthetic instance generation for scaling studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codebook::Codebook;
use crate::config::PQConfig;
use crate::embedding::{SequenceEmbedding, SubItemEmbeddings};
use crate::error::{Error, Result};

/// A generated (codebook, sub-item embeddings, query embedding) triple.
pub type SyntheticInstance = (Codebook, SubItemEmbeddings, SequenceEmbedding);

/// Fallback when physical memory cannot be detected.
const FALLBACK_MEMORY_BYTES: u64 = 8 << 30;

/// Total physical memory reported by the OS, if detectable.
pub fn detect_physical_memory() -> Option<u64> {
    let meminfo = std::fs::read_to_string("/proc/meminfo").ok()?;
    for line in meminfo.lines() {
        if let Some(rest) = line.strip_prefix("MemTotal:") {
            let kb: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}

/// Default allocation guard: 75% of detected physical memory.
pub fn default_memory_budget() -> u64 {
    let total = detect_physical_memory().unwrap_or(FALLBACK_MEMORY_BYTES);
    total / 4 * 3
}

/// Refuse allocations that would blow past `budget`, with the size estimate
/// in the error so callers can report it.
pub fn check_budget(required_bytes: u64, budget_bytes: u64) -> Result<()> {
    if required_bytes > budget_bytes {
        return Err(Error::MemoryBudgetExceeded {
            required_bytes,
            budget_bytes,
        });
    }
    Ok(())
}

/// Generate a random instance: codes uniform in `[0, num_sub_ids)`, embedding
/// table and query embedding i.i.d. standard normal. A fixed `(config, seed)`
/// pair reproduces bit-identical output. Uses the default memory budget.
pub fn generate_synthetic(config: &PQConfig, seed: u64) -> Result<SyntheticInstance> {
    generate_synthetic_with_budget(config, seed, default_memory_budget())
}

/// As [`generate_synthetic`] with an explicit budget in bytes.
pub fn generate_synthetic_with_budget(
    config: &PQConfig,
    seed: u64,
    budget_bytes: u64,
) -> Result<SyntheticInstance> {
    config.validate()?;
    check_budget(config.instance_bytes(), budget_bytes)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let num_codes = config.num_items as usize * config.num_splits;
    let b = config.num_sub_ids as u32;
    let mut codes = Vec::with_capacity(num_codes);
    for _ in 0..num_codes {
        codes.push(rng.random_range(0..b) as u16);
    }

    let table_len = config.num_splits * config.num_sub_ids * config.sub_dim();
    let mut table = Vec::with_capacity(table_len);
    for _ in 0..table_len {
        table.push(rng.sample::<f32, _>(StandardNormal));
    }

    let mut phi = Vec::with_capacity(config.embed_dim);
    for _ in 0..config.embed_dim {
        phi.push(rng.sample::<f32, _>(StandardNormal));
    }

    Ok((
        Codebook::new(*config, codes)?,
        SubItemEmbeddings::new(*config, table)?,
        SequenceEmbedding::new(phi)?,
    ))
}

/// A fresh standard-normal query embedding of dimension `dim`, deterministic
/// in `seed`. Used to draw per-query embeddings independently of the instance.
pub fn random_sequence_embedding(dim: usize, seed: u64) -> Result<SequenceEmbedding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..dim)
        .map(|_| rng.sample::<f32, _>(StandardNormal))
        .collect();
    SequenceEmbedding::new(values)
}
