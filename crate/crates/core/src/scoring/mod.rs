//! The three scoring paths and their shared selection machinery.

mod dense;
mod pqtopk;
mod recjpq;
mod subid;
mod subset;
mod topk;

pub use dense::{matmul_topk, DenseEmbeddingMatrix};
pub(crate) use dense::dot_lanes as dense_dot;
pub(crate) use subid::accumulate_item as subid_sum;
pub use pqtopk::{pq_topk, pq_topk_materialized, pq_topk_sequential, DEFAULT_CHUNK_ITEMS};
pub use recjpq::recjpq_score;
pub use subid::{compute_sub_id_scores, reconstruct_item_embedding, score_item, SubIdScoreMatrix};
pub use subset::ItemSubset;
pub use topk::{top_k_select, TopKResult};
