//! A tiny fully worked instance used across docs and tests.

use crate::codebook::Codebook;
use crate::config::PQConfig;
use crate::embedding::{SequenceEmbedding, SubItemEmbeddings};

/// Three items, two splits of width two, two sub-ids per split.
///
/// Query `[1, 2, 3, 4]` against split tables `[[1,0],[0,1]]` and
/// `[[1,1],[2,0]]` yields the sub-id score matrix `[[1, 2], [7, 6]]`;
/// items coded `[0,0]`, `[1,1]` and `[0,1]` then score 8, 8 and 7,
/// ranking as `[(0, 8), (1, 8), (2, 7)]` with the tie broken by id.
pub fn demo_instance() -> (Codebook, SubItemEmbeddings, SequenceEmbedding) {
    let config = PQConfig::new(3, 2, 2, 4).expect("demo config is valid");
    let codebook = Codebook::new(config, vec![0, 0, 1, 1, 0, 1]).expect("demo codes are valid");
    let table = vec![
        1.0, 0.0, // split 0, sub-id 0
        0.0, 1.0, // split 0, sub-id 1
        1.0, 1.0, // split 1, sub-id 0
        2.0, 0.0, // split 1, sub-id 1
    ];
    let embeddings = SubItemEmbeddings::new(config, table).expect("demo table is valid");
    let phi = SequenceEmbedding::new(vec![1.0, 2.0, 3.0, 4.0]).expect("demo query is valid");
    (codebook, embeddings, phi)
}

/// The ranking every scoring path must produce for the demo instance at K=3.
pub fn demo_ranking() -> Vec<(u64, f32)> {
    vec![(0, 8.0), (1, 8.0), (2, 7.0)]
}
