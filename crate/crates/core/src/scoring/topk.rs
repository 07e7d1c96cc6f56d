//! Exact top-K selection with a deterministic tie rule.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// One scored item inside a selection.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub score: f32,
    pub id: u64,
}

impl Candidate {
    /// Ranking order: higher score first, equal scores by ascending item id.
    /// Scores compare by `total_cmp`, so the order is total for any bits.
    #[inline]
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.rank_cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_cmp(other)
    }
}

/// Bounded selector keeping the best `k` candidates seen so far.
///
/// A min-heap of size <= k holds the current selection with the worst
/// candidate at the root, so a push against a full selector is a single
/// compare in the common case.
#[derive(Debug)]
pub(crate) struct BoundedTopK {
    k: usize,
    heap: BinaryHeap<Reverse<Candidate>>,
}

impl BoundedTopK {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k.saturating_add(1).min(1 << 20)),
        }
    }

    #[inline]
    pub fn push(&mut self, candidate: Candidate) {
        if self.k == 0 {
            return;
        }
        if self.heap.len() < self.k {
            self.heap.push(Reverse(candidate));
        } else if let Some(mut worst) = self.heap.peek_mut() {
            if candidate > worst.0 {
                worst.0 = candidate;
            }
        }
    }

    /// Candidates in no particular order.
    pub fn into_unsorted(self) -> Vec<Candidate> {
        self.heap.into_iter().map(|Reverse(c)| c).collect()
    }

    /// Candidates best-first.
    pub fn into_ranked(self) -> Vec<Candidate> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|Reverse(c)| c)
            .collect()
    }
}

/// Ranked `(item_id, score)` pairs: scores non-increasing, equal scores by
/// ascending item id, no duplicate ids. The output contract of every scoring
/// path.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKResult {
    entries: Vec<(u64, f32)>,
}

impl TopKResult {
    pub(crate) fn from_ranked(candidates: Vec<Candidate>) -> Self {
        Self {
            entries: candidates.into_iter().map(|c| (c.id, c.score)).collect(),
        }
    }

    pub fn entries(&self) -> &[(u64, f32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.entries.iter().map(|&(id, _)| id).collect()
    }

    /// True iff both results hold the same ids with bit-identical scores.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits())
    }
}

/// Select the top `k` of `scores`, labelling positions with `ids`.
pub fn top_k_select(scores: &[f32], ids: &[u64], k: usize) -> Result<TopKResult> {
    if scores.len() != ids.len() {
        return Err(Error::LengthMismatch {
            what: "id list",
            expected: scores.len(),
            actual: ids.len(),
        });
    }
    Ok(select_by_index(scores, |pos| ids[pos], k))
}

/// Top-K over a score buffer whose position -> item id mapping is a closure,
/// so full-catalogue callers need not materialise an id array.
pub(crate) fn select_by_index(
    scores: &[f32],
    id_of: impl Fn(usize) -> u64,
    k: usize,
) -> TopKResult {
    let mut selector = BoundedTopK::new(k);
    for (pos, &score) in scores.iter().enumerate() {
        selector.push(Candidate {
            score,
            id: id_of(pos),
        });
    }
    TopKResult::from_ranked(selector.into_ranked())
}
