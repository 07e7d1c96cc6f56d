//! Selection of which catalogue items to score.

use crate::error::{Error, Result};

/// The items a scoring call ranks: the whole catalogue, or an explicit
/// sorted list of unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemSubset {
    All,
    Explicit(Vec<u64>),
}

impl ItemSubset {
    /// Check the subset against a catalogue size and return its cardinality.
    pub fn validate(&self, num_items: u64) -> Result<usize> {
        match self {
            ItemSubset::All => Ok(num_items as usize),
            ItemSubset::Explicit(ids) => {
                for pair in ids.windows(2) {
                    if pair[0] >= pair[1] {
                        return Err(Error::InvalidSubset(format!(
                            "ids must be strictly increasing, found {} before {}",
                            pair[0], pair[1]
                        )));
                    }
                }
                if let Some(&last) = ids.last() {
                    if last >= num_items {
                        return Err(Error::InvalidSubset(format!(
                            "id {last} out of range (catalogue has {num_items} items)"
                        )));
                    }
                }
                Ok(ids.len())
            }
        }
    }

    pub fn len(&self, num_items: u64) -> usize {
        match self {
            ItemSubset::All => num_items as usize,
            ItemSubset::Explicit(ids) => ids.len(),
        }
    }

    /// Item id at a position of the subset's natural order.
    #[inline]
    pub fn id_at(&self, pos: usize) -> u64 {
        match self {
            ItemSubset::All => pos as u64,
            ItemSubset::Explicit(ids) => ids[pos],
        }
    }
}
