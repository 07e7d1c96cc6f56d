//! The code table mapping each item to its sub-ids.

use crate::config::PQConfig;
use crate::error::{Error, Result};

/// Row-major `num_items x num_splits` table of sub-id assignments.
///
/// Entry `(i, k)` is the sub-id of item `i` in split `k`, always below
/// `config.num_sub_ids`. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    config: PQConfig,
    codes: Vec<u16>,
}

impl Codebook {
    /// Validate and take ownership of a row-major code table.
    pub fn new(config: PQConfig, codes: Vec<u16>) -> Result<Self> {
        config.validate()?;
        let expected = config.num_items as usize * config.num_splits;
        if codes.len() != expected {
            return Err(Error::LengthMismatch {
                what: "code table",
                expected,
                actual: codes.len(),
            });
        }
        let codebook = Self { config, codes };
        codebook.check_codes()?;
        Ok(codebook)
    }

    pub(crate) fn check_codes(&self) -> Result<()> {
        let m = self.config.num_splits;
        let b = self.config.num_sub_ids;
        for (pos, &code) in self.codes.iter().enumerate() {
            if code as usize >= b {
                return Err(Error::CodeOutOfRange {
                    item: (pos / m) as u64,
                    split: pos % m,
                    code,
                    num_sub_ids: b,
                });
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &PQConfig {
        &self.config
    }

    /// The `num_splits` codes of one item.
    #[inline]
    pub fn item_codes(&self, item: u64) -> &[u16] {
        let m = self.config.num_splits;
        let start = item as usize * m;
        &self.codes[start..start + m]
    }

    /// Code of `item` in `split`.
    #[inline]
    pub fn code(&self, item: u64, split: usize) -> u16 {
        self.codes[item as usize * self.config.num_splits + split]
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn num_items(&self) -> u64 {
        self.config.num_items
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> PQConfig {
        PQConfig::new(3, 2, 2, 4).unwrap()
    }

    #[test]
    fn accepts_valid_codes() {
        let cb = Codebook::new(config(), vec![0, 0, 1, 1, 0, 1]).unwrap();
        assert_eq!(cb.item_codes(2), &[0, 1]);
        assert_eq!(cb.code(1, 0), 1);
    }

    #[test]
    fn rejects_code_at_num_sub_ids() {
        // boundary: code value b itself is out of range
        let err = Codebook::new(config(), vec![0, 0, 2, 1, 0, 1]).unwrap_err();
        match err {
            Error::CodeOutOfRange { item, split, code, .. } => {
                assert_eq!((item, split, code), (1, 0, 2));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_wrong_table_size() {
        assert!(Codebook::new(config(), vec![0; 5]).is_err());
        assert!(Codebook::new(config(), vec![0; 7]).is_err());
    }
}
