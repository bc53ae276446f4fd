//! Finite windows of doubly infinite binary sequences, with the shift map
//! and window parsing. A word `(…a₋₂a₋₁a₀, a₁a₂…)` is stored as the past
//! bits `a₋ₖ…a₋₁`, the anchor `a₀` and the future bits `a₁…aⱼ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::HorseshoeError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SymbolWord {
    /// `a₋ₖ … a₋₁`, oldest first.
    past: Vec<u8>,
    anchor: u8,
    /// `a₁ … aⱼ`.
    future: Vec<u8>,
}

impl SymbolWord {
    pub fn new(past: Vec<u8>, anchor: u8, future: Vec<u8>) -> Result<Self, HorseshoeError> {
        for &bit in past
            .iter()
            .chain(future.iter())
            .chain(std::iter::once(&anchor))
        {
            if bit > 1 {
                return Err(HorseshoeError::ItineraryMismatch {
                    word: String::new(),
                    step: 0,
                    expected: "bits in {0, 1}".to_string(),
                    got: bit.to_string(),
                });
            }
        }
        Ok(SymbolWord {
            past,
            anchor,
            future,
        })
    }

    /// Constant word of a single symbol with the given window sizes.
    pub fn constant(bit: u8, past_len: usize, future_len: usize) -> Self {
        SymbolWord {
            past: vec![bit; past_len],
            anchor: bit,
            future: vec![bit; future_len],
        }
    }

    /// Parses `"past,anchor+future"` split at the comma (anchor is the last
    /// bit before it), or an undelimited string which is split with the
    /// first half as past, the middle bit as anchor and the rest as future.
    pub fn parse(text: &str) -> Result<Self, HorseshoeError> {
        let bits = |s: &str| -> Result<Vec<u8>, HorseshoeError> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(HorseshoeError::ItineraryMismatch {
                        word: text.to_string(),
                        step: 0,
                        expected: "characters in {0, 1, ','}".to_string(),
                        got: other.to_string(),
                    }),
                })
                .collect()
        };
        if let Some((left, right)) = text.split_once(',') {
            let mut left_bits = bits(left)?;
            if left_bits.is_empty() {
                return Err(HorseshoeError::ItineraryMismatch {
                    word: text.to_string(),
                    step: 0,
                    expected: "an anchor bit before the comma".to_string(),
                    got: "empty".to_string(),
                });
            }
            let anchor = left_bits.pop().unwrap();
            SymbolWord::new(left_bits, anchor, bits(right)?)
        } else {
            let all = bits(text)?;
            if all.is_empty() {
                return Err(HorseshoeError::ItineraryMismatch {
                    word: text.to_string(),
                    step: 0,
                    expected: "a nonempty word".to_string(),
                    got: "empty".to_string(),
                });
            }
            let k = all.len() / 2;
            SymbolWord::new(all[..k].to_vec(), all[k], all[k + 1..].to_vec())
        }
    }

    /// All `2^len` anchored windows of a given total length, with the
    /// default past/anchor/future split of [`SymbolWord::parse`].
    pub fn enumerate(len: usize) -> Vec<SymbolWord> {
        assert!((1..=24).contains(&len));
        (0..(1usize << len))
            .map(|mask| {
                let all: Vec<u8> = (0..len)
                    .map(|i| ((mask >> (len - 1 - i)) & 1) as u8)
                    .collect();
                let k = len / 2;
                SymbolWord {
                    past: all[..k].to_vec(),
                    anchor: all[k],
                    future: all[k + 1..].to_vec(),
                }
            })
            .collect()
    }

    pub fn past_len(&self) -> usize {
        self.past.len()
    }

    pub fn future_len(&self) -> usize {
        self.future.len()
    }

    pub fn len(&self) -> usize {
        self.past.len() + 1 + self.future.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn anchor(&self) -> u8 {
        self.anchor
    }

    /// Symbol at index `k` of the window, if defined: `k = 0` is the anchor,
    /// positive indices walk the future, negative the past.
    pub fn bit(&self, k: i64) -> Option<u8> {
        if k == 0 {
            Some(self.anchor)
        } else if k > 0 {
            self.future.get(k as usize - 1).copied()
        } else {
            let back = (-k) as usize;
            if back <= self.past.len() {
                Some(self.past[self.past.len() - back])
            } else {
                None
            }
        }
    }

    /// The shift `χ`: `b_k = a_{k+1}`. The anchor moves into the past and
    /// the window shrinks by one on the future side.
    pub fn shift(&self) -> Result<SymbolWord, HorseshoeError> {
        if self.future.is_empty() {
            return Err(HorseshoeError::EmptyFuture);
        }
        let mut past = self.past.clone();
        past.push(self.anchor);
        Ok(SymbolWord {
            past,
            anchor: self.future[0],
            future: self.future[1..].to_vec(),
        })
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in &self.past {
            write!(f, "{bit}")?;
        }
        write!(f, "{},", self.anchor)?;
        for bit in &self.future {
            write!(f, "{bit}")?;
        }
        Ok(())
    }
}

impl From<SymbolWord> for String {
    fn from(word: SymbolWord) -> String {
        word.to_string()
    }
}

impl TryFrom<String> for SymbolWord {
    type Error = String;

    fn try_from(text: String) -> Result<Self, String> {
        SymbolWord::parse(&text).map_err(|e| e.to_string())
    }
}

/// The shift automorphism as a free function.
pub fn shift_chi(word: &SymbolWord) -> Result<SymbolWord, HorseshoeError> {
    word.shift()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_moves_the_anchor() {
        let word = SymbolWord::parse("00,111").unwrap();
        let shifted = word.shift().unwrap();
        assert_eq!(shifted.to_string(), "001,11");
    }

    #[test]
    fn shift_of_constant_word_is_constant() {
        let word = SymbolWord::constant(1, 2, 3);
        let shifted = word.shift().unwrap();
        assert_eq!(shifted.anchor(), 1);
        assert!(shifted.bit(-1) == Some(1) && shifted.bit(2) == Some(1));
    }

    #[test]
    fn repeated_shift_reads_future_bits() {
        let word = SymbolWord::parse("0,10110").unwrap();
        let mut current = word.clone();
        for j in 1..=4 {
            current = current.shift().unwrap();
            assert_eq!(current.anchor(), word.bit(j).unwrap(), "at shift {j}");
        }
    }

    #[test]
    fn shift_requires_nonempty_future() {
        let word = SymbolWord::parse("01,").unwrap();
        assert!(matches!(word.shift(), Err(HorseshoeError::EmptyFuture)));
    }

    #[test]
    fn undelimited_parse_splits_evenly() {
        let word = SymbolWord::parse("010011").unwrap();
        assert_eq!(word.past_len(), 3);
        assert_eq!(word.future_len(), 2);
        assert_eq!(word.to_string(), "0100,11");
        assert_eq!(word.bit(-3), Some(0));
        assert_eq!(word.bit(0), Some(0));
        assert_eq!(word.bit(2), Some(1));
    }

    #[test]
    fn enumerate_is_exhaustive_and_distinct() {
        let words = SymbolWord::enumerate(6);
        assert_eq!(words.len(), 64);
        let unique: std::collections::HashSet<String> =
            words.iter().map(|w| w.to_string()).collect();
        assert_eq!(unique.len(), 64);
    }
}
