//! Byte-pair tokenizer compatible with the `cl100k_base` encoding.
//!
//! All budget thresholds and reported savings in this toolchain are measured
//! in tokens, so the counter has to agree exactly with the reference encoder
//! used by the serving stack. The implementation below is the standard
//! byte-level BPE: split text with the encoding's pre-tokenization regex,
//! then greedily merge the lowest-ranked adjacent byte pair within each
//! piece. Counts are validated against a frozen reference corpus in the
//! integration tests.

use std::collections::HashMap;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;

use crate::error::SkillError;

/// Pre-tokenization pattern for `cl100k_base`.
///
/// This is the published pattern with the possessive quantifier `\s+(?!\S)`
/// expressed as a lookahead, which `fancy-regex` supports.
const SPLIT_PATTERN: &str = r"(?i:'s|'t|'re|'ve|'m|'ll|'d)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]+|\s+(?!\S)|\s+";

/// Vocabulary shipped with the repository (`assets/cl100k_base.tiktoken`).
const BUNDLED_VOCAB: &str = include_str!("../../../assets/cl100k_base.tiktoken");

pub struct Tokenizer {
    ranks: HashMap<Vec<u8>, u32>,
    splitter: fancy_regex::Regex,
}

impl Tokenizer {
    /// Loads a vocabulary in the `<base64 token> <rank>` line format.
    pub fn from_vocab_file(path: impl AsRef<Path>) -> Result<Self, SkillError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| SkillError::Vocabulary {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_vocab_str(&raw).map_err(|reason| SkillError::Vocabulary {
            path: path.to_path_buf(),
            reason,
        })
    }

    /// Builds the tokenizer from the vocabulary bundled into the binary.
    pub fn bundled() -> Self {
        Self::from_vocab_str(BUNDLED_VOCAB).expect("bundled vocabulary is well-formed")
    }

    fn from_vocab_str(raw: &str) -> Result<Self, String> {
        let mut ranks = HashMap::new();
        for (idx, line) in raw.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_ascii_whitespace();
            let (token, rank) = match (fields.next(), fields.next(), fields.next()) {
                (Some(t), Some(r), None) => (t, r),
                _ => return Err(format!("line {}: expected `<base64> <rank>`", idx + 1)),
            };
            let bytes = B64
                .decode(token)
                .map_err(|e| format!("line {}: bad base64: {e}", idx + 1))?;
            let rank: u32 = rank
                .parse()
                .map_err(|e| format!("line {}: bad rank: {e}", idx + 1))?;
            ranks.insert(bytes, rank);
        }
        if ranks.is_empty() {
            return Err("vocabulary is empty".into());
        }
        let splitter = fancy_regex::Regex::new(SPLIT_PATTERN)
            .expect("split pattern is a valid expression");
        Ok(Tokenizer { ranks, splitter })
    }

    /// Number of tokens `text` occupies in a model context window.
    pub fn count(&self, text: &str) -> usize {
        self.pieces(text)
            .map(|piece| {
                let bytes = piece.as_bytes();
                if self.ranks.contains_key(bytes) {
                    1
                } else {
                    self.merge_parts(bytes).len() - 1
                }
            })
            .sum()
    }

    /// Full encoding of `text`, mainly useful for debugging and tests.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        for piece in self.pieces(text) {
            let bytes = piece.as_bytes();
            if let Some(&rank) = self.ranks.get(bytes) {
                out.push(rank);
                continue;
            }
            let parts = self.merge_parts(bytes);
            for pair in parts.windows(2) {
                out.push(self.ranks[&bytes[pair[0].0..pair[1].0]]);
            }
        }
        out
    }

    fn pieces<'a>(&'a self, text: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.splitter.find_iter(text).map(|m| {
            m.expect("pre-tokenization regex ran out of backtracking budget")
                .as_str()
        })
    }

    /// Greedy lowest-rank pair merging. Returns boundary offsets into
    /// `piece`: entry `i` starts the `i`-th token, plus a trailing sentinel,
    /// so the token count is `len - 1`.
    fn merge_parts(&self, piece: &[u8]) -> Vec<(usize, u32)> {
        debug_assert!(!piece.is_empty());
        // parts[i].1 caches the rank of merging parts[i] with parts[i + 1].
        let mut parts: Vec<(usize, u32)> = Vec::with_capacity(piece.len() + 1);
        let mut min_rank: (u32, usize) = (u32::MAX, usize::MAX);
        for i in 0..piece.len().saturating_sub(1) {
            let rank = self.pair_rank(&piece[i..i + 2]);
            if rank < min_rank.0 {
                min_rank = (rank, i);
            }
            parts.push((i, rank));
        }
        parts.push((piece.len().saturating_sub(1), u32::MAX));
        parts.push((piece.len(), u32::MAX));

        let rank_at = |parts: &[(usize, u32)], i: usize| -> u32 {
            if i + 3 < parts.len() {
                self.pair_rank(&piece[parts[i].0..parts[i + 3].0])
            } else {
                u32::MAX
            }
        };

        while min_rank.0 != u32::MAX {
            let i = min_rank.1;
            if i > 0 {
                parts[i - 1].1 = rank_at(&parts, i - 1);
            }
            parts[i].1 = rank_at(&parts, i);
            parts.remove(i + 1);

            min_rank = (u32::MAX, usize::MAX);
            for (j, &(_, rank)) in parts[..parts.len() - 1].iter().enumerate() {
                if rank < min_rank.0 {
                    min_rank = (rank, j);
                }
            }
        }
        parts
    }

    fn pair_rank(&self, bytes: &[u8]) -> u32 {
        self.ranks.get(bytes).copied().unwrap_or(u32::MAX)
    }
}

impl std::fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tokenizer")
            .field("vocab_size", &self.ranks.len())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_zero_tokens() {
        let tok = Tokenizer::bundled();
        assert_eq!(tok.count(""), 0);
        assert!(tok.encode("").is_empty());
    }

    #[test]
    fn count_matches_encode_length() {
        let tok = Tokenizer::bundled();
        for text in [
            "hello world",
            "  leading spaces and trailing   ",
            "unicode: naïve café 日本語 🦀🦀",
            "don't we'll I'd they're",
            "fn main() { println!(\"{:?}\", x); }",
        ] {
            assert_eq!(tok.count(text), tok.encode(text).len(), "text: {text:?}");
        }
    }

    #[test]
    fn single_ascii_word_is_one_token() {
        let tok = Tokenizer::bundled();
        assert_eq!(tok.count("hello"), 1);
    }

    #[test]
    fn rejects_garbage_vocab() {
        assert!(Tokenizer::from_vocab_str("not-base64-at-all").is_err());
        assert!(Tokenizer::from_vocab_str("").is_err());
    }
}
