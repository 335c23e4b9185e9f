//! Numeral extraction backing the factual-claim containment checks.
//!
//! Summaries of background material and deduplicated references must not
//! invent numbers, and background summaries must additionally keep every
//! distinct number from their input.

use regex::Regex;
use std::collections::BTreeMap;
use std::sync::OnceLock;

fn numeral_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:[.,]\d+)*%?").expect("static numeral pattern"))
}

/// Extracts every numeral-like token (integers, decimals, comma-grouped
/// figures, percentages) in order of appearance.
pub fn extract_numerals(text: &str) -> Vec<String> {
    numeral_re().find_iter(text).map(|m| m.as_str().to_string()).collect()
}

fn multiset(numerals: &[String]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for n in numerals {
        *counts.entry(n.as_str()).or_insert(0) += 1;
    }
    counts
}

/// True when `output` introduces no numeral that `input` lacks: the output's
/// numerals form a sub-multiset of the input's.
pub fn no_invented_numerals(input: &str, output: &str) -> bool {
    let input_numerals = extract_numerals(input);
    let output_numerals = extract_numerals(output);
    let have = multiset(&input_numerals);
    multiset(&output_numerals)
        .iter()
        .all(|(numeral, count)| have.get(numeral).copied().unwrap_or(0) >= *count)
}

/// True when every distinct numeral of `input` still appears in `output`.
pub fn all_numerals_kept(input: &str, output: &str) -> bool {
    let input_numerals = extract_numerals(input);
    let output_numerals = extract_numerals(output);
    let kept = multiset(&output_numerals);
    multiset(&input_numerals).keys().all(|numeral| kept.contains_key(numeral))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_decimals_percentages_and_grouped_figures() {
        let text = "Budget 12,019 tokens, cut 57.4% by v2.0.";
        assert_eq!(extract_numerals(text), vec!["12,019", "57.4%", "2.0"]);
    }

    #[test]
    fn invented_numeral_is_detected() {
        assert!(no_invented_numerals("limit is 30 tokens", "keep under 30"));
        assert!(!no_invented_numerals("limit is 30 tokens", "keep under 30 or 40"));
    }

    #[test]
    fn duplicate_output_numerals_need_duplicate_inputs() {
        assert!(no_invented_numerals("30 then 30", "30 and 30"));
        assert!(!no_invented_numerals("just 30", "30 and 30"));
    }

    #[test]
    fn dropped_numeral_fails_the_containment_check() {
        assert!(all_numerals_kept("thresholds 30 and 40", "use 40 after 30"));
        assert!(!all_numerals_kept("thresholds 30 and 40", "use 40"));
    }
}
