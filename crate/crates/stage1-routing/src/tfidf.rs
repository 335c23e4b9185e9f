//! Local TF-IDF cosine ranking used to pick distractor skills. No external
//! embedding service: lowercase word tokens, raw term frequency, smooth
//! inverse document frequency.

use std::collections::HashMap;

use crate::stubs::SkillStub;

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn term_counts(tokens: &[String]) -> HashMap<&str, f64> {
    let mut counts: HashMap<&str, f64> = HashMap::new();
    for token in tokens {
        *counts.entry(token.as_str()).or_insert(0.0) += 1.0;
    }
    counts
}

/// Ranks `library` by TF-IDF cosine similarity to `target`, most similar
/// first. Documents are `name + description`. Ties keep input order, so
/// identical documents rank by position. Returns `(library_index,
/// similarity)` pairs.
pub fn tfidf_rank(target: &SkillStub, library: &[SkillStub]) -> Vec<(usize, f64)> {
    let docs: Vec<Vec<String>> = std::iter::once(target.ranking_document())
        .chain(library.iter().map(|s| s.ranking_document()))
        .map(|d| tokenize(&d))
        .collect();
    let n_docs = docs.len() as f64;

    // Document frequency over the whole corpus (target included).
    let mut df: HashMap<&str, f64> = HashMap::new();
    for doc in &docs {
        let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            *df.entry(term).or_insert(0.0) += 1.0;
        }
    }
    let idf = |term: &str| -> f64 {
        let d = df.get(term).copied().unwrap_or(0.0);
        ((1.0 + n_docs) / (1.0 + d)).ln() + 1.0
    };

    let weight_vector = |doc: &[String]| -> HashMap<String, f64> {
        term_counts(doc)
            .into_iter()
            .map(|(term, tf)| (term.to_string(), tf * idf(term)))
            .collect()
    };

    let target_vec = weight_vector(&docs[0]);
    let target_norm = norm(&target_vec);

    let mut ranked: Vec<(usize, f64)> = docs[1..]
        .iter()
        .enumerate()
        .map(|(i, doc)| {
            let vec = weight_vector(doc);
            (i, cosine(&target_vec, target_norm, &vec))
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    ranked
}

fn norm(vec: &HashMap<String, f64>) -> f64 {
    vec.values().map(|w| w * w).sum::<f64>().sqrt()
}

fn cosine(a: &HashMap<String, f64>, a_norm: f64, b: &HashMap<String, f64>) -> f64 {
    let b_norm = norm(b);
    if a_norm == 0.0 || b_norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(term, w)| b.get(term).map(|v| w * v))
        .sum();
    dot / (a_norm * b_norm)
}
