//! Suffix-based tag distributions for words not seen in training.
//!
//! Rare training words (frequency at most `rare_threshold`) contribute their
//! tags to every suffix of their last part up to `max_suffix_len` characters.
//! Distributions are smoothed by successive abstraction,
//! `P(t|s_i) = (P^(t|s_i) + theta * P(t|s_{i-1})) / (1 + theta)`, starting from
//! the empty suffix. Capitalized and uncapitalized words get separate tables.

use std::collections::BTreeMap;

use crate::tagset::{SemTag, NUM_SEM_TAGS};

use super::counts::NgramCounts;

#[derive(Debug, Clone, PartialEq)]
pub struct SuffixTable {
    // Dense distributions over the sem-tags; the empty suffix is always present.
    pub(crate) dists: BTreeMap<String, Vec<f64>>,
}

impl SuffixTable {
    pub fn distribution(&self, suffix: &str) -> Option<&[f64]> {
        self.dists.get(suffix).map(Vec::as_slice)
    }

    pub fn suffixes(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.dists.iter().map(|(s, d)| (s.as_str(), d.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuffixModel {
    pub max_suffix_len: usize,
    pub rare_threshold: u64,
    pub theta: f64,
    pub(crate) lower: SuffixTable,
    pub(crate) upper: SuffixTable,
}

pub fn is_capitalized(surface: &str) -> bool {
    surface.chars().next().is_some_and(char::is_uppercase)
}

/// Last `len` characters of `word`.
pub(crate) fn char_suffix(word: &str, len: usize) -> &str {
    if len == 0 {
        return "";
    }
    match word.char_indices().rev().nth(len - 1) {
        Some((i, _)) => &word[i..],
        None => word,
    }
}

/// Sample standard deviation of the unconditional tag probabilities over the
/// observed tags.
pub fn theta_from_counts(counts: &NgramCounts) -> f64 {
    let probs: Vec<f64> = counts
        .unigram
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| n as f64 / counts.token_total as f64)
        .collect();
    let s = probs.len();
    if s < 2 {
        return 0.0;
    }
    let mean = 1.0 / s as f64;
    let var = probs.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (s - 1) as f64;
    var.sqrt()
}

fn normalize(counts: &[u64]) -> Option<Vec<f64>> {
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| counts.iter().map(|&n| n as f64 / total as f64).collect())
}

impl SuffixModel {
    pub fn train(counts: &NgramCounts, max_suffix_len: usize, rare_threshold: u64) -> SuffixModel {
        let theta = theta_from_counts(counts);
        let mut raw: [BTreeMap<String, Vec<u64>>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (surface, tags) in counts.lexicon() {
            let freq: u64 = tags.iter().map(|&(_, n)| n).sum();
            if freq > rare_threshold {
                continue;
            }
            let variant = usize::from(is_capitalized(surface));
            let last = surface.rsplit(crate::corpus::JOINER).next().unwrap_or(surface);
            let max_len = last.chars().count().min(max_suffix_len);
            for len in 0..=max_len {
                let row = raw[variant]
                    .entry(char_suffix(last, len).to_owned())
                    .or_insert_with(|| vec![0; NUM_SEM_TAGS]);
                for &(t, n) in tags {
                    row[t.index()] += n;
                }
            }
        }

        // Empty-suffix fallbacks: the variant's own rare words, then the other
        // variant's, then all training tokens.
        let unconditional = normalize(&counts.unigram).unwrap_or_else(|| vec![0.0; NUM_SEM_TAGS]);
        let bases: Vec<Option<Vec<f64>>> = raw
            .iter()
            .map(|m| m.get("").and_then(|c| normalize(c)))
            .collect();
        let base_for = |v: usize| {
            bases[v]
                .clone()
                .or_else(|| bases[1 - v].clone())
                .unwrap_or_else(|| unconditional.clone())
        };

        let [raw_lower, raw_upper] = raw;
        let lower = Self::smooth(raw_lower, base_for(0), theta);
        let upper = Self::smooth(raw_upper, base_for(1), theta);
        SuffixModel {
            max_suffix_len,
            rare_threshold,
            theta,
            lower,
            upper,
        }
    }

    fn smooth(raw: BTreeMap<String, Vec<u64>>, base: Vec<f64>, theta: f64) -> SuffixTable {
        let mut dists: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        dists.insert(String::new(), base);
        // Parents are smoothed first: increasing character length.
        let mut keys: Vec<&String> = raw.keys().filter(|k| !k.is_empty()).collect();
        keys.sort_by_key(|k| (k.chars().count(), k.as_str()));
        for key in keys {
            let n = key.chars().count();
            let shorter = char_suffix(key, n - 1);
            let parent = dists[shorter].clone();
            let ml = normalize(&raw[key]).expect("stored suffixes have counts");
            let smoothed = ml
                .iter()
                .zip(&parent)
                .map(|(p, q)| (p + theta * q) / (1.0 + theta))
                .collect();
            dists.insert(key.clone(), smoothed);
        }
        SuffixTable { dists }
    }

    pub fn table(&self, capitalized: bool) -> &SuffixTable {
        if capitalized {
            &self.upper
        } else {
            &self.lower
        }
    }

    /// `P(tag | longest stored suffix)` for an unseen surface.
    pub fn tag_distribution(&self, surface: &str) -> &[f64] {
        let table = self.table(is_capitalized(surface));
        let last = surface.rsplit(crate::corpus::JOINER).next().unwrap_or(surface);
        let max_len = last.chars().count().min(self.max_suffix_len);
        for len in (0..=max_len).rev() {
            if let Some(d) = table.distribution(char_suffix(last, len)) {
                return d;
            }
        }
        table
            .distribution("")
            .expect("suffix tables always hold the empty suffix")
    }

    pub fn probability(&self, surface: &str, tag: SemTag) -> f64 {
        self.tag_distribution(surface)[tag.index()]
    }
}
