//! Sequence taggers over the sem-tagset: a most-frequent-tag baseline and a
//! second-order HMM with deleted interpolation, suffix-based unknown-word
//! emissions and beam Viterbi decoding.

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Corpus, HasToken, Sentence, TaggedCorpus};
use crate::tagset::SemTag;

mod baseline;
mod counts;
mod io;
mod suffix;
mod viterbi;

pub use baseline::BaselineModel;
pub use counts::{NgramCounts, State};
pub use suffix::{is_capitalized, theta_from_counts, SuffixModel, SuffixTable};
pub use viterbi::{path_score, PathScores};

pub const DEFAULT_BEAM_WIDTH: usize = 20;
pub const DEFAULT_MAX_SUFFIX_LEN: usize = 10;
pub const DEFAULT_RARE_THRESHOLD: u64 = 10;

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("no trigram evidence to estimate interpolation weights")]
    DegenerateCounts,
    #[error("model file line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggerConfig {
    pub max_suffix_len: usize,
    pub rare_threshold: u64,
    /// States kept per position during decoding; 0 means unbounded.
    pub beam_width: usize,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            max_suffix_len: DEFAULT_MAX_SUFFIX_LEN,
            rare_threshold: DEFAULT_RARE_THRESHOLD,
            beam_width: DEFAULT_BEAM_WIDTH,
        }
    }
}

/// Something that maps a token sequence to one sem-tag per token.
pub trait SequenceTagger: Sync {
    fn tag_surfaces(&self, surfaces: &[&str]) -> Vec<SemTag>;

    fn tag_sentence<T: HasToken>(&self, sentence: &Sentence<T>) -> Vec<SemTag> {
        let surfaces: Vec<&str> = sentence.tokens().map(|t| t.surface()).collect();
        self.tag_surfaces(&surfaces)
    }
}

/// Tags every sentence, in parallel; output order follows the corpus.
pub fn tag_corpus<M, T>(model: &M, corpus: &Corpus<T>) -> Vec<Vec<SemTag>>
where
    M: SequenceTagger,
    T: HasToken + Sync,
{
    corpus
        .sentences
        .par_iter()
        .map(|s| model.tag_sentence(s))
        .collect()
}

/// Leave-one-out interpolation weights `(λ1, λ2, λ3)` for unigram, bigram and
/// trigram estimates.
///
/// Each observed trigram votes its count for the order whose relative
/// frequency, with the trigram itself removed, is largest; ties go to the
/// higher order and `0/0` counts as 0.
pub fn estimate_lambdas(counts: &NgramCounts) -> Result<[f64; 3], TaggerError> {
    let ratio = |num: u64, den: u64| -> f64 {
        if den <= 1 || num == 0 {
            0.0
        } else {
            (num - 1) as f64 / (den - 1) as f64
        }
    };
    let mut acc = [0u64; 3];
    let event_total = counts.event_total();
    for ((t1, t2, t3), c) in counts.trigrams() {
        let tri = ratio(c, counts.history2(t1, t2));
        let bi = ratio(counts.bigram(t2, t3), counts.history1(t2));
        let uni = ratio(counts.event_count(t3), event_total);
        if tri >= bi && tri >= uni {
            acc[2] += c;
        } else if bi >= uni {
            acc[1] += c;
        } else {
            acc[0] += c;
        }
    }
    let total: u64 = acc.iter().sum();
    if total == 0 {
        return Err(TaggerError::DegenerateCounts);
    }
    Ok(acc.map(|a| a as f64 / total as f64))
}

/// Second-order HMM tagger.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigramModel {
    pub(crate) counts: NgramCounts,
    pub(crate) lambdas: [f64; 3],
    pub(crate) suffix: SuffixModel,
    pub(crate) beam_width: usize,
    // Derived from counts.
    pub(crate) observed: Vec<SemTag>,
    pub(crate) default_tag: SemTag,
}

impl TrigramModel {
    pub fn train(corpus: &TaggedCorpus, config: TaggerConfig) -> Result<TrigramModel, TaggerError> {
        let counts = NgramCounts::collect(corpus)?;
        let lambdas = estimate_lambdas(&counts)?;
        let suffix = SuffixModel::train(&counts, config.max_suffix_len, config.rare_threshold);
        Ok(Self::assemble(counts, lambdas, suffix, config.beam_width))
    }

    pub(crate) fn assemble(
        counts: NgramCounts,
        lambdas: [f64; 3],
        suffix: SuffixModel,
        beam_width: usize,
    ) -> TrigramModel {
        let observed = counts.observed_tags();
        let default_tag = counts
            .most_frequent_tag()
            .expect("non-empty counts have a most frequent tag");
        TrigramModel {
            counts,
            lambdas,
            suffix,
            beam_width,
            observed,
            default_tag,
        }
    }

    pub fn counts(&self) -> &NgramCounts {
        &self.counts
    }

    pub fn lambdas(&self) -> [f64; 3] {
        self.lambdas
    }

    pub fn suffix_model(&self) -> &SuffixModel {
        &self.suffix
    }

    pub fn beam_width(&self) -> usize {
        self.beam_width
    }

    pub fn set_beam_width(&mut self, beam_width: usize) {
        self.beam_width = beam_width;
    }

    pub fn config(&self) -> TaggerConfig {
        TaggerConfig {
            max_suffix_len: self.suffix.max_suffix_len,
            rare_threshold: self.suffix.rare_threshold,
            beam_width: self.beam_width,
        }
    }

    /// Tags with non-zero training frequency, in tagset order.
    pub fn observed_tags(&self) -> &[SemTag] {
        &self.observed
    }

    /// Corpus-wide most frequent tag.
    pub fn default_tag(&self) -> SemTag {
        self.default_tag
    }

    /// Interpolated `P(t3 | t1, t2)`.
    pub fn transition_prob(&self, t1: State, t2: State, t3: State) -> f64 {
        let c = &self.counts;
        let rel = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let [l1, l2, l3] = self.lambdas;
        l1 * rel(c.event_count(t3), c.event_total())
            + l2 * rel(c.bigram(t2, t3), c.history1(t2))
            + l3 * rel(c.trigram(t1, t2, t3), c.history2(t1, t2))
    }

    pub fn transition_logprob(&self, t1: State, t2: State, t3: State) -> f64 {
        self.transition_prob(t1, t2, t3).ln()
    }

    pub fn is_known(&self, surface: &str) -> bool {
        self.counts.word_tags(surface).is_some()
    }

    /// `log P(surface | tag)`. Known words use relative frequencies; unknown
    /// words use the suffix distribution divided by the tag prior, which
    /// drops the tag-independent factor `P(suffix)`.
    pub fn emission_logprob(&self, surface: &str, tag: SemTag) -> f64 {
        let f_tag = self.counts.unigram(tag);
        if f_tag == 0 {
            return f64::NEG_INFINITY;
        }
        if self.is_known(surface) {
            let n = self.counts.word_tag(surface, tag);
            (n as f64 / f_tag as f64).ln()
        } else {
            let prior = f_tag as f64 / self.counts.token_total() as f64;
            (self.suffix.probability(surface, tag) / prior).ln()
        }
    }

    /// Tags with finite emission score for `surface`, with those scores.
    pub(crate) fn candidates(&self, surface: &str) -> Vec<(SemTag, f64)> {
        match self.counts.word_tags(surface) {
            Some(tags) => tags
                .iter()
                .map(|&(t, _)| (t, self.emission_logprob(surface, t)))
                .collect(),
            None => self
                .observed
                .iter()
                .map(|&t| (t, self.emission_logprob(surface, t)))
                .filter(|(_, e)| e.is_finite())
                .collect(),
        }
    }

    pub fn decode(&self, surfaces: &[&str]) -> Vec<SemTag> {
        viterbi::decode(self, surfaces, self.beam_width)
    }

    pub fn decode_with_beam(&self, surfaces: &[&str], beam_width: usize) -> Vec<SemTag> {
        viterbi::decode(self, surfaces, beam_width)
    }

    /// Joint log-scores of the best and second-best complete paths.
    pub fn two_best(&self, surfaces: &[&str]) -> PathScores {
        viterbi::two_best(self, surfaces, self.beam_width)
    }

    /// Confidence in `[0, 1]` from the best-vs-second-best margin,
    /// `1 - exp(-margin / length)`.
    pub fn sentence_confidence(&self, surfaces: &[&str]) -> f64 {
        let scores = self.two_best(surfaces);
        if !scores.best.is_finite() {
            return 0.0;
        }
        if !scores.second.is_finite() {
            return 1.0;
        }
        let margin = scores.best - scores.second;
        (1.0 - (-margin / surfaces.len() as f64).exp()).clamp(0.0, 1.0)
    }
}

impl SequenceTagger for TrigramModel {
    fn tag_surfaces(&self, surfaces: &[&str]) -> Vec<SemTag> {
        self.decode(surfaces)
    }
}

pub fn collect_counts(corpus: &TaggedCorpus) -> Result<NgramCounts, TaggerError> {
    NgramCounts::collect(corpus)
}

pub fn train_baseline(corpus: &TaggedCorpus) -> Result<BaselineModel, TaggerError> {
    BaselineModel::train(corpus)
}
