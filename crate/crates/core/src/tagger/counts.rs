use std::collections::BTreeMap;
use std::fmt;

use crate::corpus::TaggedCorpus;
use crate::tagset::{SemTag, NUM_SEM_TAGS};

use super::TaggerError;

pub(crate) const NUM_STATES: usize = NUM_SEM_TAGS + 2;

/// A position in a padded tag sequence: a sem-tag or one of the two boundary
/// pseudo-tags. Ordered with all sem-tags first, then `BOS`, then `EOS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(u8);

impl State {
    pub const BOS: State = State(NUM_SEM_TAGS as u8);
    pub const EOS: State = State(NUM_SEM_TAGS as u8 + 1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> State {
        debug_assert!(i < NUM_STATES);
        State(i as u8)
    }

    pub fn as_tag(self) -> Option<SemTag> {
        SemTag::from_index(self.index())
    }

    pub fn code(self) -> &'static str {
        match self {
            State::BOS => "BOS",
            State::EOS => "EOS",
            s => s.as_tag().unwrap().code(),
        }
    }

    pub fn parse(code: &str) -> Option<State> {
        match code {
            "BOS" => Some(State::BOS),
            "EOS" => Some(State::EOS),
            c => SemTag::parse(c).ok().map(State::from),
        }
    }
}

impl From<SemTag> for State {
    fn from(t: SemTag) -> State {
        State(t.index() as u8)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Tag n-gram and word/tag statistics over sequences padded as
/// `BOS BOS t1 .. tn EOS`.
///
/// Bigrams are `(t_{i-1}, t_i)` and trigrams `(t_{i-2}, t_{i-1}, t_i)` for
/// `t_i` ranging over `t1 .. tn, EOS`, so the `(BOS, BOS)` bigram itself is
/// never counted. Unigrams cover sem-tags only and sum to `token_total`.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramCounts {
    pub(crate) unigram: Vec<u64>,
    pub(crate) bigram: Vec<u64>,
    pub(crate) trigram: Vec<u64>,
    pub(crate) lexicon: BTreeMap<String, Vec<(SemTag, u64)>>,
    pub(crate) token_total: u64,
    pub(crate) sentences: u64,
}

#[inline]
pub(crate) fn bi_idx(a: State, b: State) -> usize {
    a.index() * NUM_STATES + b.index()
}

#[inline]
pub(crate) fn tri_idx(a: State, b: State, c: State) -> usize {
    (a.index() * NUM_STATES + b.index()) * NUM_STATES + c.index()
}

impl NgramCounts {
    pub(crate) fn empty() -> Self {
        NgramCounts {
            unigram: vec![0; NUM_SEM_TAGS],
            bigram: vec![0; NUM_STATES * NUM_STATES],
            trigram: vec![0; NUM_STATES * NUM_STATES * NUM_STATES],
            lexicon: BTreeMap::new(),
            token_total: 0,
            sentences: 0,
        }
    }

    pub fn collect(corpus: &TaggedCorpus) -> Result<NgramCounts, TaggerError> {
        if corpus.is_empty() {
            return Err(TaggerError::EmptyCorpus);
        }
        let mut c = NgramCounts::empty();
        let mut lex: BTreeMap<String, BTreeMap<SemTag, u64>> = BTreeMap::new();
        for sent in &corpus.sentences {
            c.sentences += 1;
            let (mut p2, mut p1) = (State::BOS, State::BOS);
            for item in sent.items() {
                let t = State::from(item.tag);
                c.unigram[item.tag.index()] += 1;
                c.bigram[bi_idx(p1, t)] += 1;
                c.trigram[tri_idx(p2, p1, t)] += 1;
                *lex.entry(item.token.surface().to_owned())
                    .or_default()
                    .entry(item.tag)
                    .or_default() += 1;
                c.token_total += 1;
                p2 = p1;
                p1 = t;
            }
            c.bigram[bi_idx(p1, State::EOS)] += 1;
            c.trigram[tri_idx(p2, p1, State::EOS)] += 1;
        }
        c.lexicon = lex
            .into_iter()
            .map(|(w, tags)| (w, tags.into_iter().collect()))
            .collect();
        Ok(c)
    }

    pub fn token_total(&self) -> u64 {
        self.token_total
    }

    pub fn sentences(&self) -> u64 {
        self.sentences
    }

    pub fn unigram(&self, tag: SemTag) -> u64 {
        self.unigram[tag.index()]
    }

    pub fn bigram(&self, a: State, b: State) -> u64 {
        self.bigram[bi_idx(a, b)]
    }

    pub fn trigram(&self, a: State, b: State, c: State) -> u64 {
        self.trigram[tri_idx(a, b, c)]
    }

    /// Count of `t` as a predicted event: sem-tag frequency, or the number of
    /// sentences for `EOS`.
    pub fn event_count(&self, t: State) -> u64 {
        match t {
            State::EOS => self.sentences,
            State::BOS => 0,
            s => self.unigram[s.index()],
        }
    }

    /// Total mass of unigram events (tokens plus sentence ends).
    pub fn event_total(&self) -> u64 {
        self.token_total + self.sentences
    }

    /// How often `t` occurs as the one-tag history of a transition.
    pub fn history1(&self, t: State) -> u64 {
        match t {
            State::BOS => self.sentences,
            State::EOS => 0,
            s => self.unigram[s.index()],
        }
    }

    /// How often `(a, b)` occurs as the two-tag history of a transition.
    pub fn history2(&self, a: State, b: State) -> u64 {
        if a == State::BOS && b == State::BOS {
            self.sentences
        } else {
            self.bigram(a, b)
        }
    }

    /// Tags seen with `surface`, in tagset order.
    pub fn word_tags(&self, surface: &str) -> Option<&[(SemTag, u64)]> {
        self.lexicon.get(surface).map(Vec::as_slice)
    }

    pub fn word_tag(&self, surface: &str, tag: SemTag) -> u64 {
        self.word_tags(surface)
            .and_then(|ts| ts.iter().find(|(t, _)| *t == tag))
            .map_or(0, |&(_, n)| n)
    }

    pub fn word_frequency(&self, surface: &str) -> u64 {
        self.word_tags(surface)
            .map_or(0, |ts| ts.iter().map(|&(_, n)| n).sum())
    }

    pub fn lexicon(&self) -> impl Iterator<Item = (&str, &[(SemTag, u64)])> {
        self.lexicon.iter().map(|(w, ts)| (w.as_str(), ts.as_slice()))
    }

    /// Tags with non-zero training frequency, in tagset order.
    pub fn observed_tags(&self) -> Vec<SemTag> {
        crate::tagset::all_tags()
            .filter(|t| self.unigram[t.index()] > 0)
            .collect()
    }

    /// Most frequent tag; ties go to the earlier tag in tagset order.
    pub fn most_frequent_tag(&self) -> Option<SemTag> {
        let mut best: Option<(SemTag, u64)> = None;
        for t in crate::tagset::all_tags() {
            let n = self.unigram[t.index()];
            if n > 0 && best.is_none_or(|(_, b)| n > b) {
                best = Some((t, n));
            }
        }
        best.map(|(t, _)| t)
    }

    /// Non-zero trigrams in state order.
    pub fn trigrams(&self) -> impl Iterator<Item = ((State, State, State), u64)> + '_ {
        self.trigram.iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, &n)| {
            let c = i % NUM_STATES;
            let b = (i / NUM_STATES) % NUM_STATES;
            let a = i / (NUM_STATES * NUM_STATES);
            (
                (State::from_index(a), State::from_index(b), State::from_index(c)),
                n,
            )
        })
    }

    pub fn bigrams(&self) -> impl Iterator<Item = ((State, State), u64)> + '_ {
        self.bigram.iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, &n)| {
            (
                (
                    State::from_index(i / NUM_STATES),
                    State::from_index(i % NUM_STATES),
                ),
                n,
            )
        })
    }
}
