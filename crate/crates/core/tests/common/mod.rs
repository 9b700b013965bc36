//! Shared test helpers: fixture loading, a synthetic HMM corpus generator,
//! random toy corpora and an independent re-implementation of the tagger's
//! scoring used as an oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use semtag::corpus::{read_tagged, Corpus, Sentence, TaggedCorpus, TaggedToken, Token};
use semtag::tagger::{path_score, TrigramModel};
use semtag::tagset::SemTag;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn examples() -> TaggedCorpus {
    read_tagged(fixture_text("examples.tsv").as_bytes()).unwrap()
}

pub fn tag(code: &str) -> SemTag {
    SemTag::parse(code).unwrap()
}

pub fn surfaces<T: semtag::corpus::HasToken>(s: &Sentence<T>) -> Vec<String> {
    s.tokens().map(|t| t.surface().to_owned()).collect()
}

pub fn tagged_sentence(pairs: &[(&str, SemTag)]) -> Sentence<TaggedToken> {
    Sentence::new(
        pairs
            .iter()
            .map(|(w, t)| TaggedToken::new(Token::parse(w).unwrap(), *t))
            .collect(),
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Synthetic HMM

/// A first-order HMM over ten sem-tags whose word types are often shared
/// between two tags that occur in different contexts.
pub struct SyntheticHmm {
    tags: Vec<SemTag>,
    // Row 0 is the start state; column `tags.len()` ends the sentence.
    trans: Vec<WeightedIndex<f64>>,
    emit: Vec<(Vec<String>, WeightedIndex<f64>)>,
    pub ambiguous_types: BTreeSet<String>,
    pub all_types: BTreeSet<String>,
}

const HMM_TAGS: [&str; 10] = ["DEF", "CON", "ENS", "EPS", "IST", "DIS", "REL", "PRO", "GPE", "NIL"];

// (from, [(to, weight)]); "$" is sentence end, "^" the start.
const HMM_TRANS: &[(&str, &[(&str, f64)])] = &[
    ("^", &[("DEF", 0.4), ("PRO", 0.3), ("GPE", 0.2), ("DIS", 0.1)]),
    ("DEF", &[("CON", 0.7), ("IST", 0.3)]),
    ("IST", &[("CON", 0.9), ("IST", 0.1)]),
    ("DIS", &[("CON", 0.6), ("IST", 0.4)]),
    ("CON", &[("ENS", 0.4), ("EPS", 0.3), ("REL", 0.15), ("NIL", 0.15)]),
    ("PRO", &[("ENS", 0.5), ("EPS", 0.5)]),
    ("GPE", &[("ENS", 0.4), ("EPS", 0.4), ("NIL", 0.2)]),
    ("ENS", &[("DEF", 0.4), ("REL", 0.3), ("NIL", 0.3)]),
    ("EPS", &[("DEF", 0.3), ("REL", 0.3), ("GPE", 0.2), ("NIL", 0.2)]),
    ("REL", &[("DEF", 0.5), ("GPE", 0.3), ("PRO", 0.2)]),
    ("NIL", &[("$", 1.0)]),
];

// Tag pairs sharing word types, chosen so that context separates them.
const AMBIGUOUS_PAIRS: [(&str, &str); 6] = [
    ("CON", "ENS"),
    ("CON", "EPS"),
    ("IST", "CON"),
    ("REL", "PRO"),
    ("GPE", "CON"),
    ("DEF", "DIS"),
];

fn syllables(rng: &mut ChaCha8Rng, n: usize) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aeiou";
    (0..n)
        .map(|_| format!("{}{}", C[rng.gen_range(0..C.len())] as char, V[rng.gen_range(0..V.len())] as char))
        .collect()
}

fn zipf_weights(n: usize) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / r as f64).collect()
}

impl SyntheticHmm {
    pub fn new(seed: u64) -> SyntheticHmm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tags: Vec<SemTag> = HMM_TAGS.iter().map(|c| tag(c)).collect();
        let idx = |c: &str| HMM_TAGS.iter().position(|t| *t == c);

        let mut trans = Vec::new();
        for from in std::iter::once("^").chain(HMM_TAGS.iter().copied()) {
            let row = HMM_TRANS.iter().find(|(f, _)| *f == from).unwrap().1;
            let mut w = vec![0.0; tags.len() + 1];
            for (to, p) in row {
                w[idx(to).unwrap_or(tags.len())] += p;
            }
            trans.push(WeightedIndex::new(w).unwrap());
        }

        let mut used = BTreeSet::new();
        let mut fresh = |rng: &mut ChaCha8Rng, suffix: &str, cap: bool| loop {
            let n = rng.gen_range(1..=3);
            let mut w = syllables(rng, n) + suffix;
            if cap {
                let mut c = w.chars();
                w = c.next().unwrap().to_uppercase().collect::<String>() + c.as_str();
            }
            if used.insert(w.clone()) {
                return w;
            }
        };

        let mut shared: Vec<Vec<String>> = Vec::new();
        for _ in AMBIGUOUS_PAIRS {
            shared.push((0..30).map(|_| fresh(&mut rng, "", false)).collect());
        }
        let mut emit = Vec::new();
        let mut ambiguous_types = BTreeSet::new();
        for (ti, code) in HMM_TAGS.iter().enumerate() {
            let (n_own, suffixes, cap): (usize, &[&str], bool) = match *code {
                "CON" => (40, &["tion", "er", "ness"], false),
                "ENS" => (30, &["s", "izes"], false),
                "EPS" => (30, &["ed", "ought"], false),
                "IST" => (25, &["ous", "al", "ive"], false),
                "GPE" => (25, &["ia", "land", "burg"], true),
                "NIL" => (0, &[], false),
                _ => (6, &[""], false),
            };
            let mut words: Vec<String> = (0..n_own)
                .map(|i| fresh(&mut rng, suffixes[i % suffixes.len()], cap))
                .collect();
            if *code == "NIL" {
                words = vec![".".into(), "!".into()];
            }
            let own = words.len();
            let mut weights: Vec<f64> = zipf_weights(own);
            let own_mass: f64 = weights.iter().sum();
            // Shared words take 45% of the tag's emission mass.
            let pairs: Vec<usize> = AMBIGUOUS_PAIRS
                .iter()
                .enumerate()
                .filter(|(_, (a, b))| *a == *code || *b == *code)
                .map(|(i, _)| i)
                .collect();
            if !pairs.is_empty() {
                weights.iter_mut().for_each(|w| *w *= 0.55 / own_mass);
                for &p in &pairs {
                    let z = zipf_weights(shared[p].len());
                    let zm: f64 = z.iter().sum();
                    for (w, zw) in shared[p].iter().zip(z) {
                        words.push(w.clone());
                        weights.push(0.45 / pairs.len() as f64 * zw / zm);
                        ambiguous_types.insert(w.clone());
                    }
                }
            }
            let _ = ti;
            emit.push((words, WeightedIndex::new(weights).unwrap()));
        }
        let all_types = emit.iter().flat_map(|(w, _)| w.iter().cloned()).collect();
        SyntheticHmm {
            tags,
            trans,
            emit,
            ambiguous_types,
            all_types,
        }
    }

    pub fn sentence(&self, rng: &mut ChaCha8Rng) -> Sentence<TaggedToken> {
        let mut state = 0usize; // start row
        let mut items = Vec::new();
        loop {
            let next = self.trans[state].sample(rng);
            if next == self.tags.len() || items.len() >= 40 {
                break;
            }
            let (words, dist) = &self.emit[next];
            let w = &words[dist.sample(rng)];
            items.push(TaggedToken::new(Token::parse(w).unwrap(), self.tags[next]));
            state = next + 1;
        }
        Sentence::new(items).expect("every path emits at least one token")
    }

    pub fn corpus(&self, rng: &mut ChaCha8Rng, n: usize) -> TaggedCorpus {
        Corpus::new((0..n).map(|_| self.sentence(rng)).collect())
    }
}

/// Share of word types seen in `corpus` with at least two different tags.
pub fn empirical_ambiguity(corpus: &TaggedCorpus) -> f64 {
    let mut seen: HashMap<&str, BTreeSet<SemTag>> = HashMap::new();
    for s in &corpus.sentences {
        for it in s.items() {
            seen.entry(it.token.surface()).or_default().insert(it.tag);
        }
    }
    let amb = seen.values().filter(|t| t.len() > 1).count();
    amb as f64 / seen.len() as f64
}

pub struct SyntheticSplit {
    pub train: TaggedCorpus,
    pub test: TaggedCorpus,
    pub hmm: SyntheticHmm,
}

pub fn synthetic_split(seed: u64, n_train: usize, n_test: usize) -> SyntheticSplit {
    let hmm = SyntheticHmm::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let train = hmm.corpus(&mut rng, n_train);
    let test = hmm.corpus(&mut rng, n_test);
    SyntheticSplit { train, test, hmm }
}

// ---------------------------------------------------------------------------
// Toy corpora for exhaustive checks

pub struct ToyCase {
    pub train: TaggedCorpus,
    /// Sentences to decode: the training sentences plus random ones that may
    /// contain unseen words.
    pub probes: Vec<Vec<String>>,
}

const TOY_WORDS: [&str; 8] = ["a", "b", "cat", "Dog", "run~away", "xs", "Ys", "the"];
const TOY_UNSEEN: [&str; 5] = ["zz", "Qat", "runs", "new~xs", "b~b"];

pub fn toy_case(rng: &mut ChaCha8Rng) -> ToyCase {
    let n_tags = rng.gen_range(1..=6);
    let mut all: Vec<usize> = (0..semtag::tagset::NUM_SEM_TAGS).collect();
    all.shuffle(rng);
    let tags: Vec<SemTag> = all[..n_tags].iter().map(|&i| SemTag::from_index(i).unwrap()).collect();
    let vocab_size = rng.gen_range(1..=TOY_WORDS.len());
    let vocab = &TOY_WORDS[..vocab_size];
    let n_sent = rng.gen_range(1..=6);
    let mut sentences = Vec::new();
    for _ in 0..n_sent {
        let len = rng.gen_range(1..=5);
        let pairs: Vec<(&str, SemTag)> = (0..len)
            .map(|_| (*vocab.choose(rng).unwrap(), *tags.choose(rng).unwrap()))
            .collect();
        sentences.push(tagged_sentence(&pairs));
    }
    let train = Corpus::new(sentences);
    let mut probes: Vec<Vec<String>> = train.sentences.iter().map(surfaces).collect();
    for _ in 0..2 {
        let len = rng.gen_range(1..=5);
        probes.push(
            (0..len)
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        TOY_UNSEEN.choose(rng).unwrap().to_string()
                    } else {
                        vocab.choose(rng).unwrap().to_string()
                    }
                })
                .collect(),
        );
    }
    ToyCase { train, probes }
}

/// Every tag sequence of length `n` over `tags`, in lexicographic order.
pub fn all_sequences(tags: &[SemTag], n: usize) -> Vec<Vec<SemTag>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                tags.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

/// The decoder's contract by brute force: maximise the joint score (summed
/// in decoding order); among exact ties prefer lower tags comparing from the
/// last token backwards; if no sequence has a finite score, take each
/// token's best emission.
pub fn brute_force_decode(model: &TrigramModel, words: &[&str]) -> Vec<SemTag> {
    let tags = model.observed_tags().to_vec();
    let mut best: Option<(f64, Vec<SemTag>)> = None;
    for seq in all_sequences(&tags, words.len()) {
        let s = path_score(model, words, &seq);
        if s == f64::NEG_INFINITY {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bs, bseq)) => {
                s > *bs || (s == *bs && seq.iter().rev().lt(bseq.iter().rev()))
            }
        };
        if better {
            best = Some((s, seq));
        }
    }
    match best {
        Some((_, seq)) => seq,
        None => words
            .iter()
            .map(|w| {
                let mut b: Option<(SemTag, f64)> = None;
                for &t in &tags {
                    let e = model.emission_logprob(w, t);
                    if e.is_finite() && b.map_or(true, |(_, be)| e > be) {
                        b = Some((t, e));
                    }
                }
                b.map_or(model.default_tag(), |(t, _)| t)
            })
            .collect(),
    }
}

/// Every sequence reaching the exhaustive maximum score, and that score.
/// Empty when no sequence has a finite score.
pub fn brute_force_argmax(model: &TrigramModel, words: &[&str]) -> (f64, Vec<Vec<SemTag>>) {
    let tags = model.observed_tags().to_vec();
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for seq in all_sequences(&tags, words.len()) {
        let s = path_score(model, words, &seq);
        if s == f64::NEG_INFINITY || s < best {
            continue;
        }
        if s > best {
            best = s;
            arg.clear();
        }
        arg.push(seq);
    }
    (best, arg)
}

/// How a decoded sequence relates to exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    /// Equal to the exhaustive pick, tie-break included.
    Exact,
    /// A different member of a tied argmax set. Totals that tie exactly can
    /// still differ in their rounded partial sums, which is what the dynamic
    /// programme compares, so the tie-break may resolve either way.
    TiedArgmax,
    Wrong,
}

pub fn oracle_verdict(model: &TrigramModel, words: &[&str], got: &[SemTag]) -> OracleVerdict {
    if got == brute_force_decode(model, words).as_slice() {
        return OracleVerdict::Exact;
    }
    let (_, arg) = brute_force_argmax(model, words);
    if arg.len() > 1 && arg.iter().any(|s| s.as_slice() == got) {
        OracleVerdict::TiedArgmax
    } else {
        OracleVerdict::Wrong
    }
}

/// All complete path scores, best first.
pub fn brute_force_scores(model: &TrigramModel, words: &[&str]) -> Vec<f64> {
    let tags = model.observed_tags().to_vec();
    let mut scores: Vec<f64> = all_sequences(&tags, words.len())
        .iter()
        .map(|seq| path_score(model, words, seq))
        .collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores
}

// ---------------------------------------------------------------------------
// Independent count-based scoring

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Straightforward re-implementation of the trigram model's statistics from
/// the raw corpus, keyed by strings.
pub struct NaiveCounts {
    uni: HashMap<String, u64>,
    bi: HashMap<(String, String), u64>,
    tri: HashMap<(String, String, String), u64>,
    lex: HashMap<(String, String), u64>,
    words: BTreeSet<String>,
    n: u64,
    s: u64,
}

impl NaiveCounts {
    pub fn new(corpus: &TaggedCorpus) -> NaiveCounts {
        let mut c = NaiveCounts {
            uni: HashMap::new(),
            bi: HashMap::new(),
            tri: HashMap::new(),
            lex: HashMap::new(),
            words: BTreeSet::new(),
            n: 0,
            s: 0,
        };
        for sent in &corpus.sentences {
            c.s += 1;
            let mut seq = vec![BOS.to_owned(), BOS.to_owned()];
            for it in sent.items() {
                seq.push(it.tag.code().to_owned());
                *c.uni.entry(it.tag.code().to_owned()).or_default() += 1;
                *c.lex
                    .entry((it.token.surface().to_owned(), it.tag.code().to_owned()))
                    .or_default() += 1;
                c.words.insert(it.token.surface().to_owned());
                c.n += 1;
            }
            seq.push(EOS.to_owned());
            for i in 2..seq.len() {
                *c.bi.entry((seq[i - 1].clone(), seq[i].clone())).or_default() += 1;
                *c.tri
                    .entry((seq[i - 2].clone(), seq[i - 1].clone(), seq[i].clone()))
                    .or_default() += 1;
            }
        }
        c
    }

    fn uni_event(&self, t: &str) -> u64 {
        if t == EOS {
            self.s
        } else {
            self.uni.get(t).copied().unwrap_or(0)
        }
    }

    fn h1(&self, t: &str) -> u64 {
        if t == BOS {
            self.s
        } else {
            self.uni.get(t).copied().unwrap_or(0)
        }
    }

    fn h2(&self, a: &str, b: &str) -> u64 {
        if a == BOS && b == BOS {
            self.s
        } else {
            self.bi.get(&(a.to_owned(), b.to_owned())).copied().unwrap_or(0)
        }
    }

    fn big(&self, a: &str, b: &str) -> u64 {
        self.bi.get(&(a.to_owned(), b.to_owned())).copied().unwrap_or(0)
    }

    fn trig(&self, a: &str, b: &str, c: &str) -> u64 {
        self.tri
            .get(&(a.to_owned(), b.to_owned(), c.to_owned()))
            .copied()
            .unwrap_or(0)
    }

    /// Deleted interpolation, written out directly.
    pub fn lambdas(&self) -> [f64; 3] {
        let f = |num: u64, den: u64| {
            if den > 1 && num > 0 {
                (num as f64 - 1.0) / (den as f64 - 1.0)
            } else {
                0.0
            }
        };
        let mut votes = [0u64; 3];
        for ((a, b, c), &n) in &self.tri {
            let r3 = f(n, self.h2(a, b));
            let r2 = f(self.big(b, c), self.h1(b));
            let r1 = f(self.uni_event(c), self.n + self.s);
            let k = if r3 >= r2 && r3 >= r1 {
                2
            } else if r2 >= r1 {
                1
            } else {
                0
            };
            votes[k] += n;
        }
        let total: u64 = votes.iter().sum();
        votes.map(|v| v as f64 / total as f64)
    }

    pub fn trans(&self, l: [f64; 3], a: &str, b: &str, c: &str) -> f64 {
        let r = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        l[0] * r(self.uni_event(c), self.n + self.s) + l[1] * r(self.big(b, c), self.h1(b)) + l[2] * r(self.trig(a, b, c), self.h2(a, b))
    }

    /// Joint log-score; unseen words defer to the model's suffix estimate.
    pub fn score(&self, model: &TrigramModel, words: &[&str], tags: &[SemTag]) -> f64 {
        let l = self.lambdas();
        let mut hist = (BOS.to_owned(), BOS.to_owned());
        let mut total = 0.0;
        for (w, t) in words.iter().zip(tags) {
            let code = t.code();
            total += self.trans(l, &hist.0, &hist.1, code).ln();
            total += if self.words.contains(*w) {
                let n = self.lex.get(&(w.to_string(), code.to_owned())).copied().unwrap_or(0);
                (n as f64 / self.h1(code) as f64).ln()
            } else {
                model.emission_logprob(w, *t)
            };
            hist = (hist.1, code.to_owned());
        }
        total + self.trans(l, &hist.0, &hist.1, EOS).ln()
    }

    /// Histories `(a, b)` that occurred before some event.
    pub fn histories(&self) -> BTreeSet<(String, String)> {
        self.tri.keys().map(|(a, b, _)| (a.clone(), b.clone())).collect()
    }

    pub fn events(&self) -> Vec<String> {
        let mut e: Vec<String> = self.uni.keys().cloned().collect();
        e.push(EOS.to_owned());
        e
    }
}

/// Maps the oracle's string states to the library's.
pub fn state(code: &str) -> semtag::tagger::State {
    match code {
        BOS => semtag::tagger::State::BOS,
        EOS => semtag::tagger::State::EOS,
        c => semtag::tagger::State::parse(c).unwrap(),
    }
}

pub fn word_tag_table(corpus: &TaggedCorpus) -> BTreeMap<String, BTreeMap<SemTag, u64>> {
    let mut m: BTreeMap<String, BTreeMap<SemTag, u64>> = BTreeMap::new();
    for s in &corpus.sentences {
        for it in s.items() {
            *m.entry(it.token.surface().to_owned()).or_default().entry(it.tag).or_default() += 1;
        }
    }
    m
}

pub use rand::SeedableRng;

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `semtag` binary with the given arguments.
pub fn semtag<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> CliRun {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_semtag"))
        .args(args)
        .output()
        .expect("spawn semtag");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}
