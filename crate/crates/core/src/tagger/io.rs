//! Line-oriented model file.
//!
//! ```text
//! [meta]          key<TAB>value
//! [lambdas]       l1<TAB>p, l2<TAB>p, l3<TAB>p
//! [unigram]       TAG<TAB>count
//! [bigram]        T1<TAB>T2<TAB>count
//! [trigram]       T1<TAB>T2<TAB>T3<TAB>count
//! [lexicon]       surface<TAB>TAG<TAB>count
//! [suffix-lower]  suffix<TAB>TAG<TAB>p      (empty suffix = empty field)
//! [suffix-upper]  suffix<TAB>TAG<TAB>p
//! ```
//!
//! Probabilities carry 17 significant digits so reloading is exact. Entries
//! are sorted, zero entries omitted.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::tagset::{SemTag, NUM_SEM_TAGS, TAGSET_VERSION};

use super::counts::{bi_idx, tri_idx, NgramCounts, State};
use super::suffix::{SuffixModel, SuffixTable};
use super::{TaggerError, TrigramModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn fmt_prob(p: f64) -> String {
    format!("{p:.16e}")
}

impl TrigramModel {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let c = &self.counts;
        writeln!(out, "[meta]")?;
        writeln!(out, "format\t{MODEL_FORMAT_VERSION}")?;
        writeln!(out, "tagset\t{TAGSET_VERSION}")?;
        writeln!(out, "beam_width\t{}", self.beam_width)?;
        writeln!(out, "max_suffix_len\t{}", self.suffix.max_suffix_len)?;
        writeln!(out, "rare_threshold\t{}", self.suffix.rare_threshold)?;
        writeln!(out, "theta\t{}", fmt_prob(self.suffix.theta))?;
        writeln!(out, "tokens\t{}", c.token_total)?;
        writeln!(out, "sentences\t{}", c.sentences)?;

        writeln!(out, "[lambdas]")?;
        for (i, l) in self.lambdas.iter().enumerate() {
            writeln!(out, "l{}\t{}", i + 1, fmt_prob(*l))?;
        }

        writeln!(out, "[unigram]")?;
        for t in crate::tagset::all_tags() {
            let n = c.unigram(t);
            if n > 0 {
                writeln!(out, "{t}\t{n}")?;
            }
        }
        writeln!(out, "[bigram]")?;
        for ((a, b), n) in c.bigrams() {
            writeln!(out, "{a}\t{b}\t{n}")?;
        }
        writeln!(out, "[trigram]")?;
        for ((a, b, d), n) in c.trigrams() {
            writeln!(out, "{a}\t{b}\t{d}\t{n}")?;
        }
        writeln!(out, "[lexicon]")?;
        for (w, tags) in c.lexicon() {
            for (t, n) in tags {
                writeln!(out, "{w}\t{t}\t{n}")?;
            }
        }
        for (name, table) in [("suffix-lower", &self.suffix.lower), ("suffix-upper", &self.suffix.upper)] {
            writeln!(out, "[{name}]")?;
            for (s, dist) in table.suffixes() {
                for (i, &p) in dist.iter().enumerate() {
                    if p > 0.0 {
                        let t = SemTag::from_index(i).unwrap();
                        writeln!(out, "{s}\t{t}\t{}", fmt_prob(p))?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_model_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("model text is UTF-8")
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<TrigramModel, TaggerError> {
        let mut section = String::new();
        let mut meta: BTreeMap<String, String> = BTreeMap::new();
        let mut lambdas = [f64::NAN; 3];
        let mut counts = NgramCounts::empty();
        let mut lex: BTreeMap<String, Vec<(SemTag, u64)>> = BTreeMap::new();
        let mut tables: [BTreeMap<String, Vec<f64>>; 2] = [BTreeMap::new(), BTreeMap::new()];

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let err = |msg: String| TaggerError::ModelFormat { line: lineno, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.to_owned();
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let want = |n: usize| {
                if f.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("[{section}] expects {n} fields, found {}", f.len())))
                }
            };
            let state = |s: &str| State::parse(s).ok_or_else(|| err(format!("unknown tag `{s}`")));
            let tag = |s: &str| SemTag::parse(s).map_err(|_| err(format!("unknown tag `{s}`")));
            let count = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad count `{s}`")));
            let prob = |s: &str| match s.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => Ok(p),
                _ => Err(err(format!("bad probability `{s}`"))),
            };
            match section.as_str() {
                "meta" => {
                    want(2)?;
                    meta.insert(f[0].to_owned(), f[1].to_owned());
                }
                "lambdas" => {
                    want(2)?;
                    let i = match f[0] {
                        "l1" => 0,
                        "l2" => 1,
                        "l3" => 2,
                        k => return Err(err(format!("unknown lambda `{k}`"))),
                    };
                    lambdas[i] = prob(f[1])?;
                }
                "unigram" => {
                    want(2)?;
                    counts.unigram[tag(f[0])?.index()] = count(f[1])?;
                }
                "bigram" => {
                    want(3)?;
                    counts.bigram[bi_idx(state(f[0])?, state(f[1])?)] = count(f[2])?;
                }
                "trigram" => {
                    want(4)?;
                    counts.trigram[tri_idx(state(f[0])?, state(f[1])?, state(f[2])?)] = count(f[3])?;
                }
                "lexicon" => {
                    want(3)?;
                    let t = tag(f[1])?;
                    let entry = lex.entry(f[0].to_owned()).or_default();
                    if entry.last().is_some_and(|&(prev, _)| prev >= t) {
                        return Err(err("lexicon entries out of order".into()));
                    }
                    entry.push((t, count(f[2])?));
                }
                "suffix-lower" | "suffix-upper" => {
                    want(3)?;
                    let v = usize::from(section == "suffix-upper");
                    let dist = tables[v]
                        .entry(f[0].to_owned())
                        .or_insert_with(|| vec![0.0; NUM_SEM_TAGS]);
                    dist[tag(f[1])?.index()] = prob(f[2])?;
                }
                "" => return Err(err("content before first section".into())),
                other => return Err(err(format!("unknown section [{other}]"))),
            }
        }

        let get = |k: &str| {
            meta.get(k).ok_or_else(|| TaggerError::ModelFormat {
                line: 0,
                msg: format!("missing meta key `{k}`"),
            })
        };
        let bad = |k: &str| TaggerError::ModelFormat {
            line: 0,
            msg: format!("bad value for meta key `{k}`"),
        };
        let num = |k: &str| get(k)?.parse::<u64>().map_err(|_| bad(k));

        if num("format")? != u64::from(MODEL_FORMAT_VERSION) {
            return Err(bad("format"));
        }
        if get("tagset")? != TAGSET_VERSION {
            return Err(bad("tagset"));
        }
        counts.token_total = num("tokens")?;
        counts.sentences = num("sentences")?;
        counts.lexicon = lex;
        if counts.unigram.iter().sum::<u64>() != counts.token_total || counts.token_total == 0 {
            return Err(TaggerError::ModelFormat {
                line: 0,
                msg: "unigram counts do not sum to the token total".into(),
            });
        }
        if lambdas.iter().any(|l| l.is_nan()) {
            return Err(TaggerError::ModelFormat {
                line: 0,
                msg: "missing interpolation weights".into(),
            });
        }
        let theta = get("theta")?.parse::<f64>().map_err(|_| bad("theta"))?;
        let [lower, upper] = tables;
        if !lower.contains_key("") || !upper.contains_key("") {
            return Err(TaggerError::ModelFormat {
                line: 0,
                msg: "suffix tables need an empty-suffix entry".into(),
            });
        }
        let suffix = SuffixModel {
            max_suffix_len: num("max_suffix_len")? as usize,
            rare_threshold: num("rare_threshold")?,
            theta,
            lower: SuffixTable { dists: lower },
            upper: SuffixTable { dists: upper },
        };
        Ok(TrigramModel::assemble(
            counts,
            lambdas,
            suffix,
            num("beam_width")? as usize,
        ))
    }

    pub fn from_model_str(text: &str) -> Result<TrigramModel, TaggerError> {
        Self::read_from(text.as_bytes())
    }
}
