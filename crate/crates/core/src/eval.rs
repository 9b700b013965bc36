//! Scoring tagger output against gold corpora.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::TaggedCorpus;
use crate::tagset::{MetaTag, SemTag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("sentence {sentence}: gold has {gold} tokens, prediction has {predicted}")]
    Alignment {
        sentence: usize,
        gold: usize,
        predicted: usize,
    },
    #[error("gold has {gold} sentences, prediction has {predicted}")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("sentence {sentence}, token {token}: surface `{gold}` does not match `{predicted}`")]
    SurfaceMismatch {
        sentence: usize,
        token: usize,
        gold: String,
        predicted: String,
    },
    #[error("reports cover {a} and {b} tokens")]
    IncomparableReports { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TagScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: usize,
    /// Times predicted.
    pub predicted: usize,
    /// Set when a zero denominator forced precision, recall or F1 to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub token_total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Tags occurring in gold or predictions.
    pub per_tag: BTreeMap<SemTag, TagScores>,
    /// `(gold, predicted) -> count`.
    pub confusion: BTreeMap<(SemTag, SemTag), usize>,
    /// Per gold meta-tag: share of its tokens predicted within the same meta-tag.
    pub per_meta_accuracy: BTreeMap<MetaTag, f64>,
    /// Accuracy after collapsing every tag to its meta-tag.
    pub meta_accuracy: f64,
    // Per-token correctness in gold order, for pairwise comparison.
    outcomes: Vec<bool>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores `predicted` against `gold`; both must have the same shape.
pub fn evaluate(gold: &TaggedCorpus, predicted: &[Vec<SemTag>]) -> Result<EvalReport, EvalError> {
    if gold.sentences.len() != predicted.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.sentences.len(),
            predicted: predicted.len(),
        });
    }
    for (i, (g, p)) in gold.sentences.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::Alignment {
                sentence: i,
                gold: g.len(),
                predicted: p.len(),
            });
        }
    }

    let mut confusion: BTreeMap<(SemTag, SemTag), usize> = BTreeMap::new();
    let mut outcomes = Vec::new();
    let mut meta_total: BTreeMap<MetaTag, usize> = BTreeMap::new();
    let mut meta_hit: BTreeMap<MetaTag, usize> = BTreeMap::new();
    for (g, p) in gold.sentences.iter().zip(predicted) {
        for (item, &pt) in g.items().iter().zip(p) {
            let gt = item.tag;
            *confusion.entry((gt, pt)).or_default() += 1;
            outcomes.push(gt == pt);
            *meta_total.entry(gt.meta()).or_default() += 1;
            if gt.meta() == pt.meta() {
                *meta_hit.entry(gt.meta()).or_default() += 1;
            }
        }
    }

    let token_total = outcomes.len();
    let correct = outcomes.iter().filter(|&&ok| ok).count();

    let mut support: BTreeMap<SemTag, usize> = BTreeMap::new();
    let mut guessed: BTreeMap<SemTag, usize> = BTreeMap::new();
    let mut hits: BTreeMap<SemTag, usize> = BTreeMap::new();
    for (&(g, p), &n) in &confusion {
        *support.entry(g).or_default() += n;
        *guessed.entry(p).or_default() += n;
        support.entry(p).or_default();
        guessed.entry(g).or_default();
        if g == p {
            *hits.entry(g).or_default() += n;
        }
    }
    let per_tag = support
        .iter()
        .map(|(&t, &sup)| {
            let pred = guessed[&t];
            let tp = hits.get(&t).copied().unwrap_or(0);
            let precision = ratio(tp, pred);
            let recall = ratio(tp, sup);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            let degenerate = pred == 0 || sup == 0 || precision + recall == 0.0;
            (
                t,
                TagScores {
                    precision,
                    recall,
                    f1,
                    support: sup,
                    predicted: pred,
                    degenerate,
                },
            )
        })
        .collect();

    let per_meta_accuracy = meta_total
        .iter()
        .map(|(&m, &n)| (m, ratio(meta_hit.get(&m).copied().unwrap_or(0), n)))
        .collect();
    let meta_correct: usize = meta_hit.values().sum();

    Ok(EvalReport {
        token_total,
        correct,
        accuracy: ratio(correct, token_total),
        per_tag,
        confusion,
        per_meta_accuracy,
        meta_accuracy: ratio(meta_correct, token_total),
        outcomes,
    })
}

/// Like [`evaluate`], but also checks that the predicted corpus has the same
/// surfaces as gold.
pub fn evaluate_corpora(gold: &TaggedCorpus, predicted: &TaggedCorpus) -> Result<EvalReport, EvalError> {
    if gold.sentences.len() != predicted.sentences.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.sentences.len(),
            predicted: predicted.sentences.len(),
        });
    }
    for (i, (g, p)) in gold.sentences.iter().zip(&predicted.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::Alignment {
                sentence: i,
                gold: g.len(),
                predicted: p.len(),
            });
        }
        for (j, (gt, pt)) in g.items().iter().zip(p.items()).enumerate() {
            if gt.token != pt.token {
                return Err(EvalError::SurfaceMismatch {
                    sentence: i,
                    token: j,
                    gold: gt.token.surface().to_owned(),
                    predicted: pt.token.surface().to_owned(),
                });
            }
        }
    }
    let tags: Vec<Vec<SemTag>> = predicted.sentences.iter().map(|s| s.tags()).collect();
    evaluate(gold, &tags)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary {
    /// `a.accuracy - b.accuracy`.
    pub accuracy_delta: f64,
    /// `a.f1 - b.f1` for every tag scored in either report.
    pub f1_delta: BTreeMap<SemTag, f64>,
    pub both_right: usize,
    pub only_a: usize,
    pub only_b: usize,
    pub both_wrong: usize,
}

/// Compares two reports computed on the same gold corpus.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Result<ComparisonSummary, EvalError> {
    if a.token_total != b.token_total {
        return Err(EvalError::IncomparableReports {
            a: a.token_total,
            b: b.token_total,
        });
    }
    let (mut both_right, mut only_a, mut only_b, mut both_wrong) = (0, 0, 0, 0);
    for (&x, &y) in a.outcomes.iter().zip(&b.outcomes) {
        match (x, y) {
            (true, true) => both_right += 1,
            (true, false) => only_a += 1,
            (false, true) => only_b += 1,
            (false, false) => both_wrong += 1,
        }
    }
    let f1 = |r: &EvalReport, t: &SemTag| r.per_tag.get(t).map_or(0.0, |s| s.f1);
    let f1_delta = a
        .per_tag
        .keys()
        .chain(b.per_tag.keys())
        .map(|t| (*t, f1(a, t) - f1(b, t)))
        .collect();
    Ok(ComparisonSummary {
        accuracy_delta: a.accuracy - b.accuracy,
        f1_delta,
        both_right,
        only_a,
        only_b,
        both_wrong,
    })
}

impl EvalReport {
    /// Per-token correctness in gold order.
    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    /// Machine-readable `metric<TAB>key<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tokens\tall\t{}", self.token_total);
        let _ = writeln!(out, "correct\tall\t{}", self.correct);
        let _ = writeln!(out, "accuracy\tall\t{:.6}", self.accuracy);
        let _ = writeln!(out, "meta_accuracy\tall\t{:.6}", self.meta_accuracy);
        for (t, s) in &self.per_tag {
            let _ = writeln!(out, "precision\t{t}\t{:.6}", s.precision);
            let _ = writeln!(out, "recall\t{t}\t{:.6}", s.recall);
            let _ = writeln!(out, "f1\t{t}\t{:.6}", s.f1);
            let _ = writeln!(out, "support\t{t}\t{}", s.support);
            if s.degenerate {
                let _ = writeln!(out, "degenerate\t{t}\t1");
            }
        }
        for (m, acc) in &self.per_meta_accuracy {
            let _ = writeln!(out, "meta_accuracy\t{m}\t{acc:.6}");
        }
        for ((g, p), n) in &self.confusion {
            let _ = writeln!(out, "confusion\t{g}>{p}\t{n}");
        }
        out
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy       {:.4}  ({}/{})",
            self.accuracy, self.correct, self.token_total
        );
        let _ = writeln!(out, "meta accuracy  {:.4}", self.meta_accuracy);
        let _ = writeln!(out);
        let _ = writeln!(out, "tag  precision  recall      f1  support");
        for (t, s) in &self.per_tag {
            let _ = writeln!(
                out,
                "{t}  {:>9.4}  {:>6.4}  {:>6.4}  {:>7}{}",
                s.precision,
                s.recall,
                s.f1,
                s.support,
                if s.degenerate { "  *" } else { "" }
            );
        }
        if self.per_tag.values().any(|s| s.degenerate) {
            let _ = writeln!(out, "(* zero denominator, reported as 0)");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "meta  accuracy");
        for (m, acc) in &self.per_meta_accuracy {
            let _ = writeln!(out, "{m}   {acc:>8.4}");
        }
        out
    }
}

impl ComparisonSummary {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "accuracy_delta\tall\t{:+.6}", self.accuracy_delta);
        let _ = writeln!(out, "disagreement\tboth_right\t{}", self.both_right);
        let _ = writeln!(out, "disagreement\tonly_a\t{}", self.only_a);
        let _ = writeln!(out, "disagreement\tonly_b\t{}", self.only_b);
        let _ = writeln!(out, "disagreement\tboth_wrong\t{}", self.both_wrong);
        for (t, d) in &self.f1_delta {
            let _ = writeln!(out, "f1_delta\t{t}\t{d:+.6}");
        }
        out
    }

    pub fn to_text(&self, a_name: &str, b_name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "accuracy delta ({a_name} - {b_name}): {:+.4}", self.accuracy_delta);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:>12} {:>12} {:>12}", "", format!("{b_name} right"), format!("{b_name} wrong"));
        let _ = writeln!(out, "{:>12} {:>12} {:>12}", format!("{a_name} right"), self.both_right, self.only_a);
        let _ = writeln!(out, "{:>12} {:>12} {:>12}", format!("{a_name} wrong"), self.only_b, self.both_wrong);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_tagged;

    fn t(code: &str) -> SemTag {
        SemTag::parse(code).unwrap()
    }

    fn gold() -> TaggedCorpus {
        read_tagged("a\tDIS\nb\tCON\n".as_bytes()).unwrap()
    }

    #[test]
    fn identity() {
        let g = gold();
        let r = evaluate(&g, &[vec![t("DIS"), t("CON")]]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert!(r.confusion.keys().all(|(a, b)| a == b));
        assert!(r.per_tag.values().all(|s| s.f1 == 1.0 && !s.degenerate));
    }

    #[test]
    fn one_error() {
        let r = evaluate(&gold(), &[vec![t("AND"), t("CON")]]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        let expected: BTreeMap<_, _> = [((t("DIS"), t("AND")), 1), ((t("CON"), t("CON")), 1)].into();
        assert_eq!(r.confusion, expected);
        let and = r.per_tag[&t("AND")];
        assert_eq!((and.precision, and.recall, and.support), (0.0, 0.0, 0));
        assert!(and.degenerate);
        let dis = r.per_tag[&t("DIS")];
        assert_eq!((dis.precision, dis.recall, dis.f1), (0.0, 0.0, 0.0));
        assert!(dis.degenerate);
        // DIS and AND are both logical, so the meta view counts the token right.
        assert_eq!(r.meta_accuracy, 1.0);
    }

    #[test]
    fn misaligned() {
        assert_eq!(
            evaluate(&gold(), &[vec![t("DIS")]]),
            Err(EvalError::Alignment {
                sentence: 0,
                gold: 2,
                predicted: 1
            })
        );
        assert!(matches!(
            evaluate(&gold(), &[]),
            Err(EvalError::SentenceCount { .. })
        ));
        let other = read_tagged("a\tDIS\nc\tCON\n".as_bytes()).unwrap();
        assert!(matches!(
            evaluate_corpora(&gold(), &other),
            Err(EvalError::SurfaceMismatch { token: 1, .. })
        ));
    }

    #[test]
    fn compare_reported_accuracies() {
        // 10000 tokens: 8689 vs 8218 correct.
        let text: String = (0..10000).map(|i| format!("w{i}\tCON\n")).collect();
        let g = read_tagged(text.as_bytes()).unwrap();
        let pred = |k: usize| -> Vec<Vec<SemTag>> {
            vec![(0..10000).map(|i| if i < k { t("CON") } else { t("ROL") }).collect()]
        };
        let a = evaluate(&g, &pred(8689)).unwrap();
        let b = evaluate(&g, &pred(8218)).unwrap();
        let cmp = compare(&a, &b).unwrap();
        assert!((cmp.accuracy_delta - 0.0471).abs() < 1e-12);
        assert_eq!(cmp.both_right, 8218);
        assert_eq!(cmp.only_a, 471);
        assert_eq!(cmp.only_b, 0);
        assert_eq!(cmp.both_wrong, 10000 - 8689);
    }

    #[test]
    fn compare_self_and_mismatch() {
        let g = gold();
        let a = evaluate(&g, &[vec![t("AND"), t("CON")]]).unwrap();
        let cmp = compare(&a, &a).unwrap();
        assert_eq!(cmp.accuracy_delta, 0.0);
        assert_eq!((cmp.only_a, cmp.only_b), (0, 0));
        assert_eq!((cmp.both_right, cmp.both_wrong), (1, 1));
        let other = evaluate(&read_tagged("a\tDIS\n".as_bytes()).unwrap(), &[vec![t("DIS")]]).unwrap();
        assert_eq!(
            compare(&a, &other),
            Err(EvalError::IncomparableReports { a: 2, b: 1 })
        );
    }

    #[test]
    fn tsv_lines_have_three_fields() {
        let r = evaluate(&gold(), &[vec![t("AND"), t("CON")]]).unwrap();
        for line in r.to_tsv().lines() {
            assert_eq!(line.split('\t').count(), 3, "{line}");
        }
        assert!(r.to_tsv().contains("accuracy\tall\t0.500000\n"));
        assert!(r.to_tsv().contains("confusion\tDIS>AND\t1\n"));
        assert!(r.to_text().contains("accuracy       0.5000  (1/2)"));
    }
}
