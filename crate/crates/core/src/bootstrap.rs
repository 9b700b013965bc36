//! Self-training: tag unlabeled text, promote confident sentences into the
//! training set, retrain, and watch held-out accuracy.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Corpus, PlainCorpus, Sentence, TaggedCorpus, Token};
use crate::eval::{evaluate, EvalError, EvalReport};
use crate::tagger::{tag_corpus, TaggerConfig, TaggerError, TrigramModel};
use crate::tagset::SemTag;

#[derive(Debug, Error)]
pub enum BootstrapError {
    #[error("seed corpus is empty")]
    EmptySeed,
    #[error("held-out corpus is empty")]
    EmptyHeldout,
    #[error("invalid bootstrap configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub max_iterations: usize,
    /// Minimum sentence confidence for promotion, in `(0, 1]`.
    pub confidence_threshold: f64,
    /// Most sentences promoted per iteration.
    pub promote_cap: usize,
    /// Stop once an iteration gains less held-out accuracy than this.
    pub stop_delta: f64,
    pub tagger: TaggerConfig,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            max_iterations: 5,
            confidence_threshold: 0.9,
            promote_cap: 1000,
            stop_delta: 0.0,
            tagger: TaggerConfig::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<(), BootstrapError> {
        let bad = |m: &str| Err(BootstrapError::InvalidConfig(m.to_owned()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.confidence_threshold > 0.0 && self.confidence_threshold <= 1.0) {
            return bad("confidence_threshold must lie in (0, 1]");
        }
        if self.promote_cap == 0 {
            return bad("promote_cap must be positive");
        }
        if !(self.stop_delta >= 0.0 && self.stop_delta.is_finite()) {
            return bad("stop_delta must be a non-negative number");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    /// No pool sentence reached the threshold, or the pool ran dry.
    NothingToPromote,
    /// Held-out accuracy improved by less than `stop_delta`.
    HeldoutGain,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MaxIterations => "max-iterations",
            StopReason::NothingToPromote => "nothing-to-promote",
            StopReason::HeldoutGain => "heldout-gain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 0 is the seed-only model.
    pub iteration: usize,
    pub training_sentences: usize,
    pub training_tokens: usize,
    pub promoted: usize,
    pub heldout_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReport {
    pub iterations: Vec<IterationRecord>,
    /// Iteration whose model was returned: the best held-out accuracy,
    /// earliest on ties.
    pub selected_iteration: usize,
    pub stop_reason: StopReason,
    /// Sentences promoted in iteration `i + 1`, with their predicted tags.
    pub promoted: Vec<TaggedCorpus>,
    /// Held-out evaluation of the returned model.
    pub heldout: EvalReport,
}

impl BootstrapReport {
    /// Eval lines for the returned model followed by per-iteration rows.
    pub fn to_tsv(&self) -> String {
        let mut out = self.heldout.to_tsv();
        for r in &self.iterations {
            let i = r.iteration;
            let _ = writeln!(out, "iteration_training_sentences\t{i}\t{}", r.training_sentences);
            let _ = writeln!(out, "iteration_training_tokens\t{i}\t{}", r.training_tokens);
            let _ = writeln!(out, "iteration_promoted\t{i}\t{}", r.promoted);
            let _ = writeln!(out, "iteration_heldout_accuracy\t{i}\t{:.6}", r.heldout_accuracy);
        }
        let _ = writeln!(out, "selected_iteration\tall\t{}", self.selected_iteration);
        let _ = writeln!(out, "stop_reason\tall\t{}", self.stop_reason.as_str());
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "iter  sentences     tokens  promoted  heldout");
        for r in &self.iterations {
            let mark = if r.iteration == self.selected_iteration { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:>4}  {:>9}  {:>9}  {:>8}  {:.4}{mark}",
                r.iteration, r.training_sentences, r.training_tokens, r.promoted, r.heldout_accuracy
            );
        }
        let _ = writeln!(out, "stopped: {}; returned model marked *", self.stop_reason.as_str());
        let _ = writeln!(out);
        out.push_str(&self.heldout.to_text());
        out
    }
}

/// Best-vs-second-best margin confidence of `model` on one sentence.
pub fn sentence_confidence(model: &TrigramModel, sentence: &Sentence<Token>) -> f64 {
    let surfaces: Vec<&str> = sentence.tokens().map(Token::surface).collect();
    model.sentence_confidence(&surfaces)
}

fn heldout_eval(model: &TrigramModel, heldout: &TaggedCorpus) -> Result<EvalReport, BootstrapError> {
    Ok(evaluate(heldout, &tag_corpus(model, heldout))?)
}

/// Runs self-training and returns the model with the best held-out accuracy.
pub fn bootstrap(
    seed: &TaggedCorpus,
    unlabeled: &PlainCorpus,
    heldout: &TaggedCorpus,
    cfg: &BootstrapConfig,
) -> Result<(TrigramModel, BootstrapReport), BootstrapError> {
    cfg.validate()?;
    if seed.is_empty() {
        return Err(BootstrapError::EmptySeed);
    }
    if heldout.is_empty() {
        return Err(BootstrapError::EmptyHeldout);
    }

    let mut training = seed.clone();
    let mut pool: Vec<(usize, &Sentence<Token>)> = unlabeled.sentences.iter().enumerate().collect();
    let mut model = TrigramModel::train(&training, cfg.tagger)?;
    let mut eval = heldout_eval(&model, heldout)?;
    let mut iterations = vec![IterationRecord {
        iteration: 0,
        training_sentences: training.len(),
        training_tokens: training.token_count(),
        promoted: 0,
        heldout_accuracy: eval.accuracy,
    }];
    let mut promoted_log = Vec::new();
    let mut best = (model.clone(), eval.clone(), 0usize);
    let mut stop_reason = StopReason::MaxIterations;

    for iteration in 1..=cfg.max_iterations {
        let scored: Vec<(f64, Vec<SemTag>)> = pool
            .par_iter()
            .map(|(_, s)| {
                let surfaces: Vec<&str> = s.tokens().map(Token::surface).collect();
                (model.sentence_confidence(&surfaces), model.decode(&surfaces))
            })
            .collect();
        let mut picks: Vec<usize> = (0..pool.len())
            .filter(|&i| scored[i].0 >= cfg.confidence_threshold)
            .collect();
        picks.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0).then(pool[a].0.cmp(&pool[b].0)));
        picks.truncate(cfg.promote_cap);
        if picks.is_empty() {
            stop_reason = StopReason::NothingToPromote;
            break;
        }

        let mut batch = Vec::with_capacity(picks.len());
        for &i in &picks {
            let tagged = pool[i].1.with_tags(&scored[i].1).expect("decoder returns one tag per token");
            batch.push(tagged);
        }
        let mut chosen = vec![false; pool.len()];
        picks.iter().for_each(|&i| chosen[i] = true);
        let mut k = 0;
        pool.retain(|_| {
            k += 1;
            !chosen[k - 1]
        });
        training.sentences.extend(batch.iter().cloned());
        promoted_log.push(Corpus::new(batch));

        let prev = eval.accuracy;
        model = TrigramModel::train(&training, cfg.tagger)?;
        eval = heldout_eval(&model, heldout)?;
        iterations.push(IterationRecord {
            iteration,
            training_sentences: training.len(),
            training_tokens: training.token_count(),
            promoted: picks.len(),
            heldout_accuracy: eval.accuracy,
        });
        if eval.accuracy > best.1.accuracy {
            best = (model.clone(), eval.clone(), iteration);
        }
        if eval.accuracy - prev < cfg.stop_delta {
            stop_reason = StopReason::HeldoutGain;
            break;
        }
    }

    let (model, heldout, selected_iteration) = best;
    let report = BootstrapReport {
        iterations,
        selected_iteration,
        stop_reason,
        promoted: promoted_log,
        heldout,
    };
    Ok((model, report))
}
