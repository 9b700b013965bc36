//! Beam Viterbi over second-order states `(t_{i-1}, t_i)`.
//!
//! Path scores accumulate left to right as `score + transition + emission`.
//! Among equally scored paths the decoder prefers lower tagset positions,
//! comparing from the last token backwards. Ties are judged on the running
//! sums, so two paths whose rounded totals coincide but whose partial sums
//! differ in the last bit are not treated as tied.

use std::cmp::Ordering;

use crate::tagset::SemTag;

use super::counts::{State, NUM_STATES};
use super::TrigramModel;

#[derive(Debug, Clone, Copy)]
struct Cell {
    prev: State,
    cur: State,
    score: f64,
    // Index into the previous column.
    back: usize,
}

/// Joint log-score of a tag sequence, summed in decoding order.
pub fn path_score(model: &TrigramModel, surfaces: &[&str], tags: &[SemTag]) -> f64 {
    assert_eq!(surfaces.len(), tags.len());
    let (mut p2, mut p1) = (State::BOS, State::BOS);
    let mut score = 0.0;
    for (surface, &tag) in surfaces.iter().zip(tags) {
        let t = State::from(tag);
        score = score + model.transition_logprob(p2, p1, t) + model.emission_logprob(surface, tag);
        p2 = p1;
        p1 = t;
    }
    score + model.transition_logprob(p2, p1, State::EOS)
}

fn prune(column: &mut Vec<Cell>, beam_width: usize) {
    if beam_width == 0 || column.len() <= beam_width {
        return;
    }
    column.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.cur.cmp(&b.cur))
            .then(a.prev.cmp(&b.prev))
    });
    column.truncate(beam_width);
}

pub(crate) fn decode(model: &TrigramModel, surfaces: &[&str], beam_width: usize) -> Vec<SemTag> {
    if surfaces.is_empty() {
        return Vec::new();
    }
    let mut columns: Vec<Vec<Cell>> = Vec::with_capacity(surfaces.len());
    let start = [Cell {
        prev: State::BOS,
        cur: State::BOS,
        score: 0.0,
        back: 0,
    }];
    // Position of each (prev, cur) pair in the column being built.
    let mut slot = vec![usize::MAX; NUM_STATES * NUM_STATES];

    for surface in surfaces {
        let cands = model.candidates(surface);
        let prev_col: &[Cell] = columns.last().map_or(&start[..], Vec::as_slice);
        let mut col: Vec<Cell> = Vec::new();
        for (pi, pc) in prev_col.iter().enumerate() {
            for &(tag, emit) in &cands {
                let t = State::from(tag);
                let trans = model.transition_logprob(pc.prev, pc.cur, t);
                if trans == f64::NEG_INFINITY {
                    continue;
                }
                let score = pc.score + trans + emit;
                let key = pc.cur.index() * NUM_STATES + t.index();
                match slot[key] {
                    usize::MAX => {
                        slot[key] = col.len();
                        col.push(Cell {
                            prev: pc.cur,
                            cur: t,
                            score,
                            back: pi,
                        });
                    }
                    i => {
                        let cell = &mut col[i];
                        let old_prev = prev_col[cell.back].prev;
                        if score > cell.score || (score == cell.score && pc.prev < old_prev) {
                            cell.score = score;
                            cell.back = pi;
                        }
                    }
                }
            }
        }
        for c in &col {
            slot[c.prev.index() * NUM_STATES + c.cur.index()] = usize::MAX;
        }
        if col.is_empty() {
            return fallback(model, surfaces);
        }
        prune(&mut col, beam_width);
        columns.push(col);
    }

    let last = columns.last().unwrap();
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in last.iter().enumerate() {
        let trans = model.transition_logprob(c.prev, c.cur, State::EOS);
        if trans == f64::NEG_INFINITY {
            continue;
        }
        let total = c.score + trans;
        let better = match best {
            None => true,
            Some((bi, bs)) => {
                let b = &last[bi];
                total > bs || (total == bs && (c.cur, c.prev) < (b.cur, b.prev))
            }
        };
        if better {
            best = Some((i, total));
        }
    }
    let Some((mut idx, _)) = best else {
        return fallback(model, surfaces);
    };

    let mut tags = Vec::with_capacity(surfaces.len());
    for col in columns.iter().rev() {
        let c = &col[idx];
        tags.push(c.cur.as_tag().expect("decoded states are sem-tags"));
        idx = c.back;
    }
    tags.reverse();
    tags
}

/// Used when no complete path has finite score: per-token best emission, else
/// the corpus-wide most frequent tag.
fn fallback(model: &TrigramModel, surfaces: &[&str]) -> Vec<SemTag> {
    surfaces
        .iter()
        .map(|s| {
            let mut best: Option<(SemTag, f64)> = None;
            for (t, e) in model.candidates(s) {
                if e.is_finite() && best.is_none_or(|(bt, be)| e > be || (e == be && t < bt)) {
                    best = Some((t, e));
                }
            }
            best.map_or(model.default_tag(), |(t, _)| t)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathScores {
    pub best: f64,
    pub second: f64,
}

#[derive(Debug, Clone)]
struct Cell2 {
    prev: State,
    cur: State,
    // Up to two best scores of distinct paths reaching this state, descending.
    scores: Vec<f64>,
}

fn push_top2(scores: &mut Vec<f64>, s: f64) {
    scores.push(s);
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    scores.truncate(2);
}

/// Scores of the two best distinct complete paths (`-inf` where absent).
pub(crate) fn two_best(model: &TrigramModel, surfaces: &[&str], beam_width: usize) -> PathScores {
    let none = PathScores {
        best: f64::NEG_INFINITY,
        second: f64::NEG_INFINITY,
    };
    if surfaces.is_empty() {
        return none;
    }
    let mut col = vec![Cell2 {
        prev: State::BOS,
        cur: State::BOS,
        scores: vec![0.0],
    }];
    let mut slot = vec![usize::MAX; NUM_STATES * NUM_STATES];
    for surface in surfaces {
        let cands = model.candidates(surface);
        let mut next: Vec<Cell2> = Vec::new();
        for pc in &col {
            for &(tag, emit) in &cands {
                let t = State::from(tag);
                let trans = model.transition_logprob(pc.prev, pc.cur, t);
                if trans == f64::NEG_INFINITY {
                    continue;
                }
                let key = pc.cur.index() * NUM_STATES + t.index();
                let i = match slot[key] {
                    usize::MAX => {
                        slot[key] = next.len();
                        next.push(Cell2 {
                            prev: pc.cur,
                            cur: t,
                            scores: Vec::with_capacity(3),
                        });
                        next.len() - 1
                    }
                    i => i,
                };
                for &s in &pc.scores {
                    push_top2(&mut next[i].scores, s + trans + emit);
                }
            }
        }
        for c in &next {
            slot[c.prev.index() * NUM_STATES + c.cur.index()] = usize::MAX;
        }
        if next.is_empty() {
            return none;
        }
        if beam_width > 0 && next.len() > beam_width {
            next.sort_by(|a, b| {
                b.scores[0]
                    .partial_cmp(&a.scores[0])
                    .unwrap_or(Ordering::Equal)
                    .then(a.cur.cmp(&b.cur))
                    .then(a.prev.cmp(&b.prev))
            });
            next.truncate(beam_width);
        }
        col = next;
    }
    let mut finals = Vec::with_capacity(3);
    for c in &col {
        let trans = model.transition_logprob(c.prev, c.cur, State::EOS);
        if trans == f64::NEG_INFINITY {
            continue;
        }
        for &s in &c.scores {
            push_top2(&mut finals, s + trans);
        }
    }
    PathScores {
        best: finals.first().copied().unwrap_or(f64::NEG_INFINITY),
        second: finals.get(1).copied().unwrap_or(f64::NEG_INFINITY),
    }
}
