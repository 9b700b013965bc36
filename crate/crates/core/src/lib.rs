//! Universal semantic tagging toolkit.
//!
//! * [`tagset`]: the 73 sem-tags of tagset v0.7 under 13 meta-tags.
//! * [`corpus`]: tokens (including `~`-joined multiword tokens), sentences
//!   and the tagged/plain corpus formats.
//! * [`tagger`]: most-frequent-tag baseline and trigram HMM tagger.
//! * [`eval`]: accuracy, per-tag scores, confusion counts, comparisons.
//! * [`semantics`]: sem-tag to lambda-DRS schema registry and beta reduction.
//! * [`bootstrap`]: self-training on unlabeled text.

pub mod bootstrap;
pub mod corpus;
pub mod eval;
pub mod semantics;
pub mod tagger;
pub mod tagset;
