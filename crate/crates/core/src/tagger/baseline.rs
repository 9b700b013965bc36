use std::collections::BTreeMap;

use crate::corpus::TaggedCorpus;
use crate::tagset::SemTag;

use super::counts::NgramCounts;
use super::{SequenceTagger, TaggerError};

/// Context-free tagger: each known surface gets its most frequent training
/// tag, anything else the corpus-wide most frequent tag. Ties go to the
/// earlier tag in tagset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineModel {
    pub best_tag: BTreeMap<String, SemTag>,
    pub global_default: SemTag,
}

fn argmax(tags: &[(SemTag, u64)]) -> SemTag {
    // `tags` is in tagset order, so the first maximum wins.
    let mut best = tags[0];
    for &(t, n) in &tags[1..] {
        if n > best.1 {
            best = (t, n);
        }
    }
    best.0
}

impl BaselineModel {
    pub fn train(corpus: &TaggedCorpus) -> Result<BaselineModel, TaggerError> {
        let counts = NgramCounts::collect(corpus)?;
        Ok(Self::from_counts(&counts))
    }

    pub fn from_counts(counts: &NgramCounts) -> BaselineModel {
        let best_tag = counts
            .lexicon()
            .map(|(w, tags)| (w.to_owned(), argmax(tags)))
            .collect();
        BaselineModel {
            best_tag,
            global_default: counts
                .most_frequent_tag()
                .expect("non-empty counts have a most frequent tag"),
        }
    }

    pub fn lookup(&self, surface: &str) -> SemTag {
        self.best_tag
            .get(surface)
            .copied()
            .unwrap_or(self.global_default)
    }
}

impl SequenceTagger for BaselineModel {
    fn tag_surfaces(&self, surfaces: &[&str]) -> Vec<SemTag> {
        surfaces.iter().map(|s| self.lookup(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_tagged;

    fn tag(code: &str) -> SemTag {
        SemTag::parse(code).unwrap()
    }

    fn train(text: &str) -> BaselineModel {
        BaselineModel::train(&read_tagged(text.as_bytes()).unwrap()).unwrap()
    }

    #[test]
    fn tie_goes_to_tagset_order() {
        // DIS precedes AND within the logical class.
        assert!(tag("DIS") < tag("AND"));
        let m = train("any\tAND\n\nany\tDIS\n");
        assert_eq!(m.lookup("any"), tag("DIS"));
    }

    #[test]
    fn strict_majority() {
        let m = train("any\tDIS\n\nany\tDIS\n\nany\tDIS\n\nany\tAND\n");
        assert_eq!(m.lookup("any"), tag("DIS"));
    }

    #[test]
    fn lookup_and_fallback() {
        let m = train("a\tDIS\nb\tCON\nc\tCON\n");
        assert_eq!(m.tag_surfaces(&["a", "b"]), vec![tag("DIS"), tag("CON")]);
        assert_eq!(m.global_default, tag("CON"));
        assert_eq!(m.tag_surfaces(&["x", "y"]), vec![tag("CON"), tag("CON")]);
    }

    #[test]
    fn context_free() {
        let m = train("a\tDIS\nb\tCON\nc\tNIL\n");
        let fwd = m.tag_surfaces(&["a", "b", "c", "zz"]);
        let mut rev = m.tag_surfaces(&["zz", "c", "b", "a"]);
        rev.reverse();
        assert_eq!(fwd, rev);
    }
}
