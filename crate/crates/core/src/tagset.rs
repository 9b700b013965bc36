//! The universal semantic tagset, version 0.7.
//!
//! The table is compiled in from `data/tagset-v0.7.tsv` and validated on first
//! use. [`SemTag`] and [`MetaTag`] are small copyable indices into that table;
//! their `Ord` follows table order, which the taggers use for tie-breaking.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use thiserror::Error;

pub const TAGSET_VERSION: &str = "0.7";
pub const NUM_SEM_TAGS: usize = 73;
pub const NUM_META_TAGS: usize = 13;

const TAGSET_TSV: &str = include_str!("../data/tagset-v0.7.tsv");

/// Meta-tags with their class names, in table order.
const META_TAGS: [(&str, &str); NUM_META_TAGS] = [
    ("ANA", "anaphoric"),
    ("ACT", "speech act"),
    ("ATT", "attribute"),
    ("COM", "comparative"),
    ("UNE", "unnamed entity"),
    ("DXS", "deixis"),
    ("LOG", "logical"),
    ("MOD", "modality"),
    ("DSC", "discourse"),
    ("NAM", "named entity"),
    ("EVE", "events"),
    ("TNS", "tense & aspect"),
    ("TIM", "temporal entity"),
];

/// Codes asterisked as new in v0.7 relative to v0.6.
const NEW_IN_V07: [&str; 15] = [
    "QUC", "QUV", "COL", "DEG", "GRP", "DXP", "DXT", "DXD", "GPO", "CTC", "LIT", "NTH", "DAT",
    "PRG", "PFT",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagsetError {
    #[error("unknown sem-tag `{0}`")]
    UnknownTag(String),
    #[error("unknown meta-tag `{0}`")]
    UnknownMetaTag(String),
    #[error("tagset line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("tagset invalid: {0}")]
    Invalid(String),
}

/// One row of a declarative tagset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagRecord {
    pub code: String,
    pub meta: String,
    pub gloss: String,
    pub examples: Vec<String>,
}

/// Parses the declarative tagset format: `code<TAB>meta<TAB>gloss<TAB>ex1|ex2|...`,
/// `#` comment lines and blank lines skipped.
pub fn parse_tagset_file(text: &str) -> Result<Vec<TagRecord>, TagsetError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(TagsetError::Format {
                line,
                msg: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let code = fields[0];
        if !is_tag_code(code) {
            return Err(TagsetError::Format {
                line,
                msg: format!("`{code}` is not a 3-character uppercase code"),
            });
        }
        if !is_tag_code(fields[1]) {
            return Err(TagsetError::Format {
                line,
                msg: format!("`{}` is not a 3-character uppercase meta code", fields[1]),
            });
        }
        let examples = if fields[3].is_empty() {
            Vec::new()
        } else {
            fields[3].split('|').map(str::to_owned).collect()
        };
        records.push(TagRecord {
            code: code.to_owned(),
            meta: fields[1].to_owned(),
            gloss: fields[2].to_owned(),
            examples,
        });
    }
    Ok(records)
}

fn is_tag_code(code: &str) -> bool {
    code.len() == 3
        && code
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
}

/// Checks that records form a valid v0.7 tagset: 73 distinct codes, each under
/// one of the 13 known meta-tags, every meta-tag non-empty, rows grouped so that
/// meta-tags appear contiguously in canonical order.
pub fn validate_records(records: &[TagRecord]) -> Result<(), TagsetError> {
    if records.len() != NUM_SEM_TAGS {
        return Err(TagsetError::Invalid(format!(
            "expected {NUM_SEM_TAGS} sem-tags, found {}",
            records.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut last_meta = 0usize;
    let mut members = [0usize; NUM_META_TAGS];
    for r in records {
        if !seen.insert(r.code.as_str()) {
            return Err(TagsetError::Invalid(format!("duplicate code {}", r.code)));
        }
        let m = META_TAGS
            .iter()
            .position(|(c, _)| *c == r.meta)
            .ok_or_else(|| TagsetError::UnknownMetaTag(r.meta.clone()))?;
        if m < last_meta {
            return Err(TagsetError::Invalid(format!(
                "{} listed under {} after a later meta-tag",
                r.code, r.meta
            )));
        }
        last_meta = m;
        members[m] += 1;
    }
    if let Some(m) = members.iter().position(|&n| n == 0) {
        return Err(TagsetError::Invalid(format!(
            "meta-tag {} has no members",
            META_TAGS[m].0
        )));
    }
    Ok(())
}

struct TagInfo {
    code: String,
    gloss: String,
    examples: Vec<String>,
    meta: MetaTag,
}

struct Tagset {
    tags: Vec<TagInfo>,
    members: Vec<Vec<SemTag>>,
}

static TAGSET: LazyLock<Tagset> = LazyLock::new(|| {
    let records = parse_tagset_file(TAGSET_TSV).expect("built-in tagset parses");
    validate_records(&records).expect("built-in tagset is valid");
    let mut members = vec![Vec::new(); NUM_META_TAGS];
    let tags = records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let m = META_TAGS.iter().position(|(c, _)| *c == r.meta).unwrap();
            members[m].push(SemTag(i as u8));
            TagInfo {
                code: r.code,
                gloss: r.gloss,
                examples: r.examples,
                meta: MetaTag(m as u8),
            }
        })
        .collect();
    Tagset { tags, members }
});

/// A sem-tag. Cheap to copy; ordered by position in the tagset table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemTag(u8);

impl SemTag {
    /// Looks up a tag by its exact (case-sensitive) code.
    pub fn parse(code: &str) -> Result<SemTag, TagsetError> {
        TAGSET
            .tags
            .iter()
            .position(|t| t.code == code)
            .map(|i| SemTag(i as u8))
            .ok_or_else(|| TagsetError::UnknownTag(code.to_owned()))
    }

    /// Position in [`all_tags`].
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Option<SemTag> {
        (index < NUM_SEM_TAGS).then_some(SemTag(index as u8))
    }

    pub fn code(self) -> &'static str {
        &TAGSET.tags[self.index()].code
    }

    pub fn gloss(self) -> &'static str {
        &TAGSET.tags[self.index()].gloss
    }

    pub fn examples(self) -> &'static [String] {
        &TAGSET.tags[self.index()].examples
    }

    pub fn meta(self) -> MetaTag {
        TAGSET.tags[self.index()].meta
    }

    /// Whether the tag is marked as new in v0.7.
    pub fn is_new_in_v07(self) -> bool {
        NEW_IN_V07.contains(&self.code())
    }
}

impl fmt::Display for SemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for SemTag {
    type Err = TagsetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemTag::parse(s)
    }
}

/// One of the 13 coarse semantic classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaTag(u8);

impl MetaTag {
    pub fn parse(code: &str) -> Result<MetaTag, TagsetError> {
        META_TAGS
            .iter()
            .position(|(c, _)| *c == code)
            .map(|i| MetaTag(i as u8))
            .ok_or_else(|| TagsetError::UnknownMetaTag(code.to_owned()))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn code(self) -> &'static str {
        META_TAGS[self.index()].0
    }

    pub fn gloss(self) -> &'static str {
        META_TAGS[self.index()].1
    }

    /// Member sem-tags in table order.
    pub fn members(self) -> &'static [SemTag] {
        &TAGSET.members[self.index()]
    }
}

impl fmt::Display for MetaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

pub fn parse_tag(code: &str) -> Result<SemTag, TagsetError> {
    SemTag::parse(code)
}

pub fn meta_of(tag: SemTag) -> MetaTag {
    tag.meta()
}

/// All 73 sem-tags, meta-tags in table order and rows in table order within each.
pub fn all_tags() -> impl ExactSizeIterator<Item = SemTag> + Clone {
    (0..NUM_SEM_TAGS).map(|i| SemTag(i as u8))
}

pub fn all_meta_tags() -> impl ExactSizeIterator<Item = MetaTag> + Clone {
    (0..NUM_META_TAGS).map(|i| MetaTag(i as u8))
}

/// Renders the compiled-in tagset back into the declarative file format.
pub fn dump_tsv() -> String {
    let mut out = String::new();
    out.push_str(&format!("# Universal semantic tagset, version {TAGSET_VERSION}\n"));
    for t in all_tags() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            t.code(),
            t.meta().code(),
            t.gloss(),
            t.examples().join("|")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_examples() {
        let exs = parse_tag("EXS").unwrap();
        assert_eq!(exs.meta().code(), "EVE");
        assert_eq!(exs.gloss(), "untensed simple");
        let nil = parse_tag("NIL").unwrap();
        assert_eq!(nil.meta().code(), "LOG");
        assert_eq!(nil.gloss(), "empty semantics");
        assert_eq!(
            parse_tag("XYZ"),
            Err(TagsetError::UnknownTag("XYZ".to_owned()))
        );
        assert_eq!(meta_of(parse_tag("QUC").unwrap()).code(), "ATT");
        assert_eq!(meta_of(parse_tag("PER").unwrap()).code(), "NAM");
    }

    #[test]
    fn case_sensitive() {
        assert!(parse_tag("exs").is_err());
        assert!(parse_tag("Exs").is_err());
    }

    #[test]
    fn order_and_counts() {
        let tags: Vec<_> = all_tags().collect();
        assert_eq!(tags.len(), 73);
        assert_eq!(tags[0].code(), "PRO");
        assert_eq!(tags[72].code(), "CLO");
        assert_eq!(all_meta_tags().count(), 13);
        let metas: Vec<_> = all_meta_tags().map(MetaTag::code).collect();
        assert_eq!(
            metas,
            ["ANA", "ACT", "ATT", "COM", "UNE", "DXS", "LOG", "MOD", "DSC", "NAM", "EVE", "TNS", "TIM"]
        );
    }

    #[test]
    fn partition() {
        let mut all: Vec<SemTag> = all_meta_tags()
            .flat_map(|m| m.members().iter().copied())
            .collect();
        assert_eq!(all.len(), 73);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 73);
        for m in all_meta_tags() {
            assert!(!m.members().is_empty());
            assert!(m.members().iter().all(|t| t.meta() == m));
        }
    }

    #[test]
    fn round_trip_every_code() {
        for t in all_tags() {
            assert_eq!(parse_tag(t.code()).unwrap(), t);
            assert!(is_tag_code(t.code()));
        }
    }

    #[test]
    fn new_tags_are_members() {
        let n = all_tags().filter(|t| t.is_new_in_v07()).count();
        assert_eq!(n, NEW_IN_V07.len());
    }

    #[test]
    fn dump_reparses() {
        let records = parse_tagset_file(&dump_tsv()).unwrap();
        validate_records(&records).unwrap();
        assert_eq!(records[3].examples, ["herself", "each~other"]);
    }

    #[test]
    fn rejects_bad_files() {
        let err = parse_tagset_file("PRO\tANA\tpronoun\n").unwrap_err();
        assert!(matches!(err, TagsetError::Format { line: 1, .. }));
        let err = parse_tagset_file("pro\tANA\tx\ty\n").unwrap_err();
        assert!(matches!(err, TagsetError::Format { .. }));
        let mut records = parse_tagset_file(TAGSET_TSV).unwrap();
        records.pop();
        assert!(validate_records(&records).is_err());
        let mut records = parse_tagset_file(TAGSET_TSV).unwrap();
        records[1].code = "PRO".into();
        assert!(validate_records(&records).is_err());
    }
}
