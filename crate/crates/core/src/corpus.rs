//! Tokens, sentences and corpora, plus the tagged (two-column TSV) and plain
//! (space-separated, one sentence per line) file formats.
//!
//! A multiword token such as `United~States` is a single tagging unit; its
//! parts are joined with [`JOINER`].
//!
//! In the tagged format a line starting with `#` is a comment only when it
//! has no tab, so tokens such as `#hashtag` survive a round trip.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::tagset::SemTag;

pub const JOINER: char = '~';

const SOURCE_HEADER: &str = "# source_id = ";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: unknown sem-tag `{code}`")]
    UnknownTag { line: usize, code: String },
    #[error("line {line}: sentence has no tokens")]
    EmptySentence { line: usize },
    #[error("invalid token `{surface}`: {msg}")]
    InvalidToken { surface: String, msg: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A token: one or more non-empty parts without whitespace or `~`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token {
    surface: String,
}

impl Token {
    pub fn new<S: AsRef<str>>(parts: &[S]) -> Result<Token, CorpusError> {
        if parts.is_empty() {
            return Err(CorpusError::InvalidToken {
                surface: String::new(),
                msg: "token has no parts",
            });
        }
        for p in parts {
            check_part(p.as_ref())?;
        }
        let surface = parts
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<&str>>()
            .join("~");
        Ok(Token { surface })
    }

    /// Parses a serialized surface, splitting multiword parts on `~`.
    pub fn parse(surface: &str) -> Result<Token, CorpusError> {
        if surface.is_empty() {
            return Err(CorpusError::InvalidToken {
                surface: String::new(),
                msg: "empty token",
            });
        }
        for p in surface.split(JOINER) {
            check_part(p).map_err(|_| CorpusError::InvalidToken {
                surface: surface.to_owned(),
                msg: if p.is_empty() {
                    "empty multiword part"
                } else {
                    "token contains whitespace"
                },
            })?;
        }
        Ok(Token {
            surface: surface.to_owned(),
        })
    }

    /// The serialized surface (parts joined by `~`).
    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn parts(&self) -> impl Iterator<Item = &str> {
        self.surface.split(JOINER)
    }

    pub fn num_parts(&self) -> usize {
        self.parts().count()
    }

    pub fn is_multiword(&self) -> bool {
        self.surface.contains(JOINER)
    }

    /// The final part; the unknown-word model reads its characters.
    pub fn last_part(&self) -> &str {
        self.surface.rsplit(JOINER).next().unwrap_or(&self.surface)
    }
}

fn check_part(part: &str) -> Result<(), CorpusError> {
    let bad = |msg| {
        Err(CorpusError::InvalidToken {
            surface: part.to_owned(),
            msg,
        })
    };
    if part.is_empty() {
        return bad("empty token part");
    }
    if part.contains(JOINER) {
        return bad("token part contains the joiner `~`");
    }
    if part.chars().any(char::is_whitespace) {
        return bad("token contains whitespace");
    }
    Ok(())
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: SemTag,
}

impl TaggedToken {
    pub fn new(token: Token, tag: SemTag) -> Self {
        TaggedToken { token, tag }
    }
}

/// Gives uniform access to the token of tagged and untagged items.
pub trait HasToken {
    fn token(&self) -> &Token;
}

impl HasToken for Token {
    fn token(&self) -> &Token {
        self
    }
}

impl HasToken for TaggedToken {
    fn token(&self) -> &Token {
        &self.token
    }
}

/// A non-empty sequence of tokens or tagged tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence<T> {
    items: Vec<T>,
}

impl<T> Sentence<T> {
    /// Returns `None` for an empty item list.
    pub fn new(items: Vec<T>) -> Option<Self> {
        (!items.is_empty()).then_some(Sentence { items })
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }
}

impl<T: HasToken> Sentence<T> {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.items.iter().map(HasToken::token)
    }
}

impl Sentence<TaggedToken> {
    pub fn tags(&self) -> Vec<SemTag> {
        self.items.iter().map(|t| t.tag).collect()
    }

    pub fn to_plain(&self) -> Sentence<Token> {
        Sentence {
            items: self.items.iter().map(|t| t.token.clone()).collect(),
        }
    }
}

impl Sentence<Token> {
    /// Pairs tokens with tags; `None` if the lengths differ.
    pub fn with_tags(&self, tags: &[SemTag]) -> Option<Sentence<TaggedToken>> {
        if tags.len() != self.items.len() {
            return None;
        }
        Some(Sentence {
            items: self
                .items
                .iter()
                .zip(tags)
                .map(|(tok, &tag)| TaggedToken::new(tok.clone(), tag))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Corpus<T> {
    pub sentences: Vec<Sentence<T>>,
    pub source_id: Option<String>,
}

pub type TaggedCorpus = Corpus<TaggedToken>;
pub type PlainCorpus = Corpus<Token>;

impl<T> Default for Corpus<T> {
    fn default() -> Self {
        Corpus {
            sentences: Vec::new(),
            source_id: None,
        }
    }
}

impl<T> Corpus<T> {
    pub fn new(sentences: Vec<Sentence<T>>) -> Self {
        Corpus {
            sentences,
            source_id: None,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }
}

impl TaggedCorpus {
    pub fn to_plain(&self) -> PlainCorpus {
        Corpus {
            sentences: self.sentences.iter().map(Sentence::to_plain).collect(),
            source_id: self.source_id.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Upper-case tag codes before lookup.
    pub upcase_tags: bool,
}

/// Reads a tagged corpus, stopping at the first error.
pub fn read_tagged<R: BufRead>(reader: R) -> Result<TaggedCorpus, CorpusError> {
    read_tagged_with(reader, ReadOptions::default())
}

pub fn read_tagged_with<R: BufRead>(
    reader: R,
    opts: ReadOptions,
) -> Result<TaggedCorpus, CorpusError> {
    let mut errors = Vec::new();
    let corpus = scan_tagged(reader, opts, &mut |e| {
        errors.push(e);
        false
    })?;
    match errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(corpus),
    }
}

/// Parses the whole input and collects up to `limit` diagnostics instead of
/// stopping at the first. I/O errors still abort.
pub fn validate_tagged<R: BufRead>(reader: R, limit: usize) -> Result<Vec<CorpusError>, io::Error> {
    let mut errors = Vec::new();
    let res = scan_tagged(reader, ReadOptions::default(), &mut |e| {
        errors.push(e);
        errors.len() < limit
    });
    match res {
        Ok(_) => Ok(errors),
        Err(CorpusError::Io(e)) => Err(e),
        Err(e) => {
            errors.push(e);
            Ok(errors)
        }
    }
}

// Calls `report` for each record-level error; stops early when it returns false.
fn scan_tagged<R: BufRead>(
    reader: R,
    opts: ReadOptions,
    report: &mut dyn FnMut(CorpusError) -> bool,
) -> Result<TaggedCorpus, CorpusError> {
    let mut corpus = TaggedCorpus::default();
    let mut current: Vec<TaggedToken> = Vec::new();
    // A comment opened the current block but no token followed yet.
    let mut block_start: Option<usize> = None;
    let mut seen_content = false;
    // Some record line (even a malformed one) belongs to the current block.
    let mut block_has_records = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if line.is_empty() {
            if !current.is_empty() {
                corpus
                    .sentences
                    .push(Sentence::new(std::mem::take(&mut current)).unwrap());
            } else if let Some(start) = block_start.filter(|_| !block_has_records) {
                if !report(CorpusError::EmptySentence { line: start }) {
                    return Ok(corpus);
                }
            }
            block_start = None;
            block_has_records = false;
            continue;
        }
        if line.starts_with('#') && !line.contains('\t') {
            if !seen_content && corpus.source_id.is_none() {
                if let Some(id) = line.strip_prefix(SOURCE_HEADER) {
                    corpus.source_id = Some(id.to_owned());
                    seen_content = true;
                    continue;
                }
            }
            seen_content = true;
            if current.is_empty() && block_start.is_none() {
                block_start = Some(lineno);
            }
            continue;
        }
        seen_content = true;
        block_has_records = true;
        if block_start.is_none() && current.is_empty() {
            block_start = Some(lineno);
        }

        match parse_tagged_record(line, lineno, opts) {
            Ok(tok) => current.push(tok),
            Err(e) => {
                if !report(e) {
                    return Ok(corpus);
                }
            }
        }
    }
    if !current.is_empty() {
        corpus.sentences.push(Sentence::new(current).unwrap());
    } else if let Some(start) = block_start.filter(|_| !block_has_records) {
        report(CorpusError::EmptySentence { line: start });
    }
    Ok(corpus)
}

fn parse_tagged_record(
    line: &str,
    lineno: usize,
    opts: ReadOptions,
) -> Result<TaggedToken, CorpusError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 2 {
        return Err(CorpusError::Format {
            line: lineno,
            msg: format!("expected 2 tab-separated columns, found {}", fields.len()),
        });
    }
    let token = Token::parse(fields[0]).map_err(|e| CorpusError::Format {
        line: lineno,
        msg: e.to_string(),
    })?;
    let code = if opts.upcase_tags {
        fields[1].to_ascii_uppercase()
    } else {
        fields[1].to_owned()
    };
    let tag = SemTag::parse(&code).map_err(|_| CorpusError::UnknownTag {
        line: lineno,
        code: fields[1].to_owned(),
    })?;
    Ok(TaggedToken::new(token, tag))
}

pub fn write_tagged_to<W: Write>(corpus: &TaggedCorpus, mut out: W) -> io::Result<()> {
    if let Some(id) = &corpus.source_id {
        writeln!(out, "{SOURCE_HEADER}{id}")?;
        if !corpus.sentences.is_empty() {
            writeln!(out)?;
        }
    }
    for (i, sent) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        for item in sent.items() {
            writeln!(out, "{}\t{}", item.token.surface(), item.tag.code())?;
        }
    }
    Ok(())
}

/// Serializes a tagged corpus; `read_tagged` of the result gives the corpus back.
pub fn write_tagged(corpus: &TaggedCorpus) -> String {
    let mut buf = Vec::new();
    write_tagged_to(corpus, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("corpus text is UTF-8")
}

/// Reads a plain corpus: one sentence per line, tokens separated by single
/// spaces. Blank lines are skipped.
pub fn read_plain<R: BufRead>(reader: R) -> Result<PlainCorpus, CorpusError> {
    let mut corpus = PlainCorpus::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let tokens = line
            .split(' ')
            .map(|s| {
                Token::parse(s).map_err(|e| CorpusError::Format {
                    line: lineno,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        corpus.sentences.push(Sentence::new(tokens).unwrap());
    }
    Ok(corpus)
}

pub fn write_plain_to<W: Write, T: HasToken>(corpus: &Corpus<T>, mut out: W) -> io::Result<()> {
    for sent in &corpus.sentences {
        let line: Vec<&str> = sent.items().iter().map(|t| t.token().surface()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_plain<T: HasToken>(corpus: &Corpus<T>) -> String {
    let mut buf = Vec::new();
    write_plain_to(corpus, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("corpus text is UTF-8")
}
