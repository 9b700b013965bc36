//! Sem-tags as lexical-semantic schemas.
//!
//! A [`Registry`] maps (sem-tag, CCG category) pairs to lambda-DRS templates
//! containing a `SYM` placeholder and role slots `R1, R2, ..`.
//! [`SemSchema::instantiate`] fills those in; [`beta_reduce`] composes.

mod category;
mod fol;
mod reduce;
mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::tagset::SemTag;

pub use category::{Atomic, CcgCategory, Slash};
pub use fol::{to_fol, Formula};
pub use reduce::{apply_all, beta_reduce, beta_reduce_with_budget, substitute, DEFAULT_STEP_BUDGET};
pub use term::{app, atom, drs, imp, lam, merge, not, var, Pred, Term};

const BUILTIN_SCHEMAS: &str = include_str!("../../data/schemas.sexp");

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("unknown sem-tag `{0}`")]
    UnknownTag(String),
    #[error("no schema registered for {tag} with category {category}")]
    UnregisteredPair { tag: String, category: String },
    #[error("schema has {expected} role slot(s) but {found} role(s) were supplied")]
    ArityMismatch { expected: usize, found: usize },
    #[error("reduction did not reach a normal form within {budget} steps")]
    NonTerminating { budget: usize },
    #[error("schema file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad category: {0}")]
    Category(String),
    #[error("bad template: {0}")]
    Template(String),
    #[error("bad symbol `{0}`")]
    Symbol(String),
    #[error("not first-order: {0}")]
    NotFirstOrder(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Registered template for one (tag, category) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SemSchema {
    pub tag: SemTag,
    pub category: CcgCategory,
    pub template: Term,
}

impl SemSchema {
    /// Number of distinct role slots in the template.
    pub fn role_slots(&self) -> usize {
        self.template
            .predicates()
            .iter()
            .filter(|p| matches!(p, Pred::Role(_)))
            .count()
    }

    /// Named predicates the template fixes itself (e.g. `for`).
    pub fn constants(&self) -> BTreeSet<String> {
        self.template
            .predicates()
            .into_iter()
            .filter_map(|p| match p {
                Pred::Named(n) => Some(n),
                _ => None,
            })
            .collect()
    }

    /// Replaces `SYM` by `symbol` and `R_i` by `roles[i-1]`.
    pub fn instantiate(&self, symbol: &str, roles: &[&str]) -> Result<Term, SemanticsError> {
        let expected = self.role_slots();
        if roles.len() != expected {
            return Err(SemanticsError::ArityMismatch {
                expected,
                found: roles.len(),
            });
        }
        for s in std::iter::once(&symbol).chain(roles) {
            if !valid_symbol(s) {
                return Err(SemanticsError::Symbol((*s).to_owned()));
            }
        }
        Ok(self.template.map_preds(&|p| match p {
            Pred::Sym => Pred::Named(symbol.to_owned()),
            Pred::Role(i) => Pred::Named(roles[i - 1].to_owned()),
            named => named.clone(),
        }))
    }
}

fn valid_symbol(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '[' | ']' | '|'))
}

/// The continuation closing a sentence: `λe.[ | ]`.
pub fn sentence_continuation() -> Term {
    lam("e", drs(&[], vec![]))
}

#[derive(Debug, Clone, PartialEq)]
enum Pattern {
    Any,
    Cat(CcgCategory),
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: BTreeMap<SemTag, Vec<(Pattern, Term)>>,
}

impl Registry {
    /// The registry shipped with the crate.
    pub fn builtin() -> Registry {
        Registry::parse(BUILTIN_SCHEMAS).expect("built-in schema file is valid")
    }

    pub fn load(path: &Path) -> Result<Registry, SemanticsError> {
        Registry::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Registry, SemanticsError> {
        let mut reg = Registry::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(';').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |msg: String| SemanticsError::Parse { line, msg };
            let (tag, pattern, template) = split_entry(content).map_err(perr)?;
            let tag = SemTag::parse(tag).map_err(|_| perr(format!("unknown sem-tag `{tag}`")))?;
            let pattern = if pattern == "*" {
                Pattern::Any
            } else {
                Pattern::Cat(pattern.parse().map_err(|e: SemanticsError| perr(e.to_string()))?)
            };
            let template = Term::parse_sexp(template).map_err(|e| perr(e.to_string()))?;
            check_template(&pattern, &template).map_err(perr)?;
            let slot = reg.entries.entry(tag).or_default();
            let dup = slot.iter().any(|(p, _)| match (p, &pattern) {
                (Pattern::Any, Pattern::Any) => true,
                (Pattern::Cat(a), Pattern::Cat(b)) => a.matches(b),
                _ => false,
            });
            if dup {
                return Err(perr(format!("duplicate entry for {tag}")));
            }
            slot.push((pattern, template));
        }
        Ok(reg)
    }

    /// The schema for `tag` at `category`. Exact category entries take
    /// precedence over a wildcard entry.
    pub fn schema_for(&self, tag: SemTag, category: &CcgCategory) -> Result<SemSchema, SemanticsError> {
        let unregistered = || SemanticsError::UnregisteredPair {
            tag: tag.code().to_owned(),
            category: category.to_string(),
        };
        let entries = self.entries.get(&tag).ok_or_else(unregistered)?;
        let exact = entries.iter().find_map(|(p, t)| match p {
            Pattern::Cat(c) if c.matches(category) => Some((c.clone(), t)),
            _ => None,
        });
        let found = exact.or_else(|| {
            entries.iter().find_map(|(p, t)| match p {
                Pattern::Any => Some((category.clone(), t)),
                _ => None,
            })
        });
        let (category, template) = found.ok_or_else(unregistered)?;
        Ok(SemSchema {
            tag,
            category,
            template: template.clone(),
        })
    }

    /// [`Registry::schema_for`] on textual tag and category.
    pub fn lookup(&self, tag: &str, category: &str) -> Result<SemSchema, SemanticsError> {
        let tag = SemTag::parse(tag).map_err(|_| SemanticsError::UnknownTag(tag.to_owned()))?;
        self.schema_for(tag, &category.parse()?)
    }

    pub fn tags(&self) -> impl Iterator<Item = SemTag> + '_ {
        self.entries.keys().copied()
    }

    /// Registered categories for `tag`; `None` stands for the wildcard.
    pub fn categories(&self, tag: SemTag) -> Vec<Option<CcgCategory>> {
        self.entries.get(&tag).map_or_else(Vec::new, |es| {
            es.iter()
                .map(|(p, _)| match p {
                    Pattern::Any => None,
                    Pattern::Cat(c) => Some(c.clone()),
                })
                .collect()
        })
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn split_entry(content: &str) -> Result<(&str, &str, &str), String> {
    let inner = content
        .strip_prefix('(')
        .and_then(|c| c.strip_suffix(')'))
        .ok_or("entry must be wrapped in parentheses")?
        .trim_start();
    let tag_end = inner.find(char::is_whitespace).ok_or("missing category")?;
    let (tag, rest) = inner.split_at(tag_end);
    let rest = rest.trim_start();
    let mut depth = 0i32;
    let mut cat_end = None;
    for (i, c) in rest.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                cat_end = Some(i);
                break;
            }
            _ => {}
        }
    }
    let cat_end = cat_end.ok_or("missing template")?;
    let (cat, template) = rest.split_at(cat_end);
    Ok((tag, cat, template.trim()))
}

fn check_template(pattern: &Pattern, template: &Term) -> Result<(), String> {
    let free = template.free_vars();
    if !free.is_empty() {
        let names: Vec<_> = free.into_iter().collect();
        return Err(format!("template has free variables: {}", names.join(", ")));
    }
    let slots: BTreeSet<usize> = template
        .predicates()
        .into_iter()
        .filter_map(|p| match p {
            Pred::Role(i) => Some(i),
            _ => None,
        })
        .collect();
    if slots.iter().copied().ne(1..=slots.len()) {
        return Err("role slots must be numbered R1..Rk without gaps".into());
    }
    if let Pattern::Cat(cat) = pattern {
        let labels: BTreeSet<String> = cat.roles().into_iter().map(str::to_owned).collect();
        let used: BTreeSet<String> = slots.iter().map(|i| format!("R{i}")).collect();
        if !labels.is_empty() && labels != used {
            return Err("category role labels do not match the template's role slots".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Registry {
        Registry::builtin()
    }

    fn schema(tag: &str, cat: &str) -> SemSchema {
        reg().lookup(tag, cat).unwrap()
    }

    #[test]
    fn exs_rows() {
        let t = schema("EXS", "S\\NP").instantiate("walk", &["Agent"]).unwrap();
        assert_eq!(t.to_string(), "λP.λr.P(λx.[e | walk(e), Agent(e,x)];r(e))");
        let t = schema("EXS", "(S\\NP)/NP").instantiate("eat", &["Agent", "Patient"]).unwrap();
        assert_eq!(
            t.to_string(),
            "λQ.λP.λr.P(λx.Q(λy.[e | eat(e), Agent(e,x), Patient(e,y)];r(e)))"
        );
    }

    #[test]
    fn arity_checked() {
        let s = schema("EXS", "S\\NP");
        assert!(matches!(
            s.instantiate("walk", &["Agent", "Patient"]),
            Err(SemanticsError::ArityMismatch { expected: 1, found: 2 })
        ));
        assert_eq!(schema("CON", "N").instantiate("dog", &[]).unwrap().to_string(), "λx.dog(x)");
    }

    #[test]
    fn lookup_errors() {
        assert!(matches!(reg().lookup("ZZZ", "N"), Err(SemanticsError::UnknownTag(_))));
        assert!(matches!(reg().lookup("CON", "S\\NP"), Err(SemanticsError::UnregisteredPair { .. })));
        assert!(matches!(reg().lookup("ENS", "S\\NP"), Err(SemanticsError::UnregisteredPair { .. })));
        // the wildcard entry answers any category
        assert_eq!(schema("NIL", "(S\\NP)/NP").category.to_string(), "(S\\NP)/NP");
    }

    #[test]
    fn registry_coverage() {
        let r = reg();
        let tags: Vec<_> = r.tags().map(|t| t.code()).collect();
        for t in ["EXS", "CON", "IST", "AND", "DIS", "NOT", "NIL", "REL"] {
            assert!(tags.contains(&t), "{t}");
        }
        assert_eq!(r.len(), 11);
    }

    fn det_man_walks(det: &str) -> Term {
        let r = reg();
        let d = r.lookup(det, "NP/N").unwrap().instantiate(det, &[]).unwrap();
        let man = r.lookup("CON", "N").unwrap().instantiate("man", &[]).unwrap();
        let walks = r.lookup("EXS", "S\\NP").unwrap().instantiate("walk", &["Agent"]).unwrap();
        let np = apply_all(&d, &[man]).unwrap();
        apply_all(&walks, &[np, sentence_continuation()]).unwrap()
    }

    #[test]
    fn quantified_compositions() {
        let every = det_man_walks("AND");
        assert_eq!(every.to_string(), "[ | [x | man(x)] ⇒ [e | walk(e), Agent(e,x)]]");
        assert_eq!(to_fol(&every).unwrap().to_string(), "∀x(man(x) → ∃e(walk(e) ∧ Agent(e,x)))");
        let no = det_man_walks("NOT");
        assert_eq!(to_fol(&no).unwrap().to_string(), "¬∃x(man(x) ∧ ∃e(walk(e) ∧ Agent(e,x)))");
        let some = det_man_walks("DIS");
        assert_eq!(to_fol(&some).unwrap().to_string(), "∃x(man(x) ∧ ∃e(walk(e) ∧ Agent(e,x)))");
        for t in [&every, &no, &some] {
            assert!(t.free_vars().is_empty());
            assert_eq!(&beta_reduce(t).unwrap(), t);
        }
    }

    #[test]
    fn nil_is_identity() {
        let id = schema("NIL", "N").instantiate("nil", &[]).unwrap();
        let dog = schema("CON", "N").instantiate("dog", &[]).unwrap();
        assert_eq!(apply_all(&id, &[dog.clone()]).unwrap(), dog);
    }

    #[test]
    fn modifiers_and_relations() {
        let man = schema("CON", "N").instantiate("man", &[]).unwrap();
        let tall = schema("IST", "N/N").instantiate("tall", &[]).unwrap();
        assert_eq!(apply_all(&tall, &[man.clone()]).unwrap().to_string(), "λx.[ | tall(x), man(x)]");
        let beer = schema("CON", "N/N").instantiate("beer", &[]).unwrap();
        let nn = apply_all(&beer, &[man]).unwrap();
        assert_eq!(nn.to_string(), "λx.[y | beer(x), man(y), for(y,x)]");
        assert!(nn.free_vars().is_empty());
        let at = schema("REL", "PP/NP").instantiate("at", &[]).unwrap();
        let r = apply_all(&at, &[var("fenway"), var("m")]).unwrap();
        assert_eq!(r.to_string(), "at(m,fenway)");
    }

    #[test]
    fn reduction_invariant_under_renaming() {
        let walks = schema("EXS", "S\\NP").instantiate("walk", &["Agent"]).unwrap();
        let renamed = Term::parse_sexp(
            "(lam NP k (app NP (lam z (merge (box (v) (pred walk v) (pred Agent v z)) (app k v)))))",
        )
        .unwrap();
        assert!(walks.alpha_eq(&renamed));
        let every = reg().lookup("AND", "NP/N").unwrap().instantiate("every", &[]).unwrap();
        let man = schema("CON", "N").instantiate("man", &[]).unwrap();
        let np = apply_all(&every, &[man]).unwrap();
        let a = apply_all(&walks, &[np.clone(), sentence_continuation()]).unwrap();
        let b = apply_all(&renamed, &[np, sentence_continuation()]).unwrap();
        assert!(a.alpha_eq(&b), "{a} vs {b}");
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            "(CON N (lam x (sym y)))",
            "(ZZZ N (lam x (sym x)))",
            "(CON Q (lam x (sym x)))",
            "(CON N (lam x (sym x)))\n(CON N (lam y (sym y)))",
            "(EXS S\\NP:R1 (lam x (role R2 x x)))",
            "(EXS S\\NP:R2 (lam x (role R1 x x)))",
            "CON N (lam x (sym x))",
            "(CON N)",
        ] {
            assert!(Registry::parse(bad).is_err(), "{bad}");
        }
    }
}
