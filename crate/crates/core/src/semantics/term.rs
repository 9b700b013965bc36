//! Lambda-DRS terms.
//!
//! Binding: `λv.t` binds `v` in `t`; a box `[refs | conds]` binds its
//! referents in its conditions; in `K1;K2` and `K1 ⇒ K2` the referents
//! declared by `K1` also bind into `K2`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::SemanticsError;

/// The predicate of an atomic condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    /// Placeholder for the token's symbol (usually its lemma).
    Sym,
    /// Placeholder for the n-th thematic role, 1-based.
    Role(usize),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lam(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    Drs { refs: Vec<String>, conds: Vec<Term> },
    Merge(Box<Term>, Box<Term>),
    Atom(Pred, Vec<Term>),
    Not(Box<Term>),
    Imp(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
}

pub fn var(name: &str) -> Term {
    Term::Var(name.to_owned())
}

pub fn lam(v: &str, body: Term) -> Term {
    Term::Lam(v.to_owned(), Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn drs(refs: &[&str], conds: Vec<Term>) -> Term {
    Term::Drs {
        refs: refs.iter().map(|r| (*r).to_owned()).collect(),
        conds,
    }
}

pub fn merge(a: Term, b: Term) -> Term {
    Term::Merge(Box::new(a), Box::new(b))
}

pub fn atom(name: &str, args: &[&str]) -> Term {
    Term::Atom(Pred::Named(name.to_owned()), args.iter().map(|a| var(a)).collect())
}

pub fn not(t: Term) -> Term {
    Term::Not(Box::new(t))
}

pub fn imp(a: Term, b: Term) -> Term {
    Term::Imp(Box::new(a), Box::new(b))
}

impl Term {
    /// Referents that `self` makes available to a following `;` or `⇒` operand.
    pub fn declared(&self) -> BTreeSet<String> {
        match self {
            Term::Drs { refs, .. } => refs.iter().cloned().collect(),
            Term::Merge(a, b) => {
                let mut d = a.declared();
                d.extend(b.declared());
                d
            }
            _ => BTreeSet::new(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Term::Lam(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Drs { refs, conds } => {
                let n = bound.len();
                bound.extend(refs.iter().cloned());
                for c in conds {
                    c.collect_free(bound, out);
                }
                bound.truncate(n);
            }
            Term::Merge(a, b) | Term::Imp(a, b) => {
                a.collect_free(bound, out);
                let n = bound.len();
                bound.extend(a.declared());
                b.collect_free(bound, out);
                bound.truncate(n);
            }
            Term::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Atom(_, args) => {
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            Term::Not(t) => t.collect_free(bound, out),
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Lam(v, b) => {
                out.insert(v.clone());
                b.all_names(out);
            }
            Term::Drs { refs, conds } => {
                out.extend(refs.iter().cloned());
                conds.iter().for_each(|c| c.all_names(out));
            }
            Term::App(a, b) | Term::Merge(a, b) | Term::Imp(a, b) | Term::Or(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::Atom(_, args) => args.iter().for_each(|a| a.all_names(out)),
            Term::Not(t) => t.all_names(out),
        }
    }

    /// Predicate names of atomic conditions.
    pub fn predicates(&self) -> BTreeSet<Pred> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Atom(p, _) = t {
                out.insert(p.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Var(_) => {}
            Term::Lam(_, b) | Term::Not(b) => b.visit(f),
            Term::Drs { conds, .. } => conds.iter().for_each(|c| c.visit(f)),
            Term::App(a, b) | Term::Merge(a, b) | Term::Imp(a, b) | Term::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Atom(_, args) => args.iter().for_each(|a| a.visit(f)),
        }
    }

    /// Rewrites every predicate with `f`.
    pub fn map_preds(&self, f: &dyn Fn(&Pred) -> Pred) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Lam(v, b) => Term::Lam(v.clone(), Box::new(b.map_preds(f))),
            Term::App(a, b) => Term::App(Box::new(a.map_preds(f)), Box::new(b.map_preds(f))),
            Term::Drs { refs, conds } => Term::Drs {
                refs: refs.clone(),
                conds: conds.iter().map(|c| c.map_preds(f)).collect(),
            },
            Term::Merge(a, b) => Term::Merge(Box::new(a.map_preds(f)), Box::new(b.map_preds(f))),
            Term::Imp(a, b) => Term::Imp(Box::new(a.map_preds(f)), Box::new(b.map_preds(f))),
            Term::Or(a, b) => Term::Or(Box::new(a.map_preds(f)), Box::new(b.map_preds(f))),
            Term::Atom(p, args) => Term::Atom(f(p), args.iter().map(|a| a.map_preds(f)).collect()),
            Term::Not(t) => Term::Not(Box::new(t.map_preds(f))),
        }
    }

    /// The term with bound variables renamed canonically; two terms are
    /// alpha-equivalent iff their canonical forms are equal.
    pub fn canonical(&self) -> Term {
        let mut next = 0usize;
        canon(self, &HashMap::new(), &mut next).0
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.canonical() == other.canonical()
    }

    fn prec(&self) -> u8 {
        match self {
            Term::Lam(..) => 0,
            Term::Imp(..) | Term::Or(..) => 1,
            Term::Merge(..) => 2,
            _ => 3,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.fmt_prec(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Lam(v, b) => {
                write!(f, "λ{v}.")?;
                b.fmt_prec(f, 0)
            }
            Term::App(fun, a) => {
                fun.fmt_prec(f, 3)?;
                f.write_str("(")?;
                a.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Term::Drs { refs, conds } => {
                write!(f, "[{} | ", refs.join(","))?;
                for (i, c) in conds.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    c.fmt_prec(f, 1)?;
                }
                f.write_str("]")
            }
            Term::Merge(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(";")?;
                b.fmt_prec(f, 3)
            }
            Term::Atom(p, args) => {
                write!(f, "{p}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")
            }
            Term::Not(t) => {
                f.write_str("¬")?;
                t.fmt_prec(f, 3)
            }
            Term::Imp(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" ⇒ ")?;
                b.fmt_prec(f, 2)
            }
            Term::Or(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" ∨ ")?;
                b.fmt_prec(f, 2)
            }
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Sym => f.write_str("SYM"),
            Pred::Role(i) => write!(f, "R{i}"),
            Pred::Named(n) => f.write_str(n),
        }
    }
}

/// Linear boxed-DRS notation, e.g. `λP.λr.P(λx.[e | walk(e), Agent(e,x)];r(e))`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

type Env = HashMap<String, String>;

fn fresh_canon(next: &mut usize) -> String {
    let n = format!("%{next}");
    *next += 1;
    n
}

// Returns the renamed term and the renaming of the referents it declares.
fn canon(t: &Term, env: &Env, next: &mut usize) -> (Term, Vec<(String, String)>) {
    match t {
        Term::Var(v) => (Term::Var(env.get(v).cloned().unwrap_or_else(|| v.clone())), vec![]),
        Term::Lam(v, b) => {
            let n = fresh_canon(next);
            let mut env2 = env.clone();
            env2.insert(v.clone(), n.clone());
            (Term::Lam(n, Box::new(canon(b, &env2, next).0)), vec![])
        }
        Term::App(a, b) => (
            Term::App(Box::new(canon(a, env, next).0), Box::new(canon(b, env, next).0)),
            vec![],
        ),
        Term::Drs { refs, conds } => {
            let mut env2 = env.clone();
            let mut exported = Vec::new();
            let new_refs = refs
                .iter()
                .map(|r| {
                    let n = fresh_canon(next);
                    env2.insert(r.clone(), n.clone());
                    exported.push((r.clone(), n.clone()));
                    n
                })
                .collect();
            let conds = conds.iter().map(|c| canon(c, &env2, next).0).collect();
            (Term::Drs { refs: new_refs, conds }, exported)
        }
        Term::Merge(a, b) | Term::Imp(a, b) => {
            let (a2, ea) = canon(a, env, next);
            let mut env2 = env.clone();
            env2.extend(ea.iter().cloned());
            let (b2, eb) = canon(b, &env2, next);
            if matches!(t, Term::Merge(..)) {
                let mut e = ea;
                e.extend(eb);
                (Term::Merge(Box::new(a2), Box::new(b2)), e)
            } else {
                (Term::Imp(Box::new(a2), Box::new(b2)), vec![])
            }
        }
        Term::Or(a, b) => (
            Term::Or(Box::new(canon(a, env, next).0), Box::new(canon(b, env, next).0)),
            vec![],
        ),
        Term::Atom(p, args) => (
            Term::Atom(p.clone(), args.iter().map(|a| canon(a, env, next).0).collect()),
            vec![],
        ),
        Term::Not(x) => (Term::Not(Box::new(canon(x, env, next).0)), vec![]),
    }
}

// ---- s-expression reader ----

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Sym(String),
    List(Vec<Sexp>),
}

fn tokenize(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in src.chars() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp, String> {
    match tokens.get(*pos).map(String::as_str) {
        None => Err("unexpected end of template".into()),
        Some(")") => Err("unexpected `)`".into()),
        Some("(") => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err("unclosed `(`".into()),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    _ => items.push(read_sexp(tokens, pos)?),
                }
            }
        }
        Some(s) => {
            *pos += 1;
            Ok(Sexp::Sym(s.to_owned()))
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_alphabetic())
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn role_index(s: &str) -> Option<usize> {
    s.strip_prefix('R')?.parse().ok().filter(|&i| i > 0)
}

fn to_term(s: &Sexp) -> Result<Term, String> {
    let items = match s {
        Sexp::Sym(v) if is_ident(v) => return Ok(Term::Var(v.clone())),
        Sexp::Sym(v) => return Err(format!("`{v}` is not a variable name")),
        Sexp::List(items) => items,
    };
    let (head, rest) = match items.split_first() {
        Some((Sexp::Sym(h), rest)) => (h.as_str(), rest),
        _ => return Err("expected an operator".into()),
    };
    let terms = |xs: &[Sexp]| xs.iter().map(to_term).collect::<Result<Vec<_>, _>>();
    let arity = |n: usize| {
        if rest.len() == n {
            Ok(())
        } else {
            Err(format!("`{head}` takes {n} operands, got {}", rest.len()))
        }
    };
    let name = |x: &Sexp| match x {
        Sexp::Sym(v) if is_ident(v) => Ok(v.clone()),
        _ => Err(format!("`{head}` expects variable names")),
    };
    match head {
        "lam" => {
            if rest.len() < 2 {
                return Err("`lam` needs a variable and a body".into());
            }
            let (body, vars) = rest.split_last().unwrap();
            let mut t = to_term(body)?;
            for v in vars.iter().rev() {
                t = Term::Lam(name(v)?, Box::new(t));
            }
            Ok(t)
        }
        "app" => {
            if rest.len() < 2 {
                return Err("`app` needs a function and an argument".into());
            }
            let mut ts = terms(rest)?.into_iter();
            let first = ts.next().unwrap();
            Ok(ts.fold(first, |f, a| Term::App(Box::new(f), Box::new(a))))
        }
        "box" => {
            let Some((Sexp::List(refs), conds)) = rest.split_first() else {
                return Err("`box` needs a referent list".into());
            };
            Ok(Term::Drs {
                refs: refs.iter().map(name).collect::<Result<_, _>>()?,
                conds: terms(conds)?,
            })
        }
        "merge" => {
            if rest.len() < 2 {
                return Err("`merge` needs at least two operands".into());
            }
            let mut ts = terms(rest)?.into_iter();
            let first = ts.next().unwrap();
            Ok(ts.fold(first, |a, b| Term::Merge(Box::new(a), Box::new(b))))
        }
        "not" => {
            arity(1)?;
            Ok(Term::Not(Box::new(to_term(&rest[0])?)))
        }
        "imp" => {
            arity(2)?;
            Ok(Term::Imp(Box::new(to_term(&rest[0])?), Box::new(to_term(&rest[1])?)))
        }
        "or" => {
            arity(2)?;
            Ok(Term::Or(Box::new(to_term(&rest[0])?), Box::new(to_term(&rest[1])?)))
        }
        "sym" => Ok(Term::Atom(Pred::Sym, terms(rest)?)),
        "role" => {
            let Some((Sexp::Sym(r), args)) = rest.split_first() else {
                return Err("`role` needs a role label".into());
            };
            let i = role_index(r).ok_or_else(|| format!("bad role label `{r}`"))?;
            Ok(Term::Atom(Pred::Role(i), terms(args)?))
        }
        "pred" => {
            let Some((n, args)) = rest.split_first() else {
                return Err("`pred` needs a name".into());
            };
            Ok(Term::Atom(Pred::Named(name(n)?), terms(args)?))
        }
        other => Err(format!("unknown operator `{other}`")),
    }
}

impl Term {
    /// Parses the template syntax: `(lam v.. body)`, `(app f a..)`,
    /// `(box (refs..) conds..)`, `(merge a b..)`, `(not k)`, `(imp a b)`,
    /// `(or a b)`, `(sym args..)`, `(role R1 args..)`, `(pred name args..)`.
    pub fn parse_sexp(src: &str) -> Result<Term, SemanticsError> {
        let tokens = tokenize(src);
        let mut pos = 0;
        let sexp = read_sexp(&tokens, &mut pos).map_err(SemanticsError::Template)?;
        if pos != tokens.len() {
            return Err(SemanticsError::Template("trailing input after template".into()));
        }
        to_term(&sexp).map_err(SemanticsError::Template)
    }
}
