//! Standard translation of reduced DRSs into first-order formulas.

use std::fmt;

use super::term::Term;
use super::SemanticsError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    Atom(String, Vec<String>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

fn conj(mut parts: Vec<Formula>) -> Formula {
    let mut flat = Vec::new();
    for p in parts.drain(..) {
        match p {
            Formula::And(inner) => flat.extend(inner),
            Formula::True => {}
            other => flat.push(other),
        }
    }
    match flat.len() {
        0 => Formula::True,
        1 => flat.pop().unwrap(),
        _ => Formula::And(flat),
    }
}

fn exists(vars: Vec<String>, body: Formula) -> Formula {
    if vars.is_empty() {
        body
    } else {
        Formula::Exists(vars, Box::new(body))
    }
}

fn not_fo(t: &Term) -> SemanticsError {
    SemanticsError::NotFirstOrder(t.to_string())
}

/// Translates a DRS in normal form. Boxes become existentially closed
/// conjunctions; `[x̄ | C] ⇒ K` becomes `∀x̄(C → K)`.
pub fn to_fol(t: &Term) -> Result<Formula, SemanticsError> {
    match t {
        Term::Drs { refs, conds } => {
            let body = conj(conds.iter().map(to_fol).collect::<Result<_, _>>()?);
            Ok(exists(refs.clone(), body))
        }
        Term::Atom(p, args) => {
            let args = args
                .iter()
                .map(|a| match a {
                    Term::Var(v) => Ok(v.clone()),
                    other => Err(not_fo(other)),
                })
                .collect::<Result<_, _>>()?;
            Ok(Formula::Atom(p.to_string(), args))
        }
        Term::Not(k) => Ok(Formula::Not(Box::new(to_fol(k)?))),
        Term::Or(a, b) => Ok(Formula::Or(Box::new(to_fol(a)?), Box::new(to_fol(b)?))),
        Term::Imp(a, b) => match &**a {
            Term::Drs { refs, conds } => {
                let ante = conj(conds.iter().map(to_fol).collect::<Result<_, _>>()?);
                let body = Formula::Imp(Box::new(ante), Box::new(to_fol(b)?));
                Ok(if refs.is_empty() {
                    body
                } else {
                    Formula::Forall(refs.clone(), Box::new(body))
                })
            }
            other => Err(not_fo(other)),
        },
        other => Err(not_fo(other)),
    }
}

impl Formula {
    fn is_binary(&self) -> bool {
        matches!(self, Formula::And(_) | Formula::Or(..) | Formula::Imp(..))
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_binary() {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("⊤"),
            Formula::Atom(p, args) => write!(f, "{p}({})", args.join(",")),
            Formula::Not(x) => {
                f.write_str("¬")?;
                x.fmt_operand(f)
            }
            Formula::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ∧ ")?;
                    }
                    x.fmt_operand(f)?;
                }
                Ok(())
            }
            Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.fmt_operand(f)?;
                f.write_str(if matches!(self, Formula::Or(..)) { " ∨ " } else { " → " })?;
                b.fmt_operand(f)
            }
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                let q = if matches!(self, Formula::Forall(..)) { "∀" } else { "∃" };
                for v in vs {
                    write!(f, "{q}{v}")?;
                }
                write!(f, "({body})")
            }
        }
    }
}
