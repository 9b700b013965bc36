//! Capture-avoiding substitution and normal-order beta reduction.

use std::collections::BTreeSet;

use super::term::Term;
use super::SemanticsError;

pub const DEFAULT_STEP_BUDGET: usize = 10_000;

/// Names already in use; fresh names never collide with anything in here.
struct Names(BTreeSet<String>);

impl Names {
    fn fresh(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "v" } else { stem };
        let mut i = 1usize;
        loop {
            let cand = format!("{stem}{i}");
            if !self.0.contains(&cand) {
                self.0.insert(cand.clone());
                return cand;
            }
            i += 1;
        }
    }
}

fn rename_free(t: &Term, old: &str, new: &str, names: &mut Names) -> Term {
    subst(t, old, &Term::Var(new.to_owned()), names)
}

/// Renames the referent `old` declared by `t` (and its bound occurrences) to `new`.
fn rename_declared(t: &Term, old: &str, new: &str, names: &mut Names) -> Term {
    match t {
        Term::Drs { refs, conds } if refs.iter().any(|r| r == old) => Term::Drs {
            refs: refs
                .iter()
                .map(|r| if r == old { new.to_owned() } else { r.clone() })
                .collect(),
            conds: conds.iter().map(|c| rename_free(c, old, new, names)).collect(),
        },
        Term::Merge(a, b) => {
            let (a2, b2) = if a.declared().contains(old) {
                let a2 = rename_declared(a, old, new, names);
                let mut b2 = rename_free(b, old, new, names);
                if b.declared().contains(old) {
                    b2 = rename_declared(&b2, old, new, names);
                }
                (a2, b2)
            } else {
                ((**a).clone(), rename_declared(b, old, new, names))
            };
            Term::Merge(Box::new(a2), Box::new(b2))
        }
        _ => t.clone(),
    }
}

fn subst(t: &Term, v: &str, s: &Term, names: &mut Names) -> Term {
    let fv_s = s.free_vars();
    subst_with(t, v, s, &fv_s, names)
}

fn subst_with(t: &Term, v: &str, s: &Term, fv_s: &BTreeSet<String>, names: &mut Names) -> Term {
    if !t.free_vars().contains(v) {
        return t.clone();
    }
    let go = |x: &Term, names: &mut Names| subst_with(x, v, s, fv_s, names);
    match t {
        Term::Var(_) => s.clone(),
        Term::Lam(x, b) => {
            if fv_s.contains(x) {
                let n = names.fresh(x);
                let b2 = rename_free(b, x, &n, names);
                Term::Lam(n, Box::new(go(&b2, names)))
            } else {
                Term::Lam(x.clone(), Box::new(go(b, names)))
            }
        }
        Term::App(f, a) => Term::App(Box::new(go(f, names)), Box::new(go(a, names))),
        Term::Or(a, b) => Term::Or(Box::new(go(a, names)), Box::new(go(b, names))),
        Term::Not(a) => Term::Not(Box::new(go(a, names))),
        Term::Atom(p, args) => Term::Atom(p.clone(), args.iter().map(|a| go(a, names)).collect()),
        Term::Drs { refs, conds } => {
            let mut refs = refs.clone();
            let mut conds = conds.clone();
            for r in refs.iter_mut() {
                if fv_s.contains(r.as_str()) {
                    let n = names.fresh(r);
                    conds = conds.iter().map(|c| rename_free(c, r, &n, names)).collect();
                    *r = n;
                }
            }
            Term::Drs {
                refs,
                conds: conds.iter().map(|c| go(c, names)).collect(),
            }
        }
        Term::Merge(a, b) | Term::Imp(a, b) => {
            let (mut a, mut b) = ((**a).clone(), (**b).clone());
            let shadowed = a.declared().contains(v);
            if !shadowed && b.free_vars().contains(v) {
                for r in a.declared().intersection(fv_s) {
                    let n = names.fresh(r);
                    a = rename_declared(&a, r, &n, names);
                    b = rename_free(&b, r, &n, names);
                }
            }
            let a2 = go(&a, names);
            let b2 = if shadowed { b } else { go(&b, names) };
            if matches!(t, Term::Merge(..)) {
                Term::Merge(Box::new(a2), Box::new(b2))
            } else {
                Term::Imp(Box::new(a2), Box::new(b2))
            }
        }
    }
}

/// Capture-avoiding substitution of `s` for the free occurrences of `v` in `t`.
pub fn substitute(t: &Term, v: &str, s: &Term) -> Term {
    let mut all = BTreeSet::new();
    t.all_names(&mut all);
    s.all_names(&mut all);
    all.insert(v.to_owned());
    subst(t, v, s, &mut Names(all))
}

type Renames = Vec<(String, String)>;

fn merge_boxes(k1: &Term, k2: &Term, names: &mut Names) -> (Term, Renames) {
    let (Term::Drs { refs: r1, conds: c1 }, Term::Drs { refs: r2, conds: c2 }) = (k1, k2) else {
        unreachable!("merge_boxes called on non-boxes")
    };
    let mut r1 = r1.clone();
    let mut c1 = c1.clone();
    let mut r2 = r2.clone();
    let mut c2 = c2.clone();
    // A referent redeclared on the right shadows the left one; rename the
    // left copy, which nothing outside the left box can see.
    for r in r1.iter_mut() {
        if r2.contains(r) {
            let n = names.fresh(r);
            c1 = c1.iter().map(|c| rename_free(c, r, &n, names)).collect();
            *r = n;
        }
    }
    // A right referent that is free in the left conditions would capture it
    // once both share one box; rename it and report the rename upward.
    let free_left: BTreeSet<String> = c1.iter().flat_map(|c| c.free_vars()).collect();
    let mut exported = Vec::new();
    for r in r2.iter_mut() {
        if free_left.contains(r.as_str()) {
            let n = names.fresh(r);
            c2 = c2.iter().map(|c| rename_free(c, r, &n, names)).collect();
            exported.push((r.clone(), n.clone()));
            *r = n;
        }
    }
    r1.extend(r2);
    c1.extend(c2);
    (Term::Drs { refs: r1, conds: c1 }, exported)
}

fn apply_renames(t: &Term, ren: &Renames, names: &mut Names) -> Term {
    ren.iter()
        .fold(t.clone(), |acc, (old, new)| rename_free(&acc, old, new, names))
}

/// One leftmost-outermost step. The second component lists referents the
/// stepped term now exports under a new name.
fn step(t: &Term, names: &mut Names) -> Option<(Term, Renames)> {
    match t {
        Term::App(f, a) => {
            if let Term::Lam(x, body) = &**f {
                return Some((subst(body, x, a, names), vec![]));
            }
            if let Some((f2, _)) = step(f, names) {
                return Some((Term::App(Box::new(f2), a.clone()), vec![]));
            }
            step(a, names).map(|(a2, _)| (Term::App(f.clone(), Box::new(a2)), vec![]))
        }
        Term::Merge(a, b) => {
            if matches!(**a, Term::Drs { .. }) && matches!(**b, Term::Drs { .. }) {
                return Some(merge_boxes(a, b, names));
            }
            if let Some((a2, ren)) = step(a, names) {
                let b2 = apply_renames(b, &ren, names);
                let bd = b.declared();
                let up = ren.into_iter().filter(|(old, _)| !bd.contains(old)).collect();
                return Some((Term::Merge(Box::new(a2), Box::new(b2)), up));
            }
            step(b, names).map(|(b2, ren)| (Term::Merge(a.clone(), Box::new(b2)), ren))
        }
        Term::Imp(a, b) => {
            if let Some((a2, ren)) = step(a, names) {
                let b2 = apply_renames(b, &ren, names);
                return Some((Term::Imp(Box::new(a2), Box::new(b2)), vec![]));
            }
            step(b, names).map(|(b2, _)| (Term::Imp(a.clone(), Box::new(b2)), vec![]))
        }
        Term::Lam(x, b) => step(b, names).map(|(b2, _)| (Term::Lam(x.clone(), Box::new(b2)), vec![])),
        Term::Or(a, b) => {
            if let Some((a2, _)) = step(a, names) {
                return Some((Term::Or(Box::new(a2), b.clone()), vec![]));
            }
            step(b, names).map(|(b2, _)| (Term::Or(a.clone(), Box::new(b2)), vec![]))
        }
        Term::Not(a) => step(a, names).map(|(a2, _)| (Term::Not(Box::new(a2)), vec![])),
        Term::Drs { refs, conds } => {
            for (i, c) in conds.iter().enumerate() {
                if let Some((c2, _)) = step(c, names) {
                    let mut conds = conds.clone();
                    conds[i] = c2;
                    return Some((Term::Drs { refs: refs.clone(), conds }, vec![]));
                }
            }
            None
        }
        Term::Atom(p, args) => {
            for (i, a) in args.iter().enumerate() {
                if let Some((a2, _)) = step(a, names) {
                    let mut args = args.clone();
                    args[i] = a2;
                    return Some((Term::Atom(p.clone(), args), vec![]));
                }
            }
            None
        }
        Term::Var(_) => None,
    }
}

/// Reduces to normal form: beta redexes and merges of two boxes.
pub fn beta_reduce(t: &Term) -> Result<Term, SemanticsError> {
    beta_reduce_with_budget(t, DEFAULT_STEP_BUDGET)
}

pub fn beta_reduce_with_budget(t: &Term, budget: usize) -> Result<Term, SemanticsError> {
    let mut all = BTreeSet::new();
    t.all_names(&mut all);
    let mut names = Names(all);
    let mut cur = t.clone();
    for _ in 0..budget {
        match step(&cur, &mut names) {
            Some((next, _)) => cur = next,
            None => return Ok(cur),
        }
    }
    if step(&cur, &mut names).is_none() {
        return Ok(cur);
    }
    Err(SemanticsError::NonTerminating { budget })
}

/// Applies `f` to `args` left to right and reduces.
pub fn apply_all(f: &Term, args: &[Term]) -> Result<Term, SemanticsError> {
    let t = args
        .iter()
        .fold(f.clone(), |acc, a| Term::App(Box::new(acc), Box::new(a.clone())));
    beta_reduce(&t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        Term::parse_sexp(s).unwrap()
    }

    #[test]
    fn substitution_avoids_capture() {
        // (λy.f(x)(y))[x := y]  must not capture y
        let t = p("(lam y (app f x y))");
        let r = substitute(&t, "x", &p("y"));
        assert!(r.alpha_eq(&p("(lam z (app f y z))")), "{r}");
        // box referents are binders too
        let t = p("(box (y) (pred R x y))");
        let r = substitute(&t, "x", &p("y"));
        assert!(r.alpha_eq(&p("(box (z) (pred R y z))")), "{r}");
        // referents declared on the left of a merge bind the right
        let t = p("(merge (box (y) (pred P y)) (app q x y))");
        let r = substitute(&t, "x", &p("y"));
        assert!(r.alpha_eq(&p("(merge (box (z) (pred P z)) (app q y z))")), "{r}");
        // bound occurrences are left alone
        let t = p("(lam x x)");
        assert_eq!(substitute(&t, "x", &p("y")), t);
    }

    #[test]
    fn reduces_redexes_and_merges() {
        let t = p("(app (lam x (box (e) (pred walk e) (pred Agent e x))) john)");
        assert_eq!(beta_reduce(&t).unwrap().to_string(), "[e | walk(e), Agent(e,john)]");
        let t = p("(merge (box (e) (pred walk e)) (box () (pred past e)))");
        assert_eq!(beta_reduce(&t).unwrap().to_string(), "[e | walk(e), past(e)]");
    }

    #[test]
    fn merge_keeps_shadowing_apart() {
        let t = p("(merge (box (x) (pred a x)) (box (x) (pred b x)))");
        let r = beta_reduce(&t).unwrap();
        match &r {
            Term::Drs { refs, .. } => assert_eq!(refs.len(), 2),
            _ => panic!("{r}"),
        }
        assert!(r.alpha_eq(&p("(box (y x) (pred a y) (pred b x))")), "{r}");
    }

    #[test]
    fn normal_form_is_fixed_point() {
        let t = p("(lam p (box (x) (app p x)))");
        assert_eq!(beta_reduce(&t).unwrap(), t);
    }

    #[test]
    fn omega_hits_budget() {
        let w = p("(lam x (app x x))");
        let t = Term::App(Box::new(w.clone()), Box::new(w));
        assert!(matches!(
            beta_reduce_with_budget(&t, 100),
            Err(SemanticsError::NonTerminating { budget: 100 })
        ));
    }
}
