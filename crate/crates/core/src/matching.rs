//! First-order matching and unification over algebraic terms.
//!
//! Patterns must be algebraic (no abstractions, no applied variables);
//! subjects may carry abstractions in the positions matched by pattern
//! variables. Non-linear patterns require the repeated images to agree up to
//! alpha.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::term::{fresh_name, free_vars, substitute, Substitution, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("pattern is not algebraic")]
    NonAlgebraicPattern,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnifyError {
    #[error("unification input is not algebraic")]
    NonAlgebraicInput,
    #[error("inputs share variables; rename apart first ({0} occurs on both sides)")]
    SharedVariables(String),
}

fn is_algebraic_shape(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Const(_) => true,
        Term::Lam(..) => false,
        Term::App(f, a) => {
            let (head, _) = t.spine();
            !matches!(head, Term::Var(_) | Term::Lam(..))
                && is_algebraic_shape(f)
                && is_algebraic_shape(a)
        }
    }
}

/// Matches `pattern` against `subject`: finds `s` with `pattern s == subject`
/// up to alpha, or None. The pattern must be algebraic.
pub fn match_term(pattern: &Term, subject: &Term) -> Result<Option<Substitution>, MatchError> {
    if !is_algebraic_shape(pattern) {
        return Err(MatchError::NonAlgebraicPattern);
    }
    let mut sub = Substitution::new();
    if match_into(pattern, subject, &mut sub) {
        Ok(Some(sub))
    } else {
        Ok(None)
    }
}

fn match_into(pattern: &Term, subject: &Term, sub: &mut Substitution) -> bool {
    match pattern {
        Term::Var(x) => match sub.get(x) {
            Some(prev) => prev == subject,
            None => {
                sub.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::Const(c) => matches!(subject, Term::Const(d) if c == d),
        Term::App(pf, pa) => match subject {
            Term::App(sf, sa) => match_into(pf, sf, sub) && match_into(pa, sa, sub),
            _ => false,
        },
        Term::Lam(..) => false,
    }
}

/// Most general unifier of two algebraic terms with disjoint variables.
/// Returns None when the terms do not unify (clash or occurs check).
pub fn mgu(left: &Term, right: &Term) -> Result<Option<Substitution>, UnifyError> {
    if !is_algebraic_shape(left) || !is_algebraic_shape(right) {
        return Err(UnifyError::NonAlgebraicInput);
    }
    let lv = free_vars(left);
    let rv = free_vars(right);
    if let Some(shared) = lv.intersection(&rv).next() {
        return Err(UnifyError::SharedVariables(shared.clone()));
    }
    let mut sub = Substitution::new();
    let mut work = vec![(left.clone(), right.clone())];
    while let Some((a, b)) = work.pop() {
        let a = substitute(&a, &sub);
        let b = substitute(&b, &sub);
        match (&a, &b) {
            (Term::Var(x), _) if matches!(&b, Term::Var(y) if y == x) => {}
            (Term::Var(x), _) => {
                if free_vars(&b).contains(x) {
                    return Ok(None); // occurs check
                }
                bind(&mut sub, x.clone(), b);
            }
            (_, Term::Var(y)) => {
                if free_vars(&a).contains(y) {
                    return Ok(None);
                }
                bind(&mut sub, y.clone(), a);
            }
            (Term::Const(c), Term::Const(d)) => {
                if c != d {
                    return Ok(None);
                }
            }
            (Term::App(af, aa), Term::App(bf, ba)) => {
                work.push((af.as_ref().clone(), bf.as_ref().clone()));
                work.push((aa.as_ref().clone(), ba.as_ref().clone()));
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(sub))
}

/// Extends `sub` with `x := t` and folds the binding through existing images.
fn bind(sub: &mut Substitution, x: String, t: Term) {
    let single = Substitution::singleton(x.clone(), t.clone());
    let updated: Vec<(String, Term)> = sub
        .iter()
        .map(|(v, img)| (v.clone(), substitute(img, &single)))
        .collect();
    for (v, img) in updated {
        sub.insert(v, img);
    }
    sub.insert(x, t);
}

/// Renames every free variable of `t` that collides with `avoid` to a fresh
/// name. Returns the renamed term with the renaming applied.
pub fn rename_apart(t: &Term, avoid: &BTreeSet<String>) -> (Term, Substitution) {
    let mut sub = Substitution::new();
    for v in free_vars(t) {
        if avoid.contains(&v) {
            sub.insert(v.clone(), Term::var(fresh_name(&v)));
        }
    }
    (substitute(t, &sub), sub)
}
