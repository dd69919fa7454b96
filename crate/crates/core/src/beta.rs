//! Beta reduction machinery: redex enumeration, head steps, leftmost-
//! outermost normalization, parallel reduction, complete developments, and
//! the descent relation used for induction over weakly normalizing terms.

use std::collections::HashSet;

use thiserror::Error;

use crate::term::{
    fresh_name, replace_at_unchecked, substitute, subterm_at, Position, Substitution, Term,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BetaError {
    #[error("parallel reduct set exceeded the cardinality bound of {0}")]
    SizeLimit(usize),
}

/// Default cap on the cardinality of an enumerated parallel reduct set.
pub const DEFAULT_PARALLEL_CAP: usize = 100_000;

/// Positions of all beta redexes, in lexicographic order.
pub fn beta_redexes(t: &Term) -> Vec<Position> {
    fn go(t: &Term, here: &mut Position, out: &mut Vec<Position>) {
        match t {
            Term::App(f, a) => {
                if f.is_lam() {
                    out.push(here.clone());
                }
                here.push(1);
                go(f, here, out);
                here.pop();
                here.push(2);
                go(a, here, out);
                here.pop();
            }
            Term::Lam(_, b) => {
                here.push(1);
                go(b, here, out);
                here.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Contracts the beta redex at `pos`. The caller must point at one.
pub fn contract(t: &Term, pos: &[u8]) -> Option<Term> {
    let sub = subterm_at(t, pos).ok()?;
    if let Term::App(f, a) = sub {
        if let Term::Lam(x, b) = f.as_ref() {
            let contracted =
                substitute(b, &Substitution::singleton(x.clone(), a.as_ref().clone()));
            return replace_at_unchecked(t, pos, &contracted).ok();
        }
    }
    None
}

/// Shape of a head form: either the head is a variable or constant, or the
/// head is an abstraction applied to at least one argument (a head redex).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadShape {
    /// Head is a variable or constant.
    Rigid,
    /// Head is an abstraction with arguments: a head redex exists.
    Redex,
}

/// Decomposition `\x1...xk. v a1 ... an` with the binder prefix maximal, so
/// `v` is an abstraction only when arguments follow it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadForm {
    pub binders: Vec<String>,
    pub head: Term,
    pub args: Vec<Term>,
    pub shape: HeadShape,
}

impl HeadForm {
    pub fn reassemble(&self) -> Term {
        let spine = Term::apps(self.head.clone(), self.args.iter().cloned());
        self.binders
            .iter()
            .rev()
            .fold(spine, |acc, b| Term::lam(b.clone(), acc))
    }
}

pub fn head_form(t: &Term) -> HeadForm {
    let mut binders = Vec::new();
    let mut cur = t;
    while let Term::Lam(x, b) = cur {
        binders.push(x.clone());
        cur = b.as_ref();
    }
    let (head, arg_refs) = cur.spine();
    let args: Vec<Term> = arg_refs.into_iter().cloned().collect();
    let shape = if head.is_lam() && !args.is_empty() {
        HeadShape::Redex
    } else {
        HeadShape::Rigid
    };
    HeadForm {
        binders,
        head: head.clone(),
        args,
        shape,
    }
}

/// The unique head step `\xs. (\y.b) a0 as -> \xs. b{y:=a0} as`, or None
/// when the head is rigid.
pub fn head_step(t: &Term) -> Option<Term> {
    let hf = head_form(t);
    if hf.shape != HeadShape::Redex {
        return None;
    }
    let (binder, body) = match &hf.head {
        Term::Lam(x, b) => (x.clone(), b.as_ref().clone()),
        _ => unreachable!("redex shape has an abstraction head"),
    };
    let mut args = hf.args.clone().into_iter();
    let first = args.next().expect("redex shape has at least one argument");
    let contracted = substitute(&body, &Substitution::singleton(binder, first));
    let spine = Term::apps(contracted, args);
    Some(
        hf.binders
            .iter()
            .rev()
            .fold(spine, |acc, b| Term::lam(b.clone(), acc)),
    )
}

/// Outcome of fuel-bounded normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BetaResult {
    NormalForm(Term),
    FuelExhausted { partial: Term, steps_used: u64 },
}

/// Leftmost-outermost beta normalization: head steps while a head redex
/// exists, then recursion into the head-form arguments left to right.
/// `fuel` bounds the total number of steps.
pub fn beta_nf(t: &Term, fuel: u64) -> BetaResult {
    match lo_normalize(t, fuel) {
        (term, steps, true) => {
            debug_assert!(beta_redexes(&term).is_empty());
            let _ = steps;
            BetaResult::NormalForm(term)
        }
        (term, steps, false) => BetaResult::FuelExhausted {
            partial: term,
            steps_used: steps,
        },
    }
}

/// Returns (result, steps used, finished).
fn lo_normalize(t: &Term, fuel: u64) -> (Term, u64, bool) {
    let mut cur = t.clone();
    let mut used: u64 = 0;
    while let Some(next) = head_step(&cur) {
        if used == fuel {
            return (cur, used, false);
        }
        used += 1;
        cur = next;
    }
    let hf = head_form(&cur);
    let mut args = Vec::with_capacity(hf.args.len());
    let mut done = true;
    for (i, a) in hf.args.iter().enumerate() {
        if !done {
            args.extend(hf.args[i..].iter().cloned());
            break;
        }
        let (na, st, fin) = lo_normalize(a, fuel - used);
        used += st;
        done &= fin;
        args.push(na);
    }
    let out = HeadForm {
        binders: hf.binders,
        head: hf.head,
        args,
        shape: HeadShape::Rigid,
    }
    .reassemble();
    (out, used, done)
}

/// All one-step-parallel beta reducts of `t`: the inductive closure under
/// reflexivity at leaves, congruence, parallel application, and contraction
/// of an applied abstraction. Always contains `t` itself.
pub fn parallel_beta_reducts(t: &Term, cap: usize) -> Result<Vec<Term>, BetaError> {
    fn go(t: &Term, cap: usize) -> Result<Vec<Term>, BetaError> {
        let mut out: Vec<Term> = Vec::new();
        let mut seen = HashSet::new();
        let mut push = |term: Term, out: &mut Vec<Term>| -> Result<(), BetaError> {
            if seen.insert(term.canon()) {
                out.push(term);
                if out.len() > cap {
                    return Err(BetaError::SizeLimit(cap));
                }
            }
            Ok(())
        };
        match t {
            Term::Var(_) | Term::Const(_) => push(t.clone(), &mut out)?,
            Term::Lam(x, b) => {
                for b2 in go(b, cap)? {
                    push(Term::lam(x.clone(), b2), &mut out)?;
                }
            }
            Term::App(f, a) => {
                let fs = go(f, cap)?;
                let args = go(a, cap)?;
                for f2 in &fs {
                    for a2 in &args {
                        push(Term::app(f2.clone(), a2.clone()), &mut out)?;
                    }
                }
                if let Term::Lam(x, b) = f.as_ref() {
                    for b2 in go(b, cap)? {
                        for a2 in &args {
                            let contracted = substitute(
                                &b2,
                                &Substitution::singleton(x.clone(), a2.clone()),
                            );
                            push(contracted, &mut out)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
    go(t, cap)
}

/// The complete development: every redex of `t` (and the redexes its
/// contractions create from existing ones) contracted at once. This is the
/// maximal one-step-parallel reduct; every parallel reduct of `t` reduces to
/// it in one parallel step.
pub fn complete_development(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::Lam(x, b) => Term::lam(x.clone(), complete_development(b)),
        Term::App(f, a) => {
            let da = complete_development(a);
            if let Term::Lam(x, b) = f.as_ref() {
                let db = complete_development(b);
                substitute(&db, &Substitution::singleton(x.clone(), da))
            } else {
                Term::app(complete_development(f), da)
            }
        }
    }
}

/// Children of `t` in the descent relation: the head reduct when a head
/// redex exists; otherwise the head-form arguments, with the binder prefix
/// opened by fresh variables. A bare head has no children.
pub fn succ_children(t: &Term) -> Vec<Term> {
    let hf = head_form(t);
    if hf.shape == HeadShape::Redex {
        return vec![head_step(t).expect("redex shape has a head step")];
    }
    if hf.args.is_empty() {
        return Vec::new();
    }
    let opening: Substitution = hf
        .binders
        .iter()
        .map(|b| (b.clone(), Term::var(fresh_name(b))))
        .collect();
    // Binders may shadow; substitute sequentially from the innermost to keep
    // each argument's references pointing at its own binder's fresh name.
    let mut args = hf.args;
    if !hf.binders.is_empty() {
        // Apply renamings outermost-to-innermost; later (inner) binders win
        // by overwriting earlier entries for the same name.
        let mut renames: Vec<(String, String)> = Vec::new();
        for b in &hf.binders {
            renames.retain(|(old, _)| old != b);
            match opening.get(b) {
                Some(Term::Var(f)) => renames.push((b.clone(), f.clone())),
                _ => unreachable!(),
            }
        }
        let sub: Substitution = renames
            .into_iter()
            .map(|(old, new)| (old, Term::var(new)))
            .collect();
        args = args.iter().map(|a| substitute(a, &sub)).collect();
    }
    args
}

/// Measure for induction over weakly beta-normalizing terms: the number of
/// steps taken by the leftmost-outermost strategy to reach the normal form,
/// paired with the term's size. None when `fuel` runs out first.
pub fn wn_measure(t: &Term, fuel: u64) -> Option<(u64, u64)> {
    match lo_normalize(t, fuel) {
        (_, steps, true) => Some((steps, t.size())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str) -> Term {
        Term::cst(n)
    }
    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn id() -> Term {
        Term::lam("x", v("x"))
    }
    /// (\x. x x) (\x. x x)
    fn omega() -> Term {
        let dup = Term::lam("x", Term::app(v("x"), v("x")));
        Term::app(dup.clone(), dup)
    }

    #[test]
    fn redex_positions_are_lexicographic() {
        // (\x.x) ((\y.y) b): redexes at the root and at 2
        let t = Term::app(id(), Term::app(Term::lam("y", v("y")), c("b")));
        assert_eq!(beta_redexes(&t), vec![vec![], vec![2]]);
    }

    #[test]
    fn no_redexes_under_rigid_heads() {
        let t = Term::apps(c("f"), [Term::lam("x", v("x")), c("a")]);
        assert!(beta_redexes(&t).is_empty());
    }

    #[test]
    fn head_step_reduces_under_binder_prefix() {
        // \z. (\y.y) b c -> \z. b c
        let t = Term::lam(
            "z",
            Term::apps(Term::lam("y", v("y")), [c("b"), c("c")]),
        );
        assert_eq!(
            head_step(&t).unwrap(),
            Term::lam("z", Term::app(c("b"), c("c")))
        );
    }

    #[test]
    fn rigid_head_has_no_head_step() {
        let t = Term::app(c("f"), Term::app(id(), c("a")));
        assert_eq!(head_step(&t), None);
        assert_eq!(head_form(&t).shape, HeadShape::Rigid);
    }

    #[test]
    fn head_form_reassembles_identically() {
        let t = Term::lam(
            "x",
            Term::lam("y", Term::apps(v("x"), [v("y"), c("a")])),
        );
        let hf = head_form(&t);
        assert_eq!(hf.binders, vec!["x".to_string(), "y".to_string()]);
        assert_eq!(hf.reassemble(), t);
    }

    #[test]
    fn nested_binders_are_not_a_head_redex() {
        // \x. \y. y has no arguments: the binder prefix absorbs both lambdas.
        let t = Term::lam("x", Term::lam("y", v("y")));
        let hf = head_form(&t);
        assert_eq!(hf.shape, HeadShape::Rigid);
        assert!(hf.args.is_empty());
        assert_eq!(hf.binders.len(), 2);
    }

    #[test]
    fn normalization_of_two_fold_application() {
        // (\f.\x. f (f x)) s z -> s (s z) in two steps
        let t = Term::apps(
            Term::lam(
                "f",
                Term::lam("x", Term::app(v("f"), Term::app(v("f"), v("x")))),
            ),
            [c("s"), c("z")],
        );
        let expected = Term::app(c("s"), Term::app(c("s"), c("z")));
        assert_eq!(beta_nf(&t, 10), BetaResult::NormalForm(expected));
    }

    #[test]
    fn normalization_discards_divergent_unused_argument() {
        // (\x. y) Omega normalizes: leftmost-outermost erases Omega.
        let t = Term::app(Term::lam("x", v("y")), omega());
        assert_eq!(beta_nf(&t, 10), BetaResult::NormalForm(v("y")));
    }

    #[test]
    fn omega_exhausts_fuel() {
        match beta_nf(&omega(), 50) {
            BetaResult::FuelExhausted { steps_used, .. } => assert_eq!(steps_used, 50),
            other => panic!("expected fuel exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn parallel_reducts_contract_independent_redexes_together() {
        // (\x. f x) ((\y. g y) b): the term itself, each single contraction,
        // and the simultaneous one — the classic four-element diamond.
        let inner = Term::app(Term::lam("y", Term::app(c("g"), v("y"))), c("b"));
        let t = Term::app(Term::lam("x", Term::app(c("f"), v("x"))), inner.clone());
        let reducts = parallel_beta_reducts(&t, DEFAULT_PARALLEL_CAP).unwrap();
        assert_eq!(reducts.len(), 4);
        assert!(reducts.contains(&t));
        assert!(reducts.contains(&Term::app(c("f"), inner)));
        assert!(reducts.contains(&Term::app(
            Term::lam("x", Term::app(c("f"), v("x"))),
            Term::app(c("g"), c("b")),
        )));
        assert!(reducts.contains(&Term::app(c("f"), Term::app(c("g"), c("b")))));
    }

    #[test]
    fn parallel_reducts_respect_the_cap() {
        // Stack enough independent redexes to overflow a tiny cap.
        let mut t = Term::app(id(), c("a"));
        for _ in 0..6 {
            t = Term::app(id(), Term::app(t.clone(), Term::app(id(), c("b"))));
        }
        assert_eq!(
            parallel_beta_reducts(&t, 3),
            Err(BetaError::SizeLimit(3))
        );
    }

    #[test]
    fn complete_development_joins_every_parallel_reduct() {
        let t = Term::app(
            Term::lam("x", Term::app(v("x"), v("x"))),
            Term::app(id(), c("a")),
        );
        let dev = complete_development(&t);
        assert_eq!(dev, Term::app(c("a"), c("a")));
        for u in parallel_beta_reducts(&t, DEFAULT_PARALLEL_CAP).unwrap() {
            let closure = parallel_beta_reducts(&u, DEFAULT_PARALLEL_CAP).unwrap();
            assert!(closure.contains(&dev), "{u} does not develop to {dev}");
        }
    }

    #[test]
    fn children_of_rigid_head_are_the_arguments() {
        let t = Term::apps(c("f"), [c("a"), c("b")]);
        assert_eq!(succ_children(&t), vec![c("a"), c("b")]);
    }

    #[test]
    fn children_of_head_redex_is_the_head_reduct() {
        let t = Term::app(Term::lam("y", v("y")), c("a"));
        assert_eq!(succ_children(&t), vec![c("a")]);
    }

    #[test]
    fn children_open_binders_fresh() {
        // \x. f x: the single child is the opened argument, some variable.
        let t = Term::lam("x", Term::app(c("f"), v("x")));
        let kids = succ_children(&t);
        assert_eq!(kids.len(), 1);
        assert!(matches!(kids[0], Term::Var(_)));
        // \x. \x. f x: the inner binder wins.
        let t2 = Term::lam("x", t.clone());
        let kids2 = succ_children(&t2);
        assert_eq!(kids2.len(), 1);
        assert!(matches!(kids2[0], Term::Var(_)));
    }

    #[test]
    fn bare_head_has_no_children() {
        assert!(succ_children(&c("a")).is_empty());
        assert!(succ_children(&Term::lam("x", v("x"))).is_empty());
    }

    #[test]
    fn measure_counts_strategy_steps_and_size() {
        let t = Term::app(id(), c("a"));
        assert_eq!(wn_measure(&t, 10), Some((1, 4)));
        assert_eq!(wn_measure(&omega(), 40), None);
    }

    #[test]
    fn measure_decreases_to_children() {
        let t = Term::app(
            Term::lam("x", Term::app(v("x"), v("x"))),
            Term::app(id(), c("a")),
        );
        let m = wn_measure(&t, 100).unwrap();
        for child in succ_children(&t) {
            let mc = wn_measure(&child, 100).unwrap();
            assert!(mc < m, "child {child} does not decrease");
        }
    }

    #[test]
    fn contract_substitutes_at_position() {
        let t = Term::app(c("f"), Term::app(Term::lam("x", Term::app(v("x"), v("x"))), c("a")));
        let r = contract(&t, &[2]).unwrap();
        assert_eq!(r, Term::app(c("f"), Term::app(c("a"), c("a"))));
        assert_eq!(contract(&t, &[1]), None);
    }
}
