//! Untyped lambda terms over a first-order signature of curried constants.
//!
//! Terms are kept in named representation for readable printing; alpha
//! equivalence is decided through an on-demand nameless (index-based)
//! canonical form. Two terms compare equal iff they are alpha equivalent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// A term: variable, constant, application, or abstraction.
///
/// Constants and variables are distinguished structurally, not by spelling;
/// the parser decides using signature membership.
#[derive(Clone, Debug)]
pub enum Term {
    Var(String),
    Const(String),
    App(Arc<Term>, Arc<Term>),
    Lam(String, Arc<Term>),
}

/// Nameless form used for alpha-equivalence, hashing, and canonical ordering.
/// Bound variables become indices (innermost binder = 0), free variables and
/// constants keep their names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanonTerm {
    Bound(u32),
    Free(String),
    Const(String),
    App(Box<CanonTerm>, Box<CanonTerm>),
    Lam(Box<CanonTerm>),
}

/// Path from the root: 1 descends into the function side of an application
/// or under a binder, 2 descends into the argument side.
pub type Position = Vec<u8>;

/// Renders a position as dotted digits, the root as `e`.
pub fn format_position(pos: &[u8]) -> String {
    if pos.is_empty() {
        "e".to_string()
    } else {
        pos.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("position {} does not exist in the term", format_position(.0))]
    InvalidPosition(Position),
    #[error("replacement at {} would capture a free variable of the inserted term", format_position(.0))]
    CaptureAtPosition(Position),
    #[error("constant `{0}` is not declared in the signature")]
    UndeclaredSymbol(String),
}

static FRESH_COUNTER: AtomicU64 = AtomicU64::new(1);

/// Returns a globally fresh variable name derived from `base`.
/// Any existing `#n` suffix on the base is stripped before a new one is added.
pub fn fresh_name(base: &str) -> String {
    let stem = base.split('#').next().unwrap_or(base);
    let stem = if stem.is_empty() { "x" } else { stem };
    let n = FRESH_COUNTER.fetch_add(1, Ordering::Relaxed);
    format!("{stem}#{n}")
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn cst(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Arc::new(fun), Arc::new(arg))
    }

    /// Left-associated application `head a1 ... an`.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn lam(binder: impl Into<String>, body: Term) -> Term {
        Term::Lam(binder.into(), Arc::new(body))
    }

    /// Number of nodes.
    pub fn size(&self) -> u64 {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lam(_, b) => 1 + b.size(),
        }
    }

    /// Canonical nameless form; alpha-equivalent terms share it.
    pub fn canon(&self) -> CanonTerm {
        fn go(t: &Term, stack: &mut Vec<String>) -> CanonTerm {
            match t {
                Term::Var(x) => match stack.iter().rposition(|b| b == x) {
                    Some(i) => CanonTerm::Bound((stack.len() - 1 - i) as u32),
                    None => CanonTerm::Free(x.clone()),
                },
                Term::Const(c) => CanonTerm::Const(c.clone()),
                Term::App(f, a) => {
                    CanonTerm::App(Box::new(go(f, stack)), Box::new(go(a, stack)))
                }
                Term::Lam(x, b) => {
                    stack.push(x.clone());
                    let body = go(b, stack);
                    stack.pop();
                    CanonTerm::Lam(Box::new(body))
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Flat byte encoding of the canonical form: two terms produce equal
    /// byte strings exactly when their `canon` forms are equal. Prefix-free
    /// (tag bytes plus varint lengths), so it is safe as a hash or ordering
    /// key where the tree shape is not needed.
    pub(crate) fn canon_bytes(&self) -> Vec<u8> {
        fn varint(out: &mut Vec<u8>, mut n: usize) {
            loop {
                let b = (n & 0x7f) as u8;
                n >>= 7;
                if n == 0 {
                    out.push(b);
                    break;
                }
                out.push(b | 0x80);
            }
        }
        fn named(out: &mut Vec<u8>, tag: u8, s: &str) {
            out.push(tag);
            varint(out, s.len());
            out.extend_from_slice(s.as_bytes());
        }
        fn go<'t>(t: &'t Term, stack: &mut Vec<&'t str>, out: &mut Vec<u8>) {
            match t {
                Term::Var(x) => match stack.iter().rposition(|b| *b == x.as_str()) {
                    Some(i) => {
                        out.push(1);
                        varint(out, stack.len() - 1 - i);
                    }
                    None => named(out, 2, x),
                },
                Term::Const(c) => named(out, 3, c),
                Term::App(f, a) => {
                    out.push(4);
                    go(f, stack, out);
                    go(a, stack, out);
                }
                Term::Lam(x, b) => {
                    out.push(5);
                    stack.push(x);
                    go(b, stack, out);
                    stack.pop();
                }
            }
        }
        let mut out = Vec::with_capacity(2 * self.size() as usize);
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_lam(&self) -> bool {
        matches!(self, Term::Lam(..))
    }

    /// Head and argument list of the application spine `v a1 ... an`.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f.as_ref();
        }
        args.reverse();
        (cur, args)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

/// Alpha-equality by a simultaneous walk: binders are matched positionally,
/// free variables by name. Agrees exactly with `canon` equality but builds
/// nothing. Shared subtrees short-circuit by pointer, which is sound only
/// while every enclosing binder pair has equal names (`aligned`).
fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go<'t>(
        a: &'t Term,
        b: &'t Term,
        stack: &mut Vec<(&'t str, &'t str)>,
        aligned: bool,
    ) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let ia = stack.iter().rposition(|(l, _)| *l == x.as_str());
                let ib = stack.iter().rposition(|(_, r)| *r == y.as_str());
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Const(c), Term::Const(d)) => c == d,
            (Term::App(f1, a1), Term::App(f2, a2)) => {
                ((aligned && Arc::ptr_eq(f1, f2)) || go(f1, f2, stack, aligned))
                    && ((aligned && Arc::ptr_eq(a1, a2)) || go(a1, a2, stack, aligned))
            }
            (Term::Lam(x, b1), Term::Lam(y, b2)) => {
                let aligned = aligned && x == y;
                if aligned && Arc::ptr_eq(b1, b2) {
                    return true;
                }
                stack.push((x, y));
                let ok = go(b1, b2, stack, aligned);
                stack.pop();
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), true)
}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canon().hash(state);
    }
}

/// Free variables, sorted by name.
pub fn free_vars(t: &Term) -> BTreeSet<String> {
    fn go(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(f, a) => {
                go(f, bound, out);
                go(a, bound, out);
            }
            Term::Lam(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Finite map from variable names to terms, applied simultaneously.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn singleton(var: impl Into<String>, term: Term) -> Substitution {
        let mut s = Substitution::new();
        s.insert(var, term);
        s
    }

    pub fn insert(&mut self, var: impl Into<String>, term: Term) {
        self.map.insert(var.into(), term);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn remove(&mut self, var: &str) -> Option<Term> {
        self.map.remove(var)
    }

    /// Composition: `self.compose(other)` maps x to other(self(x)), and keeps
    /// bindings of `other` for variables outside the domain of `self`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in self.map.iter() {
            out.insert(v.clone(), substitute(t, other));
        }
        for (v, t) in other.map.iter() {
            if !out.map.contains_key(v) {
                out.insert(v.clone(), t.clone());
            }
        }
        out
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

/// Capture-avoiding simultaneous substitution of free variables.
pub fn substitute(t: &Term, sub: &Substitution) -> Term {
    if sub.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(x) => sub.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::App(f, a) => Term::app(substitute(f, sub), substitute(a, sub)),
        Term::Lam(x, b) => {
            let body_fv = free_vars(b);
            // Restrict to bindings that can actually fire inside the body.
            let relevant: Vec<(&String, &Term)> = sub
                .iter()
                .filter(|(v, _)| *v != x && body_fv.contains(*v))
                .collect();
            if relevant.is_empty() {
                return t.clone();
            }
            let captures = relevant
                .iter()
                .any(|(_, img)| free_vars(img).contains(x.as_str()));
            let narrowed: Substitution = relevant
                .into_iter()
                .map(|(v, img)| (v.clone(), img.clone()))
                .collect();
            if captures {
                let x2 = fresh_name(x);
                let renamed = substitute(b, &Substitution::singleton(x.clone(), Term::var(&x2)));
                Term::lam(x2, substitute(&renamed, &narrowed))
            } else {
                Term::lam(x.clone(), substitute(b, &narrowed))
            }
        }
    }
}

pub fn subterm_at<'a>(t: &'a Term, pos: &[u8]) -> Result<&'a Term, TermError> {
    let mut cur = t;
    for (i, d) in pos.iter().enumerate() {
        cur = match (cur, d) {
            (Term::App(f, _), 1) => f.as_ref(),
            (Term::App(_, a), 2) => a.as_ref(),
            (Term::Lam(_, b), 1) => b.as_ref(),
            _ => return Err(TermError::InvalidPosition(pos[..=i].to_vec())),
        };
    }
    Ok(cur)
}

/// Replaces the subterm at `pos` by `u`. Errs if the path crosses a binder
/// whose variable occurs free in `u` (the replacement would be captured).
pub fn replace_at(t: &Term, pos: &[u8], u: &Term) -> Result<Term, TermError> {
    let u_fv = free_vars(u);
    fn go(
        t: &Term,
        pos: &[u8],
        depth: usize,
        u: &Term,
        u_fv: &BTreeSet<String>,
        full: &[u8],
    ) -> Result<Term, TermError> {
        if depth == pos.len() {
            return Ok(u.clone());
        }
        match (t, pos[depth]) {
            (Term::App(f, a), 1) => Ok(Term::app(
                go(f, pos, depth + 1, u, u_fv, full)?,
                a.as_ref().clone(),
            )),
            (Term::App(f, a), 2) => Ok(Term::app(
                f.as_ref().clone(),
                go(a, pos, depth + 1, u, u_fv, full)?,
            )),
            (Term::Lam(x, b), 1) => {
                if u_fv.contains(x) {
                    return Err(TermError::CaptureAtPosition(full.to_vec()));
                }
                Ok(Term::lam(x.clone(), go(b, pos, depth + 1, u, u_fv, full)?))
            }
            _ => Err(TermError::InvalidPosition(pos[..=depth].to_vec())),
        }
    }
    go(t, pos, 0, u, &u_fv, pos)
}

/// Replacement that deliberately lets binders on the path recapture free
/// variables of `u`. Used by the rewrite engines, which rewrite a subterm in
/// place under its original binders.
pub(crate) fn replace_at_unchecked(t: &Term, pos: &[u8], u: &Term) -> Result<Term, TermError> {
    if pos.is_empty() {
        return Ok(u.clone());
    }
    match (t, pos[0]) {
        (Term::App(f, a), 1) => Ok(Term::app(
            replace_at_unchecked(f, &pos[1..], u)?,
            a.as_ref().clone(),
        )),
        (Term::App(f, a), 2) => Ok(Term::app(
            f.as_ref().clone(),
            replace_at_unchecked(a, &pos[1..], u)?,
        )),
        (Term::Lam(x, b), 1) => Ok(Term::lam(x.clone(), replace_at_unchecked(b, &pos[1..], u)?)),
        _ => Err(TermError::InvalidPosition(pos.to_vec())),
    }
}

/// All positions of `u` whose subterm is alpha-equal to `t`, in lexicographic
/// order. The recursion stops at a match: a term cannot properly contain an
/// alpha-copy of itself, so this enumerates every matching position.
pub fn occurrences(t: &Term, u: &Term) -> Vec<Position> {
    fn go(needle: &CanonTerm, u: &Term, here: &mut Position, out: &mut Vec<Position>) {
        if u.canon() == *needle {
            out.push(here.clone());
            return;
        }
        match u {
            Term::Var(_) | Term::Const(_) => {}
            Term::App(f, a) => {
                here.push(1);
                go(needle, f, here, out);
                here.pop();
                here.push(2);
                go(needle, a, here, out);
                here.pop();
            }
            Term::Lam(_, b) => {
                here.push(1);
                go(needle, b, here, out);
                here.pop();
            }
        }
    }
    let needle = t.canon();
    let mut out = Vec::new();
    go(&needle, u, &mut Vec::new(), &mut out);
    out
}

/// Arity and defined-status table for the constants of a system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    entries: BTreeMap<String, SigEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigEntry {
    pub arity: u32,
    pub defined: bool,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, arity: u32) {
        self.entries.insert(
            name.into(),
            SigEntry {
                arity,
                defined: false,
            },
        );
    }

    pub fn mark_defined(&mut self, name: &str) {
        if let Some(e) = self.entries.get_mut(name) {
            e.defined = true;
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn arity(&self, name: &str) -> Option<u32> {
        self.entries.get(name).map(|e| e.arity)
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.entries.get(name).map(|e| e.defined).unwrap_or(false)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&String, &SigEntry)> {
        self.entries.iter()
    }

    pub fn defined_symbols(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|(_, e)| e.defined)
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// Syntactic classification of a term relative to a signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermClass {
    /// No abstraction anywhere.
    pub applicative: bool,
    /// Applicative and no variable in function position.
    pub algebraic: bool,
    /// No constant applied to more arguments than its declared arity.
    pub arity_compliant: bool,
}

/// Classifies `t`. Errs if a constant of `t` is missing from the signature.
pub fn classify(t: &Term, sig: &Signature) -> Result<TermClass, TermError> {
    fn go(
        t: &Term,
        sig: &Signature,
        nargs: u32,
        class: &mut TermClass,
    ) -> Result<(), TermError> {
        match t {
            Term::Var(_) => {
                if nargs > 0 {
                    class.algebraic = false;
                }
            }
            Term::Const(c) => {
                let arity = sig
                    .arity(c)
                    .ok_or_else(|| TermError::UndeclaredSymbol(c.clone()))?;
                if nargs > arity {
                    class.arity_compliant = false;
                }
            }
            Term::App(f, a) => {
                go(f, sig, nargs + 1, class)?;
                go(a, sig, 0, class)?;
            }
            Term::Lam(_, b) => {
                class.applicative = false;
                class.algebraic = false;
                go(b, sig, 0, class)?;
            }
        }
        Ok(())
    }
    let mut class = TermClass {
        applicative: true,
        algebraic: true,
        arity_compliant: true,
    };
    go(t, sig, 0, &mut class)?;
    Ok(class)
}

/// Pretty printer. Binder names keep their stems; fresh-name suffixes are
/// stripped whenever doing so cannot capture another variable.
pub fn print_term(t: &Term) -> String {
    fn tidy(t: &Term) -> Term {
        match t {
            Term::Var(_) | Term::Const(_) => t.clone(),
            Term::App(f, a) => Term::app(tidy(f), tidy(a)),
            Term::Lam(x, b) => {
                let stem = x.split('#').next().unwrap_or(x).to_string();
                let stem = if stem.is_empty() { x.clone() } else { stem };
                // Renaming x to its stem is safe unless a distinct free
                // variable of the body already carries that name.
                if stem != *x && !free_vars(b).contains(&stem) {
                    let b2 = substitute(b, &Substitution::singleton(x.clone(), Term::var(&stem)));
                    return Term::lam(stem, tidy(&b2));
                }
                Term::lam(x.clone(), tidy(b))
            }
        }
    }
    fn atom(t: &Term, out: &mut String) {
        match t {
            Term::Var(x) => out.push_str(x),
            Term::Const(c) => out.push_str(c),
            _ => {
                out.push('(');
                full(t, out);
                out.push(')');
            }
        }
    }
    fn full(t: &Term, out: &mut String) {
        match t {
            Term::Var(_) | Term::Const(_) => atom(t, out),
            Term::Lam(x, b) => {
                out.push('\\');
                out.push_str(x);
                out.push_str(". ");
                full(b, out);
            }
            Term::App(..) => {
                let (head, args) = t.spine();
                atom(head, out);
                for a in args {
                    out.push(' ');
                    atom(a, out);
                }
            }
        }
    }
    let mut out = String::new();
    full(&tidy(t), &mut out);
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}
