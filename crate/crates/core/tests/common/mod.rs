//! Shared fixtures and term generators for the integration suites.
#![allow(dead_code)]

use confluo_core::{parse_seeds, parse_system, parse_term_strict, RewriteSystem, Term};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TREE_SRC: &str = include_str!("../../../../corpus/tree.crs");
pub const FULL_SRC: &str = include_str!("../../../../corpus/full.crs");
pub const MINUS_SRC: &str = include_str!("../../../../corpus/minus_cond.crs");
pub const GAP_SRC: [&str; 4] = [
    include_str!("../../../../corpus/beta_gap_1.crs"),
    include_str!("../../../../corpus/beta_gap_2.crs"),
    include_str!("../../../../corpus/beta_gap_3.crs"),
    include_str!("../../../../corpus/beta_gap_4.crs"),
];
pub const TREE_SEEDS_SRC: &str = include_str!("../../../../seeds/tree.terms");
pub const FULL_SEEDS_SRC: &str = include_str!("../../../../seeds/full.terms");

pub fn tree() -> RewriteSystem {
    parse_system(TREE_SRC).expect("tree corpus parses")
}

pub fn full() -> RewriteSystem {
    parse_system(FULL_SRC).expect("full corpus parses")
}

pub fn minus() -> RewriteSystem {
    parse_system(MINUS_SRC).expect("minus corpus parses")
}

pub fn gap(n: usize) -> RewriteSystem {
    parse_system(GAP_SRC[n - 1]).expect("gap corpus parses")
}

/// Parses a term against a system's signature, panicking on error.
pub fn t(sys: &RewriteSystem, text: &str) -> Term {
    parse_term_strict(text, &sys.signature).expect("test term parses")
}

/// As `t`, but undeclared identifiers become free variables.
pub fn open_t(sys: &RewriteSystem, text: &str) -> Term {
    let consts = sys.signature.symbols().map(|(n, _)| n.clone()).collect();
    confluo_core::parse_term(text, &consts).expect("test term parses")
}

pub fn seeds(sys: &RewriteSystem, text: &str) -> Vec<Term> {
    parse_seeds(text, &sys.signature).expect("seed file parses")
}

/// `Theta Theta s`: a fixpoint of the successor constant, reducing in two
/// beta steps to `s (Theta Theta s)`.
pub fn fix_of_succ(sys: &RewriteSystem) -> Term {
    t(sys, "(\\u. \\v. v (u u v)) (\\u. \\v. v (u u v)) s")
}

/// Every closed term of size at most `max_size` built from the given
/// constants, application, and abstraction. Sizes count one per node.
pub fn closed_terms(max_size: u64, consts: &[&str]) -> Vec<Term> {
    fn go(size: u64, env: usize, consts: &[&str], out: &mut Vec<Term>) {
        if size == 1 {
            out.extend(consts.iter().map(|c| Term::cst(*c)));
            out.extend((0..env).map(|i| Term::var(format!("v{i}"))));
            return;
        }
        // Abstraction: one node plus the body.
        let mut bodies = Vec::new();
        go(size - 1, env + 1, consts, &mut bodies);
        out.extend(
            bodies
                .into_iter()
                .map(|b| Term::lam(format!("v{env}"), b)),
        );
        // Application: one node plus both children.
        for left in 1..size - 1 {
            let right = size - 1 - left;
            let mut fs = Vec::new();
            go(left, env, consts, &mut fs);
            let mut xs = Vec::new();
            go(right, env, consts, &mut xs);
            for f in &fs {
                for x in &xs {
                    out.push(Term::app(f.clone(), x.clone()));
                }
            }
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_size {
        go(size, 0, consts, &mut out);
    }
    out
}

/// Deterministic pseudo-random closed terms over the given constants.
pub fn random_closed_terms(count: usize, max_size: u64, consts: &[&str], seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_term(&mut rng, max_size, 0, consts))
        .collect()
}

fn random_term(rng: &mut ChaCha8Rng, budget: u64, env: usize, consts: &[&str]) -> Term {
    let choice = rng.gen_range(0..10u32);
    if choice >= 8 && budget >= 2 {
        return Term::lam(
            format!("v{env}"),
            random_term(rng, budget - 1, env + 1, consts),
        );
    }
    if choice >= 4 && budget >= 3 {
        let left = rng.gen_range(1..=budget - 2);
        return Term::app(
            random_term(rng, left, env, consts),
            random_term(rng, budget - 1 - left, env, consts),
        );
    }
    if env > 0 && rng.gen_bool(0.5) {
        Term::var(format!("v{}", rng.gen_range(0..env)))
    } else {
        Term::cst(consts[rng.gen_range(0..consts.len())])
    }
}

/// First-order sub-signature of the tree corpus used for exhaustive
/// generation: (symbol, arity).
pub const TREE_GEN_SIG: [(&str, u32); 8] = [
    ("nil", 0),
    ("zero", 0),
    ("a", 0),
    ("s", 1),
    ("len", 1),
    ("car", 1),
    ("cons", 2),
    ("gt", 2),
];

/// Every fully-applied ground term over `TREE_GEN_SIG` of size at most
/// `max_size` (size counts constants and application nodes).
pub fn ground_tree_terms(max_size: u64) -> Vec<Term> {
    fn of_size(size: u64, memo: &mut Vec<Vec<Term>>) {
        while memo.len() <= size as usize {
            let target = memo.len() as u64;
            let mut here = Vec::new();
            for (name, arity) in TREE_GEN_SIG {
                match arity {
                    0 => {
                        if target == 1 {
                            here.push(Term::cst(name));
                        }
                    }
                    1 => {
                        // size = head + one app node + argument
                        if target >= 3 {
                            for arg in memo[(target - 2) as usize].clone() {
                                here.push(Term::app(Term::cst(name), arg));
                            }
                        }
                    }
                    _ => {
                        // size = head + two app nodes + both arguments
                        if target >= 5 {
                            for l in 1..target - 3 {
                                let r = target - 3 - l;
                                for x in memo[l as usize].clone() {
                                    for y in memo[r as usize].clone() {
                                        here.push(Term::apps(
                                            Term::cst(name),
                                            [x.clone(), y.clone()],
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            memo.push(here);
        }
    }
    let mut memo: Vec<Vec<Term>> = vec![Vec::new()];
    of_size(max_size, &mut memo);
    memo.into_iter().flatten().collect()
}

/// Beta-redex wrappers over ground corpus terms: for each occurrence of a
/// ground constant, abstract it out and re-apply, giving `(\x. C[x]) c`.
pub fn wrapped_tree_terms(max_ground_size: u64) -> Vec<Term> {
    use confluo_core::{occurrences, replace_at};
    let mut out = Vec::new();
    for g in ground_tree_terms(max_ground_size) {
        for c in ["zero", "nil", "a"] {
            let needle = Term::cst(c);
            for pos in occurrences(&needle, &g) {
                let body = replace_at(&g, &pos, &Term::var("x")).expect("no binders in path");
                out.push(Term::app(Term::lam("x", body), needle.clone()));
            }
        }
    }
    out
}
