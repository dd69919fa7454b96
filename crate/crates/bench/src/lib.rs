//! Shared fixtures for the criterion benchmarks.

use confluo_core::{parse_system, parse_term, RewriteSystem, Term};

pub const TREE: &str = "
    sig car: 1; sig cdr: 1; sig cons: 2; sig nil: 0; sig err: 0;
    sig get: 2; sig len: 1; sig gt: 2; sig occ: 2; sig nd: 2;
    sig zero: 0; sig s: 1; sig tt: 0; sig ff: 0; sig a: 0; sig b: 0; sig c: 0;
    rule car_cons: car (cons x l) -> x;
    rule car_nil: car nil -> err;
    rule cdr_cons: cdr (cons x l) -> l;
    rule cdr_nil: cdr nil -> err;
    rule get_zero: get l zero -> car l;
    rule get_succ: get l (s x) -> get (cdr l) x;
    rule len_nil: len nil -> zero;
    rule len_cons: len (cons x l) -> s (len l);
    rule gt_s_zero: gt (s x) zero -> tt;
    rule gt_zero: gt zero x -> ff;
    rule gt_s_s: gt (s x) (s y) -> gt x y;
    rule occ_nil: occ nil t -> tt;
    rule occ_out: gt (len l) x = ff => occ (cons x o) (nd y l) -> ff;
    rule occ_in: gt (len l) x = tt => occ (cons x o) (nd y l) -> occ o (get l x);
";

pub fn tree_system() -> RewriteSystem {
    parse_system(TREE).expect("benchmark system parses")
}

pub fn term(sys: &RewriteSystem, text: &str) -> Term {
    let consts = sys.signature.symbols().map(|(n, _)| n.clone()).collect();
    parse_term(text, &consts).expect("benchmark term parses")
}

/// Church numeral `n` applied to `s` and `z`, a beta-normalization workload.
pub fn church_tower(n: u32) -> String {
    let mut body = String::from("z");
    for _ in 0..n {
        body = format!("f ({body})");
    }
    format!("(\\f. \\z. {body}) s zero")
}

/// A list literal `cons t1 (cons t2 (... nil))` of the given length.
pub fn list_of(len: usize, elem: &str) -> String {
    let mut out = String::from("nil");
    for _ in 0..len {
        out = format!("cons {elem} ({out})");
    }
    out
}
