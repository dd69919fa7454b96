//! Confluence analysis: conditional critical pairs, the orthonormality
//! check, and bounded dynamic probes for confluence and commutation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::beta::beta_redexes;
use crate::matching::mgu;
use crate::rewrite::{
    has_defined_symbol, Derivation, Engine, Level, RelKind, RelationSpec, StepBudget,
};
use crate::system::{Condition, RewriteSystem, Rule};
use crate::term::{
    free_vars, replace_at, substitute, CanonTerm, Position, Substitution, Term,
};

/// An overlap between two rules: unifying the inner rule's left-hand side
/// into a non-variable position of the outer one yields a peak whose two
/// reducts must join whenever all inherited conditions hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalCriticalPair {
    pub rule_outer: String,
    pub rule_inner: String,
    pub overlap_pos: Position,
    /// Instantiated conditions, the outer rule's first.
    pub conditions: Vec<Condition>,
    /// Reduct via the inner rule at the overlap position.
    pub left: Term,
    /// Reduct via the outer rule at the root.
    pub right: Term,
    /// The two reducts are already alpha-equal.
    pub trivial: bool,
}

/// All conditional critical pairs, over ordered rule pairs. A rule's overlap
/// with itself at the root is skipped (it is always trivial); distinct rules
/// overlapping at the root are kept.
pub fn critical_pairs(sys: &RewriteSystem) -> Vec<ConditionalCriticalPair> {
    let mut out = Vec::new();
    for (oi, outer) in sys.rules.iter().enumerate() {
        for (ii, inner) in sys.rules.iter().enumerate() {
            let inner = rename_rule_apart(inner, &rule_vars(outer));
            for pos in non_var_positions(&outer.lhs) {
                if pos.is_empty() && oi == ii {
                    continue;
                }
                let at = crate::term::subterm_at(&outer.lhs, &pos).expect("enumerated position");
                let Ok(Some(unifier)) = mgu(at, &inner.lhs) else {
                    continue;
                };
                let overlaid = replace_at(&outer.lhs, &pos, &inner.rhs)
                    .expect("algebraic terms have no binders to cross");
                let left = substitute(&overlaid, &unifier);
                let right = substitute(&outer.rhs, &unifier);
                let mut conditions: Vec<Condition> = Vec::new();
                for cond in outer.conditions.iter().chain(inner.conditions.iter()) {
                    conditions.push(Condition {
                        lhs: substitute(&cond.lhs, &unifier),
                        rhs: substitute(&cond.rhs, &unifier),
                    });
                }
                let trivial = left == right;
                out.push(ConditionalCriticalPair {
                    rule_outer: outer.name.clone(),
                    rule_inner: inner.name.clone(),
                    overlap_pos: pos,
                    conditions,
                    left,
                    right,
                    trivial,
                });
            }
        }
    }
    out
}

fn rule_vars(rule: &Rule) -> BTreeSet<String> {
    let mut vars = free_vars(&rule.lhs);
    vars.extend(free_vars(&rule.rhs));
    for c in &rule.conditions {
        vars.extend(free_vars(&c.lhs));
        vars.extend(free_vars(&c.rhs));
    }
    vars
}

/// Renames the rule's variables away from `avoid`, deterministically: a
/// colliding `x` becomes the first of `x0`, `x1`, ... free on both sides.
fn rename_rule_apart(rule: &Rule, avoid: &BTreeSet<String>) -> Rule {
    let own = rule_vars(rule);
    let mut taken: BTreeSet<String> = avoid.union(&own).cloned().collect();
    let mut renaming = Substitution::new();
    for v in &own {
        if !avoid.contains(v) {
            continue;
        }
        let mut k = 0usize;
        let fresh = loop {
            let cand = format!("{v}{k}");
            if !taken.contains(&cand) {
                break cand;
            }
            k += 1;
        };
        taken.insert(fresh.clone());
        renaming.insert(v.clone(), Term::var(fresh));
    }
    Rule {
        name: rule.name.clone(),
        conditions: rule
            .conditions
            .iter()
            .map(|c| Condition {
                lhs: substitute(&c.lhs, &renaming),
                rhs: substitute(&c.rhs, &renaming),
            })
            .collect(),
        lhs: substitute(&rule.lhs, &renaming),
        rhs: substitute(&rule.rhs, &renaming),
    }
}

fn non_var_positions(t: &Term) -> Vec<Position> {
    fn go(t: &Term, here: &mut Position, out: &mut Vec<Position>) {
        match t {
            Term::Var(_) => {}
            Term::Const(_) => out.push(here.clone()),
            Term::App(f, a) => {
                out.push(here.clone());
                here.push(1);
                go(f, here, out);
                here.pop();
                here.push(2);
                go(a, here, out);
                here.pop();
            }
            Term::Lam(_, b) => {
                out.push(here.clone());
                here.push(1);
                go(b, here, out);
                here.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BadConditionKind {
    /// The condition target has free variables.
    Open,
    /// The condition target is not beta-normal.
    NotBetaNormal,
    /// The condition target contains a defined symbol.
    ContainsDefinedSymbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrthoFailure {
    NotLeftLinear {
        rule: String,
    },
    BadCondition {
        rule: String,
        index: usize,
        kind: BadConditionKind,
    },
    /// A non-trivial critical pair without a pair of inherited conditions
    /// that force the same term to join two distinct inert targets.
    FeasiblePair {
        pair: ConditionalCriticalPair,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthonormalVerdict {
    pub ok: bool,
    pub failures: Vec<OrthoFailure>,
}

/// Orthonormality: every rule is left-linear; every condition target is
/// closed, beta-normal, and free of defined symbols; and every non-trivial
/// critical pair carries two conditions with alpha-equal sources and
/// distinct targets, so its conditions can never all hold at once.
pub fn orthonormality(sys: &RewriteSystem) -> OrthonormalVerdict {
    let mut failures = Vec::new();
    for rule in &sys.rules {
        if !rule.is_left_linear() {
            failures.push(OrthoFailure::NotLeftLinear {
                rule: rule.name.clone(),
            });
        }
        for (index, cond) in rule.conditions.iter().enumerate() {
            let kind = if !free_vars(&cond.rhs).is_empty() {
                Some(BadConditionKind::Open)
            } else if !beta_redexes(&cond.rhs).is_empty() {
                Some(BadConditionKind::NotBetaNormal)
            } else if has_defined_symbol(&cond.rhs, &sys.signature) {
                Some(BadConditionKind::ContainsDefinedSymbol)
            } else {
                None
            };
            if let Some(kind) = kind {
                failures.push(OrthoFailure::BadCondition {
                    rule: rule.name.clone(),
                    index,
                    kind,
                });
            }
        }
    }
    for pair in critical_pairs(sys) {
        if pair.trivial {
            continue;
        }
        let infeasible = pair.conditions.iter().enumerate().any(|(i, ci)| {
            pair.conditions
                .iter()
                .enumerate()
                .any(|(j, cj)| i != j && ci.lhs == cj.lhs && ci.rhs != cj.rhs)
        });
        if !infeasible {
            failures.push(OrthoFailure::FeasiblePair { pair });
        }
    }
    OrthonormalVerdict {
        ok: failures.is_empty(),
        failures,
    }
}

/// A peak whose two endpoints have complete, disjoint forward closures:
/// a definite confluence failure, with the paths from the seed recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeakCounterexample {
    pub seed: Term,
    pub left: Term,
    pub right: Term,
    pub left_derivation: Derivation,
    pub right_derivation: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub relation: RelationSpec,
    pub seeds: u64,
    pub peaks_tested: u64,
    pub joined: u64,
    pub not_joinable: u64,
    pub unknown: u64,
    /// Distinct counterexamples, deduplicated across seeds.
    pub counterexamples: Vec<PeakCounterexample>,
    /// Some verdict was downgraded because raising the working level changed
    /// a step set in a relevant closure.
    pub level_sensitive: bool,
    /// Some seed's graph hit the search budget; peaks may be missing.
    pub open_search: bool,
}

/// Explores each seed's bounded reduction graph once and tests every pair of
/// distinct nodes within `peak_width` of the seed for joinability inside the
/// shared graph. Non-joinability is claimed only for pairs whose forward
/// closures are fully decided, closed, and (for limit-level relations)
/// insensitive to raising the working level by one.
pub fn confluence_probe(
    sys: &RewriteSystem,
    rel: RelationSpec,
    seeds: &[Term],
    budget: StepBudget,
    peak_width: u32,
) -> ProbeReport {
    let mut eng = Engine::with_budget(sys, budget);
    let working = match rel.level {
        Level::Finite(n) => n,
        Level::Omega => budget.max_level,
    };
    let check_sensitivity = rel.level == Level::Omega && rel.kind != RelKind::Beta;
    let mut report = ProbeReport {
        relation: rel,
        seeds: seeds.len() as u64,
        peaks_tested: 0,
        joined: 0,
        not_joinable: 0,
        unknown: 0,
        counterexamples: Vec::new(),
        level_sensitive: false,
        open_search: false,
    };
    let mut seen_pairs: HashSet<(CanonTerm, CanonTerm)> = HashSet::new();
    for seed in seeds {
        let g = eng.explore_graph(seed, rel);
        report.open_search |= !g.complete;
        let peak_nodes: Vec<usize> = (0..g.nodes.len())
            .filter(|&i| g.nodes[i].depth <= peak_width)
            .collect();
        let mut closures: BTreeMap<usize, (BTreeSet<usize>, bool)> = BTreeMap::new();
        for (k, &ai) in peak_nodes.iter().enumerate() {
            for &bi in &peak_nodes[k + 1..] {
                report.peaks_tested += 1;
                let (da, ca) = closures
                    .entry(ai)
                    .or_insert_with(|| g.descendant_closure(ai))
                    .clone();
                let (db, cb) = closures
                    .entry(bi)
                    .or_insert_with(|| g.descendant_closure(bi))
                    .clone();
                if !da.is_disjoint(&db) {
                    report.joined += 1;
                    continue;
                }
                if !(ca && cb) {
                    report.unknown += 1;
                    continue;
                }
                if check_sensitivity {
                    let sensitive = da.union(&db).any(|&i| {
                        let t = &g.nodes[i].term;
                        eng.one_step_reducts(t, rel.at_level(working))
                            != eng.one_step_reducts(t, rel.at_level(working + 1))
                    });
                    if sensitive {
                        report.level_sensitive = true;
                        report.unknown += 1;
                        continue;
                    }
                }
                report.not_joinable += 1;
                let (l, r) = (&g.nodes[ai].term, &g.nodes[bi].term);
                let (cl, cr) = (l.canon(), r.canon());
                let key = if cl <= cr { (cl, cr) } else { (cr, cl) };
                if seen_pairs.insert(key) {
                    report.counterexamples.push(PeakCounterexample {
                        seed: seed.clone(),
                        left: l.clone(),
                        right: r.clone(),
                        left_derivation: eng.record_derivation(seed, &g.path_to(ai), rel),
                        right_derivation: eng.record_derivation(seed, &g.path_to(bi), rel),
                    });
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationCounterexample {
    pub seed: Term,
    /// One-step reduct of the seed under the left relation.
    pub left: Term,
    /// One-step reduct of the seed under the right relation.
    pub right: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationReport {
    pub rel_left: RelationSpec,
    pub rel_right: RelationSpec,
    pub seeds: u64,
    pub peaks_tested: u64,
    pub commuted: u64,
    pub not_commuting: u64,
    pub unknown: u64,
    pub counterexamples: Vec<CommutationCounterexample>,
    pub open_search: bool,
}

/// Tests local commutation at each seed: for every one-step peak
/// `u <-left- seed -right-> v`, searches for a term reachable from `u` under
/// the right relation and from `v` under the left one.
pub fn commutation_probe(
    sys: &RewriteSystem,
    rel_left: RelationSpec,
    rel_right: RelationSpec,
    seeds: &[Term],
    budget: StepBudget,
) -> CommutationReport {
    let mut eng = Engine::with_budget(sys, budget);
    let mut report = CommutationReport {
        rel_left,
        rel_right,
        seeds: seeds.len() as u64,
        peaks_tested: 0,
        commuted: 0,
        not_commuting: 0,
        unknown: 0,
        counterexamples: Vec::new(),
        open_search: false,
    };
    let mut seen_pairs: HashSet<(CanonTerm, CanonTerm)> = HashSet::new();
    // Forward closures cached per (origin, relation) as canon sets.
    let mut closure_cache: HashMap<(CanonTerm, bool), (Vec<CanonTerm>, bool)> = HashMap::new();
    for seed in seeds {
        let ls = eng.one_step_reducts(seed, rel_left);
        let rs = eng.one_step_reducts(seed, rel_right);
        report.open_search |= !ls.complete || !rs.complete;
        let mut lefts: Vec<Term> = Vec::new();
        for s in &ls.steps {
            if !lefts.contains(&s.result) {
                lefts.push(s.result.clone());
            }
        }
        let mut rights: Vec<Term> = Vec::new();
        for s in &rs.steps {
            if !rights.contains(&s.result) {
                rights.push(s.result.clone());
            }
        }
        for u in &lefts {
            for v in &rights {
                report.peaks_tested += 1;
                // u must rejoin under the right relation, v under the left.
                let (cu, u_complete) = closure_cache
                    .entry((u.canon(), true))
                    .or_insert_with(|| {
                        let g = eng.explore_graph(u, rel_right);
                        (
                            g.nodes.iter().map(|n| n.term.canon()).collect(),
                            g.complete,
                        )
                    })
                    .clone();
                let (cv, v_complete) = closure_cache
                    .entry((v.canon(), false))
                    .or_insert_with(|| {
                        let g = eng.explore_graph(v, rel_left);
                        (
                            g.nodes.iter().map(|n| n.term.canon()).collect(),
                            g.complete,
                        )
                    })
                    .clone();
                let cu_set: HashSet<&CanonTerm> = cu.iter().collect();
                if cv.iter().any(|c| cu_set.contains(c)) {
                    report.commuted += 1;
                    continue;
                }
                if u_complete && v_complete {
                    report.not_commuting += 1;
                    if seen_pairs.insert((u.canon(), v.canon())) {
                        report.counterexamples.push(CommutationCounterexample {
                            seed: seed.clone(),
                            left: u.clone(),
                            right: v.clone(),
                        });
                    }
                } else {
                    report.unknown += 1;
                }
            }
        }
    }
    report
}
