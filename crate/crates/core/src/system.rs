//! Conditional rewrite systems and their syntactic criteria.

use std::collections::BTreeSet;

use crate::analysis::{orthonormality, OrthonormalVerdict};
use crate::beta::beta_redexes;
use crate::term::{classify, free_vars, Signature, Term};

/// One condition `lhs = rhs` of a rule: `lhs` is instantiated and reduced,
/// `rhs` is the join target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub lhs: Term,
    pub rhs: Term,
}

/// A conditional rule `c1 /\ ... /\ cn => lhs -> rhs`.
///
/// Invariants established by the parser: `lhs` is a non-variable algebraic
/// term, and every variable of the conditions and of `rhs` occurs in `lhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub conditions: Vec<Condition>,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// Head constant of the left-hand side.
    pub fn head(&self) -> &str {
        match self.lhs.spine().0 {
            Term::Const(c) => c,
            _ => unreachable!("rule lhs is head-constant by construction"),
        }
    }

    pub fn is_left_linear(&self) -> bool {
        fn count(t: &Term, var: &str) -> usize {
            match t {
                Term::Var(x) => usize::from(x == var),
                Term::Const(_) => 0,
                Term::App(f, a) => count(f, var) + count(a, var),
                Term::Lam(x, b) => {
                    if x == var {
                        0
                    } else {
                        count(b, var)
                    }
                }
            }
        }
        free_vars(&self.lhs)
            .iter()
            .all(|v| count(&self.lhs, v) == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteSystem {
    pub signature: Signature,
    pub rules: Vec<Rule>,
}

impl RewriteSystem {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// Symbols that head at least one rule.
pub fn defined_symbols(sys: &RewriteSystem) -> BTreeSet<String> {
    sys.rules.iter().map(|r| r.head().to_string()).collect()
}

/// Confluence results whose hypotheses can be checked syntactically.
/// Each tag names the shape of the conclusion and carries its hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TheoremTag {
    /// Confluence of rewriting-with-beta follows from confluence of plain
    /// conditional rewriting (left-linear, semi-closed, right-applicative;
    /// conditions evaluated without beta).
    BetaCondFromCond,
    /// Rewriting-with-beta (conditions without beta) is confluent on terms
    /// with arity-compliant beta-normal forms (arity-compliant, algebraic).
    BetaCondOnNormalizing,
    /// Confluence of rewriting-with-beta, conditions evaluated with beta,
    /// preserved on stable term sets (left-linear, semi-closed, algebraic).
    BetaAwareCondPreserved,
    /// Beta-aware conditional rewriting is confluent on terms with
    /// arity-compliant beta-normal forms (arity-compliant, algebraic).
    BetaAwareCondOnNormalizing,
    /// Shallow confluence of beta-aware conditional rewriting (orthonormal).
    ShallowConfluence,
}

impl TheoremTag {
    pub fn describe(self) -> &'static str {
        match self {
            TheoremTag::BetaCondFromCond => {
                "confluence with beta follows from conditional confluence (left-linear, semi-closed, right-applicative)"
            }
            TheoremTag::BetaCondOnNormalizing => {
                "confluent with beta on terms with arity-compliant beta-normal forms (arity-compliant, algebraic)"
            }
            TheoremTag::BetaAwareCondPreserved => {
                "beta-aware conditions: confluence preserved on stable sets (left-linear, semi-closed, algebraic)"
            }
            TheoremTag::BetaAwareCondOnNormalizing => {
                "beta-aware conditions: confluent on terms with arity-compliant beta-normal forms (arity-compliant, algebraic)"
            }
            TheoremTag::ShallowConfluence => {
                "shallow confluence of beta-aware conditional rewriting (orthonormal)"
            }
        }
    }
}

/// Syntactic criteria of a system plus the confluence results they unlock.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriteriaReport {
    pub left_linear: bool,
    pub semi_closed: bool,
    pub right_applicative: bool,
    pub right_algebraic: bool,
    pub applicative: bool,
    pub algebraic: bool,
    pub almost_arity_compliant: bool,
    pub arity_compliant: bool,
    pub orthonormal: OrthonormalVerdict,
    pub applicable: Vec<TheoremTag>,
}

/// Computes all syntactic criteria of a system. Deterministic and
/// independent of rule order.
pub fn check_criteria(sys: &RewriteSystem) -> CriteriaReport {
    let sig = &sys.signature;
    let mut left_linear = true;
    let mut semi_closed = true;
    let mut right_applicative = true;
    let mut right_algebraic = true;
    let mut applicative = true;
    let mut algebraic = true;
    let mut almost_arity_compliant = true;
    let mut arity_compliant = true;

    for rule in &sys.rules {
        left_linear &= rule.is_left_linear();

        let rhs = classify(&rule.rhs, sig).expect("rule constants are declared");
        right_applicative &= rhs.applicative;
        right_algebraic &= rhs.algebraic;

        let lhs = classify(&rule.lhs, sig).expect("rule constants are declared");
        let mut all_applicative = rhs.applicative;
        let mut all_algebraic = rhs.algebraic;
        let mut cond_arity = true;
        for c in &rule.conditions {
            let d = classify(&c.lhs, sig).expect("rule constants are declared");
            let cc = classify(&c.rhs, sig).expect("rule constants are declared");
            all_applicative &= d.applicative && cc.applicative;
            all_algebraic &= d.algebraic && cc.algebraic;
            cond_arity &= d.arity_compliant && cc.arity_compliant;
            semi_closed &= cc.algebraic && free_vars(&c.rhs).is_empty();
        }
        applicative &= all_applicative;
        algebraic &= all_algebraic;

        // Almost arity-compliance: lhs and rhs arity-compliant and the lhs
        // head applied to exactly its arity.
        let (head, args) = rule.lhs.spine();
        let head_exact = match head {
            Term::Const(c) => sig.arity(c) == Some(args.len() as u32),
            _ => false,
        };
        let almost = lhs.arity_compliant && rhs.arity_compliant && head_exact;
        almost_arity_compliant &= almost;
        arity_compliant &= almost && cond_arity;
    }

    let orthonormal = orthonormality(sys);

    let mut applicable = Vec::new();
    if left_linear && semi_closed && right_applicative {
        applicable.push(TheoremTag::BetaCondFromCond);
    }
    if arity_compliant && algebraic {
        applicable.push(TheoremTag::BetaCondOnNormalizing);
        applicable.push(TheoremTag::BetaAwareCondOnNormalizing);
    }
    if left_linear && semi_closed && algebraic {
        applicable.push(TheoremTag::BetaAwareCondPreserved);
    }
    if orthonormal.ok {
        applicable.push(TheoremTag::ShallowConfluence);
    }
    applicable.sort();
    applicable.dedup();

    CriteriaReport {
        left_linear,
        semi_closed,
        right_applicative,
        right_algebraic,
        applicative,
        algebraic,
        almost_arity_compliant,
        arity_compliant,
        orthonormal,
        applicable,
    }
}

/// True when every rule's right-hand side and both sides of every condition
/// are beta-normal. Not a named criterion, but useful in reports.
pub fn rules_beta_normal(sys: &RewriteSystem) -> bool {
    sys.rules.iter().all(|r| {
        beta_redexes(&r.rhs).is_empty()
            && r.conditions
                .iter()
                .all(|c| beta_redexes(&c.lhs).is_empty() && beta_redexes(&c.rhs).is_empty())
    })
}
