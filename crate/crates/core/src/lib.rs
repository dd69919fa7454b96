//! Lambda terms over first-order signatures with conditional rewriting:
//! reduction engines for rule and beta steps (separately and combined),
//! bounded joinability, critical pairs, syntactic confluence criteria, and
//! dynamic confluence probing.
//!
//! The central objects are [`Term`] (untyped lambda terms with curried
//! constants), [`RewriteSystem`] (named conditional rules over a signature),
//! and [`Engine`] (level-stratified reduction with memoized bounded
//! searches). Systems are usually built with [`parse::parse_system`].

pub mod analysis;
pub mod beta;
pub mod matching;
pub mod parse;
pub mod rewrite;
pub mod system;
pub mod term;

pub use analysis::{
    commutation_probe, confluence_probe, critical_pairs, orthonormality, BadConditionKind,
    CommutationCounterexample, CommutationReport, ConditionalCriticalPair, OrthoFailure,
    OrthonormalVerdict, PeakCounterexample, ProbeReport,
};
pub use beta::{
    beta_nf, beta_redexes, complete_development, contract, head_form, head_step,
    parallel_beta_reducts, succ_children, wn_measure, BetaError, BetaResult, HeadForm, HeadShape,
};
pub use matching::{match_term, mgu, rename_apart, MatchError, UnifyError};
pub use parse::{parse_seeds, parse_system, parse_term, parse_term_strict, ParseError, SystemError};
pub use rewrite::{
    is_inert, render_derivation, BBase, CondJustification, Derivation, DerivStep, Engine,
    EngineError, JoinDecision, JoinVerdict, Level, NormalizeResult, ParallelFlavor, ParallelSet,
    ReductionGraph, RelKind, RelationSpec, Step, StepBudget, StepKind, StepSet,
};
pub use system::{
    check_criteria, defined_symbols, rules_beta_normal, Condition, CriteriaReport, RewriteSystem,
    Rule, TheoremTag,
};
pub use term::{
    classify, format_position, free_vars, occurrences, subterm_at, replace_at, substitute,
    CanonTerm, Position, SigEntry, Signature, Substitution, Term, TermClass, TermError,
};
