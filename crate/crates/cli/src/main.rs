//! Command-line workbench over the engine: parse rule files, reduce terms,
//! decide joins, enumerate critical pairs, and probe confluence or
//! commutation from seed files.
//!
//! Exit codes: 0 success (or: no counterexamples / joinable), 1 a definite
//! counterexample or non-joinable verdict, 2 file, syntax, or usage errors,
//! 3 undeclared symbol in a term, 4 a verdict was prevented only by
//! budget-bounded unknowns.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use confluo_core::{
    check_criteria, confluence_probe, commutation_probe, critical_pairs, defined_symbols,
    format_position, parse_seeds, parse_system, parse_term_strict, render_derivation,
    rules_beta_normal, BBase, BadConditionKind, CommutationReport, ConditionalCriticalPair,
    Derivation, Engine, JoinVerdict, Level, NormalizeResult, OrthoFailure, ParseError,
    ProbeReport, RelKind, RelationSpec, RewriteSystem, StepBudget, SystemError, Term,
};

#[derive(Parser)]
#[command(
    name = "confluo",
    version,
    about = "Workbench for lambda calculus extended with conditional rewrite rules",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a rule file and report its syntactic criteria
    Check {
        /// Rule file
        system: PathBuf,
        #[command(flatten)]
        format: FormatOpt,
    },
    /// Reduce a term to normal form, printing the full derivation
    Reduce {
        /// Rule file
        system: PathBuf,
        /// Term to reduce
        term: String,
        #[command(flatten)]
        rel: RelOpts,
        #[command(flatten)]
        budget: BudgetOpts,
        #[command(flatten)]
        format: FormatOpt,
    },
    /// Reduce a term to normal form, printing only the result; `--format
    /// dot` prints the bounded reduction graph of the term instead
    Normalize {
        /// Rule file
        system: PathBuf,
        /// Term to reduce
        term: String,
        #[command(flatten)]
        rel: RelOpts,
        #[command(flatten)]
        budget: BudgetOpts,
        #[command(flatten)]
        format: FormatOpt,
    },
    /// Decide whether two terms have a common reduct; `--format dot` also
    /// prints the left term's reduction graph
    Join {
        /// Rule file
        system: PathBuf,
        /// Left term
        left: String,
        /// Right term
        right: String,
        #[command(flatten)]
        rel: RelOpts,
        #[command(flatten)]
        budget: BudgetOpts,
        #[command(flatten)]
        format: FormatOpt,
    },
    /// List the conditional critical pairs of a rule file
    Cp {
        /// Rule file
        system: PathBuf,
        #[command(flatten)]
        format: FormatOpt,
    },
    /// Explore peaks from seed terms and hunt for confluence counterexamples
    Probe {
        /// Rule file
        system: PathBuf,
        /// Seed file: one term per line, `#` comments
        seeds: PathBuf,
        /// Peaks are taken between nodes within this depth of the seed
        #[arg(long, default_value_t = 3)]
        peak_width: u32,
        #[command(flatten)]
        rel: RelOpts,
        #[command(flatten)]
        budget: BudgetOpts,
        #[command(flatten)]
        format: FormatOpt,
    },
    /// Test one-step commutation of two relations over seed terms
    Commute {
        /// Rule file
        system: PathBuf,
        /// Seed file: one term per line, `#` comments
        seeds: PathBuf,
        /// Relation producing the left leg of each peak
        #[arg(long, value_enum)]
        rel_left: RelArg,
        /// Relation producing the right leg of each peak
        #[arg(long, value_enum)]
        rel_right: RelArg,
        /// Stratification level applied to both relations
        #[arg(long)]
        level: Option<u32>,
        /// Base of the b-family at level 0, applied to both relations
        #[arg(long, value_enum)]
        b_base: Option<BaseArg>,
        #[command(flatten)]
        budget: BudgetOpts,
        #[command(flatten)]
        format: FormatOpt,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelArg {
    /// Plain beta reduction
    Beta,
    /// Conditional rewriting, conditions joined without beta
    A,
    /// Conditional rewriting, conditions joined with beta
    B,
    /// Beta together with the a-family rules
    BetaA,
    /// Beta together with the b-family rules
    BetaB,
}

impl RelArg {
    fn kind(self) -> RelKind {
        match self {
            RelArg::Beta => RelKind::Beta,
            RelArg::A => RelKind::A,
            RelArg::B => RelKind::B,
            RelArg::BetaA => RelKind::BetaA,
            RelArg::BetaB => RelKind::BetaB,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    /// Level 0 of the b-family is empty
    Empty,
    /// Level 0 of the b-family is the full a-relation
    A,
}

#[derive(Args)]
struct RelOpts {
    /// Rewrite relation
    #[arg(long, value_enum, default_value_t = RelArg::BetaA)]
    rel: RelArg,
    /// Stratification level (omitted: the limit relation at the working level)
    #[arg(long)]
    level: Option<u32>,
    /// Base of the b-family at level 0
    #[arg(long, value_enum)]
    b_base: Option<BaseArg>,
}

impl RelOpts {
    fn build(&self) -> Result<RelationSpec, CliError> {
        build_spec(self.rel, self.level, self.b_base)
    }
}

fn build_spec(
    rel: RelArg,
    level: Option<u32>,
    b_base: Option<BaseArg>,
) -> Result<RelationSpec, CliError> {
    if level.is_some() && rel == RelArg::Beta {
        return Err(CliError::Usage(
            "--level does not apply to --rel beta".into(),
        ));
    }
    if b_base.is_some() && !matches!(rel, RelArg::B | RelArg::BetaB) {
        return Err(CliError::Usage(
            "--b-base applies only to --rel b and --rel beta-b".into(),
        ));
    }
    let level = level.map(Level::Finite).unwrap_or(Level::Omega);
    let base = match b_base {
        Some(BaseArg::A) => BBase::FullA,
        _ => BBase::Empty,
    };
    Ok(RelationSpec::new(rel.kind()).at(level).with_base(base))
}

#[derive(Args)]
struct BudgetOpts {
    /// Depth bound of join and graph searches
    #[arg(long)]
    join_depth: Option<u32>,
    /// Step bound of normalization
    #[arg(long)]
    fuel: Option<u64>,
    /// Node bound of explored reduction graphs
    #[arg(long)]
    max_graph: Option<usize>,
}

impl BudgetOpts {
    fn build(&self) -> StepBudget {
        let mut b = StepBudget::default();
        if let Some(d) = self.join_depth {
            b.join_depth = d;
        }
        if let Some(f) = self.fuel {
            b.beta_fuel = f;
        }
        if let Some(g) = self.max_graph {
            b.max_graph = g;
        }
        b
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Human-readable report
    Text,
    /// Stable JSON
    Structured,
    /// Graphviz (normalize and join only)
    Dot,
}

#[derive(Args)]
struct FormatOpt {
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("{path}: {err}")]
    System { path: String, err: SystemError },
    #[error("{place}: {err}")]
    Term { place: String, err: ParseError },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::System { .. } | CliError::Usage(_) => 2,
            CliError::Term { err, .. } => {
                if err.message.starts_with("undeclared symbol") {
                    3
                } else {
                    2
                }
            }
        }
    }
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (e.g. piped into `head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Check { system, format } => cmd_check(&system, format.format),
        Cmd::Reduce {
            system,
            term,
            rel,
            budget,
            format,
        } => cmd_reduce(&system, &term, &rel, &budget, format.format, true),
        Cmd::Normalize {
            system,
            term,
            rel,
            budget,
            format,
        } => cmd_reduce(&system, &term, &rel, &budget, format.format, false),
        Cmd::Join {
            system,
            left,
            right,
            rel,
            budget,
            format,
        } => cmd_join(&system, &left, &right, &rel, &budget, format.format),
        Cmd::Cp { system, format } => cmd_cp(&system, format.format),
        Cmd::Probe {
            system,
            seeds,
            peak_width,
            rel,
            budget,
            format,
        } => cmd_probe(&system, &seeds, peak_width, &rel, &budget, format.format),
        Cmd::Commute {
            system,
            seeds,
            rel_left,
            rel_right,
            level,
            b_base,
            budget,
            format,
        } => {
            let specs = (
                build_spec(rel_left, level, b_base)?,
                build_spec(rel_right, level, b_base)?,
            );
            cmd_commute(&system, &seeds, specs, &budget, format.format)
        }
    }
}

// ---------------------------------------------------------------- loading

fn load_system(path: &Path) -> Result<RewriteSystem, CliError> {
    let text = fs::read_to_string(path).map_err(|err| CliError::Io {
        path: path.display().to_string(),
        err,
    })?;
    parse_system(&text).map_err(|err| CliError::System {
        path: path.display().to_string(),
        err,
    })
}

fn load_term(sys: &RewriteSystem, text: &str, place: &str) -> Result<Term, CliError> {
    parse_term_strict(text, &sys.signature).map_err(|err| CliError::Term {
        place: place.into(),
        err,
    })
}

fn load_seeds(path: &Path, sys: &RewriteSystem) -> Result<Vec<Term>, CliError> {
    let text = fs::read_to_string(path).map_err(|err| CliError::Io {
        path: path.display().to_string(),
        err,
    })?;
    parse_seeds(&text, &sys.signature).map_err(|err| CliError::Term {
        place: path.display().to_string(),
        err,
    })
}

fn no_dot(cmd: &str) -> CliError {
    CliError::Usage(format!("--format dot is not available for `{cmd}`"))
}

// ------------------------------------------------------------------ check

#[derive(Serialize)]
struct CheckOut {
    system: String,
    rules: usize,
    symbols: usize,
    defined: Vec<String>,
    left_linear: bool,
    semi_closed: bool,
    right_applicative: bool,
    right_algebraic: bool,
    applicative: bool,
    algebraic: bool,
    almost_arity_compliant: bool,
    arity_compliant: bool,
    rules_beta_normal: bool,
    orthonormal: bool,
    orthonormal_failures: Vec<String>,
    applicable: Vec<ApplicableOut>,
}

#[derive(Serialize)]
struct ApplicableOut {
    name: String,
    detail: String,
}

fn cmd_check(path: &Path, format: FormatArg) -> Result<u8, CliError> {
    let sys = load_system(path)?;
    let report = check_criteria(&sys);
    let beta_normal = rules_beta_normal(&sys);
    let defined: Vec<String> = defined_symbols(&sys).into_iter().collect();
    let failures: Vec<String> = report
        .orthonormal
        .failures
        .iter()
        .map(ortho_failure_line)
        .collect();
    match format {
        FormatArg::Dot => return Err(no_dot("check")),
        FormatArg::Structured => {
            let out = CheckOut {
                system: path.display().to_string(),
                rules: sys.rules.len(),
                symbols: sys.signature.symbols().count(),
                defined,
                left_linear: report.left_linear,
                semi_closed: report.semi_closed,
                right_applicative: report.right_applicative,
                right_algebraic: report.right_algebraic,
                applicative: report.applicative,
                algebraic: report.algebraic,
                almost_arity_compliant: report.almost_arity_compliant,
                arity_compliant: report.arity_compliant,
                rules_beta_normal: beta_normal,
                orthonormal: report.orthonormal.ok,
                orthonormal_failures: failures,
                applicable: report
                    .applicable
                    .iter()
                    .map(|t| ApplicableOut {
                        name: format!("{t:?}"),
                        detail: t.describe().to_string(),
                    })
                    .collect(),
            };
            println!("{}", json(&out));
        }
        FormatArg::Text => {
            println!("system: {}", path.display());
            println!(
                "rules: {}   symbols: {} ({} defined)",
                sys.rules.len(),
                sys.signature.symbols().count(),
                defined.len()
            );
            let yn = |b: bool| if b { "yes" } else { "no" };
            println!("left-linear:            {}", yn(report.left_linear));
            println!("semi-closed:            {}", yn(report.semi_closed));
            println!("right-applicative:      {}", yn(report.right_applicative));
            println!("right-algebraic:        {}", yn(report.right_algebraic));
            println!("applicative:            {}", yn(report.applicative));
            println!("algebraic:              {}", yn(report.algebraic));
            println!(
                "almost arity-compliant: {}",
                yn(report.almost_arity_compliant)
            );
            println!("arity-compliant:        {}", yn(report.arity_compliant));
            println!("rules beta-normal:      {}", yn(beta_normal));
            println!("orthonormal:            {}", yn(report.orthonormal.ok));
            for line in &failures {
                println!("  - {line}");
            }
            if report.applicable.is_empty() {
                println!("applicable results: none");
            } else {
                println!("applicable results:");
                for t in &report.applicable {
                    println!("  - {}", t.describe());
                }
            }
        }
    }
    Ok(0)
}

fn ortho_failure_line(f: &OrthoFailure) -> String {
    match f {
        OrthoFailure::NotLeftLinear { rule } => format!("rule `{rule}` is not left-linear"),
        OrthoFailure::BadCondition { rule, index, kind } => {
            let what = match kind {
                BadConditionKind::Open => "has free variables",
                BadConditionKind::NotBetaNormal => "is not beta-normal",
                BadConditionKind::ContainsDefinedSymbol => "contains a defined symbol",
            };
            format!("rule `{rule}` condition {}: target {what}", index + 1)
        }
        OrthoFailure::FeasiblePair { pair } => format!(
            "critical pair of `{}` and `{}` at {} has no clashing conditions: {} vs {}",
            pair.rule_outer,
            pair.rule_inner,
            format_position(&pair.overlap_pos),
            pair.left,
            pair.right
        ),
    }
}

// ------------------------------------------------------- reduce/normalize

#[derive(Serialize)]
struct DerivationOut {
    start: String,
    end: String,
    steps: Vec<DerivStepOut>,
}

#[derive(Serialize)]
struct DerivStepOut {
    position: String,
    kind: String,
    result: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    conditions: Vec<CondOut>,
}

#[derive(Serialize)]
struct CondOut {
    index: usize,
    lhs: String,
    rhs: String,
    witness: String,
    left: DerivationOut,
    right: DerivationOut,
}

fn derivation_out(d: &Derivation) -> DerivationOut {
    DerivationOut {
        start: d.start.to_string(),
        end: d.end().to_string(),
        steps: d
            .steps
            .iter()
            .map(|s| DerivStepOut {
                position: format_position(&s.pos),
                kind: s.kind.to_string(),
                result: s.result.to_string(),
                conditions: s
                    .conditions
                    .iter()
                    .map(|c| CondOut {
                        index: c.index,
                        lhs: c.lhs_instance.to_string(),
                        rhs: c.rhs_instance.to_string(),
                        witness: c.witness.to_string(),
                        left: derivation_out(&c.left),
                        right: derivation_out(&c.right),
                    })
                    .collect(),
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct ReduceOut {
    relation: String,
    status: &'static str,
    result: String,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivation: Option<DerivationOut>,
}

fn cmd_reduce(
    path: &Path,
    term: &str,
    rel: &RelOpts,
    budget: &BudgetOpts,
    format: FormatArg,
    with_trace: bool,
) -> Result<u8, CliError> {
    let sys = load_system(path)?;
    let t = load_term(&sys, term, "term")?;
    let spec = rel.build()?;
    let mut eng = Engine::with_budget(&sys, budget.build());
    if format == FormatArg::Dot {
        if with_trace {
            return Err(no_dot("reduce"));
        }
        let g = eng.explore_graph(&t, spec);
        print!("{}", g.to_dot());
        return Ok(0);
    }
    let outcome = eng.normalize(&t, spec);
    let (status, end, derivation, code) = match &outcome {
        NormalizeResult::NormalForm { term, derivation } => {
            ("normal_form", term, derivation, 0u8)
        }
        NormalizeResult::FuelExhausted { partial, derivation } => {
            ("fuel_exhausted", partial, derivation, 0u8)
        }
        NormalizeResult::Undecided { partial, derivation } => {
            ("undecided", partial, derivation, 4u8)
        }
    };
    match format {
        FormatArg::Structured => {
            let out = ReduceOut {
                relation: spec.to_string(),
                status,
                result: end.to_string(),
                steps: derivation.steps.len(),
                derivation: with_trace.then(|| derivation_out(derivation)),
            };
            println!("{}", json(&out));
        }
        FormatArg::Text => {
            if with_trace {
                println!("{}", render_derivation(derivation));
            }
            let n = derivation.steps.len();
            match status {
                "normal_form" => println!("normal form: {end} ({n} steps)"),
                "fuel_exhausted" => println!("fuel exhausted after {n} steps: {end}"),
                _ => println!(
                    "undecided after {n} steps: {end} (a rule application could not be \
                     decided within budget)"
                ),
            }
        }
        FormatArg::Dot => unreachable!("handled above"),
    }
    Ok(code)
}

// ------------------------------------------------------------------- join

#[derive(Serialize)]
struct JoinOut {
    relation: String,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left: Option<DerivationOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<DerivationOut>,
}

fn cmd_join(
    path: &Path,
    left: &str,
    right: &str,
    rel: &RelOpts,
    budget: &BudgetOpts,
    format: FormatArg,
) -> Result<u8, CliError> {
    let sys = load_system(path)?;
    let l = load_term(&sys, left, "left term")?;
    let r = load_term(&sys, right, "right term")?;
    let spec = rel.build()?;
    let mut eng = Engine::with_budget(&sys, budget.build());
    let verdict = eng.joinable(&l, &r, spec);
    let code = match &verdict {
        JoinVerdict::Joinable { .. } => 0,
        JoinVerdict::NotJoinable => 1,
        JoinVerdict::Unknown => 4,
    };
    match format {
        FormatArg::Dot => {
            let g = eng.explore_graph(&l, spec);
            print!("{}", g.to_dot());
        }
        FormatArg::Structured => {
            let out = match &verdict {
                JoinVerdict::Joinable {
                    witness,
                    left,
                    right,
                } => JoinOut {
                    relation: spec.to_string(),
                    verdict: "joinable",
                    witness: Some(witness.to_string()),
                    left: Some(derivation_out(left)),
                    right: Some(derivation_out(right)),
                },
                JoinVerdict::NotJoinable => JoinOut {
                    relation: spec.to_string(),
                    verdict: "not_joinable",
                    witness: None,
                    left: None,
                    right: None,
                },
                JoinVerdict::Unknown => JoinOut {
                    relation: spec.to_string(),
                    verdict: "unknown",
                    witness: None,
                    left: None,
                    right: None,
                },
            };
            println!("{}", json(&out));
        }
        FormatArg::Text => match &verdict {
            JoinVerdict::Joinable {
                witness,
                left,
                right,
            } => {
                println!("joinable at: {witness}");
                println!("left:");
                print!("{}", indent(&render_derivation(left), 2));
                println!("right:");
                print!("{}", indent(&render_derivation(right), 2));
            }
            JoinVerdict::NotJoinable => println!("not joinable"),
            JoinVerdict::Unknown => println!("unknown within budget"),
        },
    }
    Ok(code)
}

// --------------------------------------------------------------------- cp

#[derive(Serialize)]
struct CpOut {
    pairs: Vec<PairOut>,
}

#[derive(Serialize)]
struct PairOut {
    outer: String,
    inner: String,
    position: String,
    conditions: Vec<CondPairOut>,
    left: String,
    right: String,
    trivial: bool,
}

#[derive(Serialize)]
struct CondPairOut {
    lhs: String,
    rhs: String,
}

fn cmd_cp(path: &Path, format: FormatArg) -> Result<u8, CliError> {
    let sys = load_system(path)?;
    let pairs = critical_pairs(&sys);
    match format {
        FormatArg::Dot => return Err(no_dot("cp")),
        FormatArg::Structured => {
            let out = CpOut {
                pairs: pairs.iter().map(pair_out).collect(),
            };
            println!("{}", json(&out));
        }
        FormatArg::Text => {
            let nontrivial = pairs.iter().filter(|p| !p.trivial).count();
            println!(
                "{} critical pair{} ({} non-trivial)",
                pairs.len(),
                if pairs.len() == 1 { "" } else { "s" },
                nontrivial
            );
            for (i, p) in pairs.iter().enumerate() {
                println!(
                    "pair {}: outer {} / inner {} at {}{}",
                    i + 1,
                    p.rule_outer,
                    p.rule_inner,
                    format_position(&p.overlap_pos),
                    if p.trivial { " (trivial)" } else { "" }
                );
                for c in &p.conditions {
                    println!("  condition: {} = {}", c.lhs, c.rhs);
                }
                println!("  left:  {}", p.left);
                println!("  right: {}", p.right);
            }
        }
    }
    Ok(0)
}

fn pair_out(p: &ConditionalCriticalPair) -> PairOut {
    PairOut {
        outer: p.rule_outer.clone(),
        inner: p.rule_inner.clone(),
        position: format_position(&p.overlap_pos),
        conditions: p
            .conditions
            .iter()
            .map(|c| CondPairOut {
                lhs: c.lhs.to_string(),
                rhs: c.rhs.to_string(),
            })
            .collect(),
        left: p.left.to_string(),
        right: p.right.to_string(),
        trivial: p.trivial,
    }
}

// ------------------------------------------------------------------ probe

#[derive(Serialize)]
struct ProbeOut {
    relation: String,
    seeds: u64,
    peaks_tested: u64,
    joined: u64,
    not_joinable: u64,
    unknown: u64,
    level_sensitive: bool,
    open_search: bool,
    counterexamples: Vec<PeakOut>,
}

#[derive(Serialize)]
struct PeakOut {
    seed: String,
    left: String,
    right: String,
    left_derivation: DerivationOut,
    right_derivation: DerivationOut,
}

fn cmd_probe(
    path: &Path,
    seeds_path: &Path,
    peak_width: u32,
    rel: &RelOpts,
    budget: &BudgetOpts,
    format: FormatArg,
) -> Result<u8, CliError> {
    let sys = load_system(path)?;
    let seeds = load_seeds(seeds_path, &sys)?;
    let spec = rel.build()?;
    let report = confluence_probe(&sys, spec, &seeds, budget.build(), peak_width);
    match format {
        FormatArg::Dot => return Err(no_dot("probe")),
        FormatArg::Structured => {
            let out = ProbeOut {
                relation: report.relation.to_string(),
                seeds: report.seeds,
                peaks_tested: report.peaks_tested,
                joined: report.joined,
                not_joinable: report.not_joinable,
                unknown: report.unknown,
                level_sensitive: report.level_sensitive,
                open_search: report.open_search,
                counterexamples: report
                    .counterexamples
                    .iter()
                    .map(|c| PeakOut {
                        seed: c.seed.to_string(),
                        left: c.left.to_string(),
                        right: c.right.to_string(),
                        left_derivation: derivation_out(&c.left_derivation),
                        right_derivation: derivation_out(&c.right_derivation),
                    })
                    .collect(),
            };
            println!("{}", json(&out));
        }
        FormatArg::Text => print_probe_text(&report),
    }
    Ok(probe_code(&report))
}

fn probe_code(report: &ProbeReport) -> u8 {
    if !report.counterexamples.is_empty() {
        1
    } else if report.unknown > 0 || report.open_search {
        4
    } else {
        0
    }
}

fn print_probe_text(report: &ProbeReport) {
    let yn = |b: bool| if b { "yes" } else { "no" };
    println!("relation: {}", report.relation);
    println!(
        "seeds: {}   peaks tested: {}",
        report.seeds, report.peaks_tested
    );
    println!(
        "joined: {}   not joinable: {}   unknown: {}",
        report.joined, report.not_joinable, report.unknown
    );
    println!(
        "open search: {}   level-sensitive: {}",
        yn(report.open_search),
        yn(report.level_sensitive)
    );
    if report.counterexamples.is_empty() {
        println!("no counterexamples found");
        return;
    }
    for (i, c) in report.counterexamples.iter().enumerate() {
        println!("counterexample {}: from seed {}", i + 1, c.seed);
        println!("  left endpoint:  {}", c.left);
        println!("  right endpoint: {}", c.right);
        println!("  left derivation:");
        print!("{}", indent(&render_derivation(&c.left_derivation), 4));
        println!("  right derivation:");
        print!("{}", indent(&render_derivation(&c.right_derivation), 4));
    }
}

// ---------------------------------------------------------------- commute

#[derive(Serialize)]
struct CommuteOut {
    rel_left: String,
    rel_right: String,
    seeds: u64,
    peaks_tested: u64,
    commuted: u64,
    not_commuting: u64,
    unknown: u64,
    open_search: bool,
    counterexamples: Vec<CommutePeakOut>,
}

#[derive(Serialize)]
struct CommutePeakOut {
    seed: String,
    left: String,
    right: String,
}

fn cmd_commute(
    path: &Path,
    seeds_path: &Path,
    specs: (RelationSpec, RelationSpec),
    budget: &BudgetOpts,
    format: FormatArg,
) -> Result<u8, CliError> {
    let sys = load_system(path)?;
    let seeds = load_seeds(seeds_path, &sys)?;
    let report = commutation_probe(&sys, specs.0, specs.1, &seeds, budget.build());
    match format {
        FormatArg::Dot => return Err(no_dot("commute")),
        FormatArg::Structured => {
            let out = CommuteOut {
                rel_left: report.rel_left.to_string(),
                rel_right: report.rel_right.to_string(),
                seeds: report.seeds,
                peaks_tested: report.peaks_tested,
                commuted: report.commuted,
                not_commuting: report.not_commuting,
                unknown: report.unknown,
                open_search: report.open_search,
                counterexamples: report
                    .counterexamples
                    .iter()
                    .map(|c| CommutePeakOut {
                        seed: c.seed.to_string(),
                        left: c.left.to_string(),
                        right: c.right.to_string(),
                    })
                    .collect(),
            };
            println!("{}", json(&out));
        }
        FormatArg::Text => {
            let yn = |b: bool| if b { "yes" } else { "no" };
            println!("left: {}   right: {}", report.rel_left, report.rel_right);
            println!(
                "seeds: {}   peaks tested: {}",
                report.seeds, report.peaks_tested
            );
            println!(
                "commuted: {}   not commuting: {}   unknown: {}",
                report.commuted, report.not_commuting, report.unknown
            );
            println!("open search: {}", yn(report.open_search));
            if report.counterexamples.is_empty() {
                println!("no counterexamples found");
            }
            for (i, c) in report.counterexamples.iter().enumerate() {
                println!("counterexample {}: from seed {}", i + 1, c.seed);
                println!("  left step to:  {}", c.left);
                println!("  right step to: {}", c.right);
            }
        }
    }
    Ok(commute_code(&report))
}

fn commute_code(report: &CommutationReport) -> u8 {
    if !report.counterexamples.is_empty() {
        1
    } else if report.unknown > 0 || report.open_search {
        4
    } else {
        0
    }
}

// -------------------------------------------------------------- rendering

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output structs serialize")
}

fn indent(text: &str, by: usize) -> String {
    let pad = " ".repeat(by);
    let mut out = String::new();
    for line in text.lines() {
        if line.is_empty() {
            out.push('\n');
        } else {
            let _ = writeln!(out, "{pad}{line}");
        }
    }
    out
}
