//! The reduction engine: level-stratified conditional rewriting, optionally
//! combined with beta steps, plus bounded joinability, reduction graphs,
//! normalization, parallel closures, and derivation recording.
//!
//! Relations are stratified by level. At level 0 the rule relation is empty
//! (or, for the b-family with the full-a base, the whole a-relation). At
//! level n+1 a rule fires when each instantiated condition joins under the
//! level-n relation: the a-family joins conditions without beta, the
//! b-family joins them under the union with beta. "omega" means the working
//! level from the budget.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::beta::{beta_redexes, contract};
use crate::matching::match_term;
use crate::system::{RewriteSystem, Rule};
use crate::term::{
    format_position, free_vars, replace_at_unchecked, substitute, subterm_at, CanonTerm,
    Position, Signature, Substitution, Term,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("parallel reduct set exceeded the cardinality bound of {0}")]
    SizeLimit(usize),
}

/// Which relation family a step set is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelKind {
    /// Beta steps only.
    Beta,
    /// Conditional rule steps; conditions join without beta.
    A,
    /// Conditional rule steps; conditions join under the union with beta.
    B,
    /// Beta union the a-relation.
    BetaA,
    /// Beta union the b-relation.
    BetaB,
}

impl RelKind {
    pub fn has_beta(self) -> bool {
        matches!(self, RelKind::Beta | RelKind::BetaA | RelKind::BetaB)
    }
    pub fn has_rules(self) -> bool {
        !matches!(self, RelKind::Beta)
    }
}

/// Stratification level: a concrete stratum or the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Finite(u32),
    Omega,
}

/// Base of the b-family stratification: empty, or the full a-relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BBase {
    #[default]
    Empty,
    FullA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSpec {
    pub kind: RelKind,
    pub level: Level,
    pub b_base: BBase,
}

impl RelationSpec {
    pub fn new(kind: RelKind) -> RelationSpec {
        RelationSpec {
            kind,
            level: Level::Omega,
            b_base: BBase::Empty,
        }
    }
    pub fn at(mut self, level: Level) -> RelationSpec {
        self.level = level;
        self
    }
    pub fn at_level(self, n: u32) -> RelationSpec {
        self.at(Level::Finite(n))
    }
    pub fn with_base(mut self, b_base: BBase) -> RelationSpec {
        self.b_base = b_base;
        self
    }
}

impl std::fmt::Display for RelationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            RelKind::Beta => "beta",
            RelKind::A => "a",
            RelKind::B => "b",
            RelKind::BetaA => "beta-a",
            RelKind::BetaB => "beta-b",
        };
        write!(f, "{kind}")?;
        if self.kind != RelKind::Beta {
            match self.level {
                Level::Finite(n) => write!(f, "@{n}")?,
                Level::Omega => write!(f, "@omega")?,
            }
        }
        if matches!(self.kind, RelKind::B | RelKind::BetaB) && self.b_base == BBase::FullA {
            write!(f, "+base=a")?;
        }
        Ok(())
    }
}

/// Search bounds for the engine. Levels, join searches, and graphs are all
/// cut off by these; verdicts depending on a cut are reported as unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepBudget {
    /// Working level substituted for omega.
    pub max_level: u32,
    /// Depth bound on join searches and reduction graphs.
    pub join_depth: u32,
    /// Step bound for normalization.
    pub beta_fuel: u64,
    /// Node bound on join searches and reduction graphs.
    pub max_graph: usize,
}

impl Default for StepBudget {
    fn default() -> StepBudget {
        StepBudget {
            max_level: 5,
            join_depth: 50,
            beta_fuel: 10_000,
            max_graph: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    Beta,
    Rule(String),
}

impl std::fmt::Display for StepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepKind::Beta => write!(f, "beta"),
            StepKind::Rule(name) => write!(f, "rule {name}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub pos: Position,
    pub kind: StepKind,
    pub result: Term,
}

/// One-step reducts. `complete` is false when some rule application could
/// not be decided within budget; an empty incomplete set is not a proof of
/// normality, and searches built on it must not report negative verdicts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepSet {
    pub steps: Vec<Step>,
    pub complete: bool,
}

/// Three-valued answer of the bounded join decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinDecision {
    Yes,
    No,
    Unknown,
}

/// A recorded reduction sequence, each rule step justified by the joins of
/// its instantiated conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub start: Term,
    pub steps: Vec<DerivStep>,
}

impl Derivation {
    pub fn empty(start: Term) -> Derivation {
        Derivation {
            start,
            steps: Vec::new(),
        }
    }
    pub fn end(&self) -> &Term {
        self.steps.last().map(|s| &s.result).unwrap_or(&self.start)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivStep {
    pub pos: Position,
    pub kind: StepKind,
    pub conditions: Vec<CondJustification>,
    pub result: Term,
}

/// Evidence that one instantiated condition joins: the two instance terms,
/// the meet found, and the reduction of each side to the meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondJustification {
    pub index: usize,
    pub lhs_instance: Term,
    pub rhs_instance: Term,
    pub witness: Term,
    pub left: Derivation,
    pub right: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JoinVerdict {
    Joinable {
        witness: Term,
        left: Derivation,
        right: Derivation,
    },
    NotJoinable,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizeResult {
    NormalForm { term: Term, derivation: Derivation },
    FuelExhausted { partial: Term, derivation: Derivation },
    /// Reduction stopped but an undecided rule application remains: the
    /// result cannot be certified normal.
    Undecided { partial: Term, derivation: Derivation },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParallelFlavor {
    /// Structural closure plus rule/beta contraction with the substitution
    /// itself reduced in parallel below the contractum.
    Nested,
    /// Parallel closure of one-step: simultaneous contraction of an
    /// antichain of redexes, nothing reduced inside contracta.
    Flat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelSet {
    pub terms: Vec<Term>,
    pub complete: bool,
}

/// Bounded forward-closure graph under one relation.
#[derive(Clone, Debug)]
pub struct ReductionGraph {
    pub nodes: Vec<GraphNode>,
    /// True when every node was expanded with a decided step set and every
    /// successor is present: the graph is the whole forward closure.
    pub complete: bool,
    index: HashMap<Vec<u8>, usize>,
}

#[derive(Clone, Debug)]
pub struct GraphNode {
    pub term: Term,
    pub depth: u32,
    /// Outgoing steps; `None` targets were cut off by the budget.
    pub edges: Vec<(Step, Option<usize>)>,
    /// The node's step set was computed without undecided applications.
    pub decided: bool,
    /// Breadth-first discovery edge, for path reconstruction.
    pub parent: Option<(usize, Step)>,
}

impl ReductionGraph {
    pub fn root(&self) -> &Term {
        &self.nodes[0].term
    }

    pub fn node_of(&self, t: &Term) -> Option<usize> {
        self.index.get(&t.canon_bytes()).copied()
    }

    /// Forward closure of a node inside the graph, with a closedness flag:
    /// closed means every reachable node is decided and no edge was cut, so
    /// the returned set is the true complete closure.
    pub fn descendant_closure(&self, start: usize) -> (BTreeSet<usize>, bool) {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        let mut closed = true;
        while let Some(i) = queue.pop_front() {
            let node = &self.nodes[i];
            closed &= node.decided;
            for (_, tgt) in &node.edges {
                match tgt {
                    Some(j) => {
                        if seen.insert(*j) {
                            queue.push_back(*j);
                        }
                    }
                    None => closed = false,
                }
            }
        }
        (seen, closed)
    }

    /// Steps along the discovery path from the root to a node.
    pub fn path_to(&self, node: usize) -> Vec<Step> {
        let mut steps = Vec::new();
        let mut cur = node;
        while let Some((parent, step)) = &self.nodes[cur].parent {
            steps.push(step.clone());
            cur = *parent;
        }
        steps.reverse();
        steps
    }

    /// Graphviz rendering; node 0 is the root.
    pub fn to_dot(&self) -> String {
        fn esc(s: &str) -> String {
            s.replace('\\', "\\\\").replace('"', "\\\"")
        }
        let mut out = String::from("digraph reduction {\n  rankdir=LR;\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let shape = if i == 0 { " shape=box" } else { "" };
            out.push_str(&format!(
                "  n{i} [label=\"{}\"{shape}];\n",
                esc(&node.term.to_string())
            ));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for (step, tgt) in &node.edges {
                let label = match &step.kind {
                    StepKind::Beta => "beta".to_string(),
                    StepKind::Rule(name) => esc(name),
                };
                match tgt {
                    Some(j) => out.push_str(&format!("  n{i} -> n{j} [label=\"{label}\"];\n")),
                    None => out.push_str(&format!(
                        "  n{i} -> cut{i} [label=\"{label}\" style=dashed];\n"
                    )),
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// True when the term can take no step under any relation here: closed,
/// beta-normal, and free of defined symbols.
pub fn is_inert(t: &Term, sys: &RewriteSystem) -> bool {
    free_vars(t).is_empty()
        && beta_redexes(t).is_empty()
        && !has_defined_symbol(t, &sys.signature)
}

pub fn has_defined_symbol(t: &Term, sig: &Signature) -> bool {
    match t {
        Term::Var(_) => false,
        Term::Const(c) => sig.is_defined(c),
        Term::App(f, a) => has_defined_symbol(f, sig) || has_defined_symbol(a, sig),
        Term::Lam(_, b) => has_defined_symbol(b, sig),
    }
}

/// How rule steps are produced at a given spec.
enum RuleMode {
    /// No rule steps at this level.
    None,
    /// Rule steps are exactly those of another spec (b-family base).
    Delegate(RelationSpec),
    /// Rules fire when conditions join under the given spec.
    Cond(RelationSpec),
}

pub struct Engine<'a> {
    sys: &'a RewriteSystem,
    budget: StepBudget,
    step_memo: HashMap<(Vec<u8>, RelationSpec), StepSet>,
    join_memo: HashMap<(Vec<u8>, Vec<u8>, RelationSpec), JoinDecision>,
}

impl<'a> Engine<'a> {
    pub fn new(sys: &'a RewriteSystem) -> Engine<'a> {
        Engine::with_budget(sys, StepBudget::default())
    }

    pub fn with_budget(sys: &'a RewriteSystem, budget: StepBudget) -> Engine<'a> {
        Engine {
            sys,
            budget,
            step_memo: HashMap::new(),
            join_memo: HashMap::new(),
        }
    }

    pub fn system(&self) -> &'a RewriteSystem {
        self.sys
    }

    pub fn budget(&self) -> StepBudget {
        self.budget
    }

    /// Resolves omega to the working level and drops fields the kind
    /// ignores, so memo entries coincide for equal relations.
    fn canonical(&self, spec: RelationSpec) -> RelationSpec {
        let level = match spec.level {
            Level::Omega => Level::Finite(self.budget.max_level),
            f => f,
        };
        match spec.kind {
            RelKind::Beta => RelationSpec {
                kind: RelKind::Beta,
                level: Level::Finite(0),
                b_base: BBase::Empty,
            },
            RelKind::A | RelKind::BetaA => RelationSpec {
                kind: spec.kind,
                level,
                b_base: BBase::Empty,
            },
            RelKind::B | RelKind::BetaB => RelationSpec {
                kind: spec.kind,
                level,
                b_base: spec.b_base,
            },
        }
    }

    fn rule_mode(&self, spec: RelationSpec) -> RuleMode {
        let n = match spec.level {
            Level::Finite(n) => n,
            Level::Omega => self.budget.max_level,
        };
        match spec.kind {
            RelKind::Beta => RuleMode::None,
            RelKind::A | RelKind::BetaA => {
                if n == 0 {
                    RuleMode::None
                } else {
                    RuleMode::Cond(RelationSpec::new(RelKind::A).at_level(n - 1))
                }
            }
            RelKind::B | RelKind::BetaB => {
                if n == 0 {
                    match spec.b_base {
                        BBase::Empty => RuleMode::None,
                        BBase::FullA => RuleMode::Delegate(RelationSpec::new(RelKind::A)),
                    }
                } else {
                    RuleMode::Cond(
                        RelationSpec::new(RelKind::BetaB)
                            .at_level(n - 1)
                            .with_base(spec.b_base),
                    )
                }
            }
        }
    }

    /// The relation under which a rule step's conditions are justified, seen
    /// through any base delegation. None when `spec` admits no rule steps.
    fn rule_cond_spec(&self, spec: RelationSpec) -> Option<RelationSpec> {
        match self.rule_mode(spec) {
            RuleMode::None => None,
            RuleMode::Cond(c) => Some(c),
            RuleMode::Delegate(inner) => self.rule_cond_spec(self.canonical(inner)),
        }
    }

    /// All one-step reducts of `t` under the relation, sorted by position,
    /// kind, and result.
    pub fn one_step_reducts(&mut self, t: &Term, spec: RelationSpec) -> StepSet {
        self.one_step_reducts_keyed(t, t.canon_bytes(), spec)
    }

    /// As `one_step_reducts`, for callers that already hold `t.canon_bytes()`.
    fn one_step_reducts_keyed(&mut self, t: &Term, canon: Vec<u8>, spec: RelationSpec) -> StepSet {
        let spec = self.canonical(spec);
        let key = (canon, spec);
        if let Some(cached) = self.step_memo.get(&key) {
            return cached.clone();
        }
        let mut steps = Vec::new();
        let mut complete = true;
        if spec.kind.has_beta() {
            for pos in beta_redexes(t) {
                let result = contract(t, &pos).expect("enumerated redex contracts");
                steps.push(Step {
                    pos,
                    kind: StepKind::Beta,
                    result,
                });
            }
        }
        match self.rule_mode(spec) {
            RuleMode::None => {}
            RuleMode::Delegate(inner) => {
                let inner = self.canonical(inner);
                let base = self.one_step_reducts(t, inner);
                complete &= base.complete;
                steps.extend(base.steps.into_iter().filter(|s| s.kind != StepKind::Beta));
            }
            RuleMode::Cond(cspec) => {
                let mut pos = Vec::new();
                self.rule_steps_at(t, t, &mut pos, cspec, &mut steps, &mut complete);
            }
        }
        // Position, then kind, then result class; ties beyond kind only
        // occur between exact duplicates, so the canon comparison is lazy.
        fn rank(k: &StepKind) -> (u8, &str) {
            match k {
                StepKind::Beta => (0, ""),
                StepKind::Rule(n) => (1, n.as_str()),
            }
        }
        steps.sort_by(|a, b| {
            a.pos
                .cmp(&b.pos)
                .then_with(|| rank(&a.kind).cmp(&rank(&b.kind)))
                .then_with(|| a.result.canon_bytes().cmp(&b.result.canon_bytes()))
        });
        steps.dedup_by(|a, b| a.pos == b.pos && a.kind == b.kind && a.result == b.result);
        let set = StepSet { steps, complete };
        self.step_memo.insert(key, set.clone());
        set
    }

    fn rule_steps_at(
        &mut self,
        root: &Term,
        t: &Term,
        pos: &mut Position,
        cspec: RelationSpec,
        steps: &mut Vec<Step>,
        complete: &mut bool,
    ) {
        let sys = self.sys;
        let (head, args) = t.spine();
        if let Term::Const(h) = head {
            for rule in &sys.rules {
                if rule.head() != h || lhs_arg_count(rule) != args.len() {
                    continue;
                }
                let sub = match_term(&rule.lhs, t).expect("rule patterns are algebraic");
                let Some(sub) = sub else { continue };
                let mut failed = false;
                let mut undecided = false;
                for cond in &rule.conditions {
                    let d = substitute(&cond.lhs, &sub);
                    let c = substitute(&cond.rhs, &sub);
                    match self.join_decide(&d, &c, cspec) {
                        JoinDecision::Yes => {}
                        JoinDecision::No => {
                            failed = true;
                            break;
                        }
                        JoinDecision::Unknown => undecided = true,
                    }
                }
                if failed {
                    continue;
                }
                if undecided {
                    *complete = false;
                    continue;
                }
                let contractum = substitute(&rule.rhs, &sub);
                let result = replace_at_unchecked(root, pos, &contractum)
                    .expect("enumerated position is valid");
                steps.push(Step {
                    pos: pos.clone(),
                    kind: StepKind::Rule(rule.name.clone()),
                    result,
                });
            }
        }
        match t {
            Term::App(f, a) => {
                pos.push(1);
                self.rule_steps_at(root, f, pos, cspec, steps, complete);
                pos.pop();
                pos.push(2);
                self.rule_steps_at(root, a, pos, cspec, steps, complete);
                pos.pop();
            }
            Term::Lam(_, b) => {
                pos.push(1);
                self.rule_steps_at(root, b, pos, cspec, steps, complete);
                pos.pop();
            }
            _ => {}
        }
    }

    /// Bounded three-valued joinability, memoized without traces. `No` is
    /// only returned from fully closed, fully decided searches.
    pub fn join_decide(&mut self, l: &Term, r: &Term, spec: RelationSpec) -> JoinDecision {
        let spec = self.canonical(spec);
        if l == r {
            return JoinDecision::Yes;
        }
        let (cl, cr) = (l.canon_bytes(), r.canon_bytes());
        let key = if cl <= cr {
            (cl, cr, spec)
        } else {
            (cr, cl, spec)
        };
        if let Some(&cached) = self.join_memo.get(&key) {
            return cached;
        }
        let decision = if is_inert(r, self.sys) {
            self.reaches(l, r, spec)
        } else if is_inert(l, self.sys) {
            self.reaches(r, l, spec)
        } else {
            self.join_two_sided(l, r, spec)
        };
        self.join_memo.insert(key, decision);
        decision
    }

    /// Single-sided search for an inert target.
    fn reaches(&mut self, from: &Term, target: &Term, spec: RelationSpec) -> JoinDecision {
        let mut visited = HashSet::from([from.canon_bytes()]);
        let mut queue = VecDeque::from([(from.clone(), 0u32)]);
        let mut complete = true;
        while let Some((t, depth)) = queue.pop_front() {
            let ss = self.one_step_reducts(&t, spec);
            complete &= ss.complete;
            for step in ss.steps {
                if step.result == *target {
                    return JoinDecision::Yes;
                }
                let c = step.result.canon_bytes();
                if visited.contains(&c) {
                    continue;
                }
                if visited.len() >= self.budget.max_graph || depth + 1 > self.budget.join_depth {
                    complete = false;
                    continue;
                }
                visited.insert(c);
                queue.push_back((step.result, depth + 1));
            }
        }
        if complete {
            JoinDecision::No
        } else {
            JoinDecision::Unknown
        }
    }

    fn join_two_sided(&mut self, l: &Term, r: &Term, spec: RelationSpec) -> JoinDecision {
        // Left closure first, with an early exit if it walks onto `r`.
        let mut left = HashSet::from([l.canon_bytes()]);
        let mut queue = VecDeque::from([(l.clone(), 0u32)]);
        let mut left_complete = true;
        let r_canon = r.canon_bytes();
        while let Some((t, depth)) = queue.pop_front() {
            let ss = self.one_step_reducts(&t, spec);
            left_complete &= ss.complete;
            for step in ss.steps {
                let c = step.result.canon_bytes();
                if c == r_canon {
                    return JoinDecision::Yes;
                }
                if left.contains(&c) {
                    continue;
                }
                if left.len() >= self.budget.max_graph || depth + 1 > self.budget.join_depth {
                    left_complete = false;
                    continue;
                }
                left.insert(c);
                queue.push_back((step.result, depth + 1));
            }
        }
        // Right closure, testing membership in the left one.
        let mut right = HashSet::from([r.canon_bytes()]);
        let mut queue = VecDeque::from([(r.clone(), 0u32)]);
        let mut right_complete = true;
        while let Some((t, depth)) = queue.pop_front() {
            let ss = self.one_step_reducts(&t, spec);
            right_complete &= ss.complete;
            for step in ss.steps {
                let c = step.result.canon_bytes();
                if left.contains(&c) {
                    return JoinDecision::Yes;
                }
                if right.contains(&c) {
                    continue;
                }
                if right.len() >= self.budget.max_graph || depth + 1 > self.budget.join_depth {
                    right_complete = false;
                    continue;
                }
                right.insert(c);
                queue.push_back((step.result, depth + 1));
            }
        }
        if left_complete && right_complete {
            JoinDecision::No
        } else {
            JoinDecision::Unknown
        }
    }

    /// Bounded breadth-first forward closure from `root`.
    pub fn explore_graph(&mut self, root: &Term, spec: RelationSpec) -> ReductionGraph {
        let spec = self.canonical(spec);
        let mut nodes = vec![GraphNode {
            term: root.clone(),
            depth: 0,
            edges: Vec::new(),
            decided: false,
            parent: None,
        }];
        let mut index = HashMap::from([(root.canon_bytes(), 0usize)]);
        let mut canons = vec![root.canon_bytes()];
        let mut queue = VecDeque::from([0usize]);
        let mut complete = true;
        while let Some(i) = queue.pop_front() {
            let term = nodes[i].term.clone();
            let depth = nodes[i].depth;
            let ss = self.one_step_reducts_keyed(&term, canons[i].clone(), spec);
            nodes[i].decided = ss.complete;
            complete &= ss.complete;
            let mut edges = Vec::with_capacity(ss.steps.len());
            for step in ss.steps {
                let c = step.result.canon_bytes();
                let tgt = match index.get(&c) {
                    Some(&j) => Some(j),
                    None => {
                        if nodes.len() >= self.budget.max_graph
                            || depth + 1 > self.budget.join_depth
                        {
                            complete = false;
                            None
                        } else {
                            let j = nodes.len();
                            nodes.push(GraphNode {
                                term: step.result.clone(),
                                depth: depth + 1,
                                edges: Vec::new(),
                                decided: false,
                                parent: Some((i, step.clone())),
                            });
                            canons.push(c.clone());
                            index.insert(c, j);
                            queue.push_back(j);
                            Some(j)
                        }
                    }
                };
                edges.push((step, tgt));
            }
            nodes[i].edges = edges;
        }
        ReductionGraph {
            nodes,
            complete,
            index,
        }
    }

    /// Full joinability with recorded traces. `NotJoinable` requires both
    /// forward closures to be complete and disjoint.
    pub fn joinable(&mut self, l: &Term, r: &Term, spec: RelationSpec) -> JoinVerdict {
        let spec = self.canonical(spec);
        if l == r {
            return JoinVerdict::Joinable {
                witness: l.clone(),
                left: Derivation::empty(l.clone()),
                right: Derivation::empty(r.clone()),
            };
        }
        let g_l = self.explore_graph(l, spec);
        if let Some(j) = g_l.node_of(r) {
            let left = self.record_derivation(l, &g_l.path_to(j), spec);
            return JoinVerdict::Joinable {
                witness: g_l.nodes[j].term.clone(),
                left,
                right: Derivation::empty(r.clone()),
            };
        }
        let g_r = self.explore_graph(r, spec);
        let mut best: Option<(u32, CanonTerm, usize, usize)> = None;
        for (ri, node) in g_r.nodes.iter().enumerate() {
            if let Some(li) = g_l.node_of(&node.term) {
                let cand = (
                    g_l.nodes[li].depth + node.depth,
                    node.term.canon(),
                    li,
                    ri,
                );
                if best.as_ref().is_none_or(|b| (cand.0, &cand.1) < (b.0, &b.1)) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some((_, _, li, ri)) => {
                let left = self.record_derivation(l, &g_l.path_to(li), spec);
                let right = self.record_derivation(r, &g_r.path_to(ri), spec);
                JoinVerdict::Joinable {
                    witness: g_l.nodes[li].term.clone(),
                    left,
                    right,
                }
            }
            None => {
                if g_l.complete && g_r.complete {
                    JoinVerdict::NotJoinable
                } else {
                    JoinVerdict::Unknown
                }
            }
        }
    }

    /// Deterministic reduction to a normal form: repeatedly take the least
    /// step (by position, then kind) until none remain or fuel runs out.
    pub fn normalize(&mut self, t: &Term, spec: RelationSpec) -> NormalizeResult {
        let spec = self.canonical(spec);
        let mut cur = t.clone();
        let mut path: Vec<Step> = Vec::new();
        loop {
            let ss = self.one_step_reducts(&cur, spec);
            if ss.steps.is_empty() {
                let derivation = self.record_derivation(t, &path, spec);
                return if ss.complete {
                    NormalizeResult::NormalForm {
                        term: cur,
                        derivation,
                    }
                } else {
                    NormalizeResult::Undecided {
                        partial: cur,
                        derivation,
                    }
                };
            }
            if (path.len() as u64) >= self.budget.beta_fuel {
                let derivation = self.record_derivation(t, &path, spec);
                return NormalizeResult::FuelExhausted {
                    partial: cur,
                    derivation,
                };
            }
            let step = ss.steps[0].clone();
            cur = step.result.clone();
            path.push(step);
        }
    }

    /// Rebuilds a fully justified derivation along a recorded step path.
    pub fn record_derivation(
        &mut self,
        start: &Term,
        path: &[Step],
        spec: RelationSpec,
    ) -> Derivation {
        let spec = self.canonical(spec);
        let mut cur = start.clone();
        let mut steps = Vec::with_capacity(path.len());
        for step in path {
            let conditions = match &step.kind {
                StepKind::Beta => Vec::new(),
                StepKind::Rule(name) => {
                    let rule = self.sys.rule(name).expect("recorded rule exists");
                    let redex = subterm_at(&cur, &step.pos).expect("recorded position valid");
                    let sub = match_term(&rule.lhs, redex)
                        .expect("rule patterns are algebraic")
                        .expect("recorded step re-matches its rule");
                    let cspec = self
                        .rule_cond_spec(spec)
                        .expect("rule step implies conditions decidable");
                    let rule_conditions = rule.conditions.clone();
                    rule_conditions
                        .iter()
                        .enumerate()
                        .map(|(index, cond)| {
                            let d = substitute(&cond.lhs, &sub);
                            let c = substitute(&cond.rhs, &sub);
                            match self.joinable(&d, &c, cspec) {
                                JoinVerdict::Joinable {
                                    witness,
                                    left,
                                    right,
                                } => CondJustification {
                                    index,
                                    lhs_instance: d,
                                    rhs_instance: c,
                                    witness,
                                    left,
                                    right,
                                },
                                _ => unreachable!("condition re-verifies as joinable"),
                            }
                        })
                        .collect()
                }
            };
            cur = step.result.clone();
            steps.push(DerivStep {
                pos: step.pos.clone(),
                kind: step.kind.clone(),
                conditions,
                result: cur.clone(),
            });
        }
        Derivation {
            start: start.clone(),
            steps,
        }
    }

    /// Parallel reducts of `t`: simultaneous contraction of redexes, nested
    /// or flat. Always contains `t`. The set is incomplete when some rule
    /// applicability was undecided.
    pub fn parallel_reducts(
        &mut self,
        t: &Term,
        spec: RelationSpec,
        flavor: ParallelFlavor,
        cap: usize,
    ) -> Result<ParallelSet, EngineError> {
        let spec = self.canonical(spec);
        let mut complete = true;
        let mut terms = self.par(t, spec, flavor, cap, &mut complete)?;
        terms.sort_by_cached_key(|u| u.canon());
        Ok(ParallelSet { terms, complete })
    }

    fn par(
        &mut self,
        t: &Term,
        spec: RelationSpec,
        flavor: ParallelFlavor,
        cap: usize,
        complete: &mut bool,
    ) -> Result<Vec<Term>, EngineError> {
        let mut out: Vec<Term> = Vec::new();
        let mut seen: HashSet<CanonTerm> = HashSet::new();
        let mut add = |term: Term, out: &mut Vec<Term>| -> Result<(), EngineError> {
            if seen.insert(term.canon()) {
                if out.len() >= cap {
                    return Err(EngineError::SizeLimit(cap));
                }
                out.push(term);
            }
            Ok(())
        };
        match t {
            Term::Var(_) | Term::Const(_) => add(t.clone(), &mut out)?,
            Term::Lam(x, b) => {
                for b2 in self.par(b, spec, flavor, cap, complete)? {
                    add(Term::lam(x.clone(), b2), &mut out)?;
                }
            }
            Term::App(f, a) => {
                let fs = self.par(f, spec, flavor, cap, complete)?;
                let args = self.par(a, spec, flavor, cap, complete)?;
                for f2 in &fs {
                    for a2 in &args {
                        add(Term::app(f2.clone(), a2.clone()), &mut out)?;
                    }
                }
                if spec.kind.has_beta() {
                    if let Term::Lam(x, body) = f.as_ref() {
                        match flavor {
                            ParallelFlavor::Nested => {
                                for b2 in self.par(body, spec, flavor, cap, complete)? {
                                    for a2 in &args {
                                        let contracted = substitute(
                                            &b2,
                                            &Substitution::singleton(x.clone(), a2.clone()),
                                        );
                                        add(contracted, &mut out)?;
                                    }
                                }
                            }
                            ParallelFlavor::Flat => {
                                let contracted = substitute(
                                    body,
                                    &Substitution::singleton(x.clone(), a.as_ref().clone()),
                                );
                                add(contracted, &mut out)?;
                            }
                        }
                    }
                }
            }
        }
        if spec.kind.has_rules() {
            if let Some(cspec) = self.rule_cond_spec(spec) {
                let (head, args) = t.spine();
                if let Term::Const(h) = head {
                    let hname = h.clone();
                    let nargs = args.len();
                    let rules: Vec<Rule> = self
                        .sys
                        .rules
                        .iter()
                        .filter(|r| r.head() == hname && lhs_arg_count(r) == nargs)
                        .cloned()
                        .collect();
                    for rule in rules {
                        let sub = match_term(&rule.lhs, t).expect("rule patterns are algebraic");
                        let Some(sub) = sub else { continue };
                        let mut failed = false;
                        let mut undecided = false;
                        for cond in &rule.conditions {
                            let d = substitute(&cond.lhs, &sub);
                            let c = substitute(&cond.rhs, &sub);
                            match self.join_decide(&d, &c, cspec) {
                                JoinDecision::Yes => {}
                                JoinDecision::No => {
                                    failed = true;
                                    break;
                                }
                                JoinDecision::Unknown => undecided = true,
                            }
                        }
                        if failed {
                            continue;
                        }
                        if undecided {
                            *complete = false;
                            continue;
                        }
                        match flavor {
                            ParallelFlavor::Flat => {
                                add(substitute(&rule.rhs, &sub), &mut out)?;
                            }
                            ParallelFlavor::Nested => {
                                // Images of variables used by the right-hand
                                // side reduce in parallel below the step.
                                let rhs_vars: Vec<String> =
                                    free_vars(&rule.rhs).into_iter().collect();
                                let mut image_sets: Vec<Vec<Term>> = Vec::new();
                                for v in &rhs_vars {
                                    let img = sub.get(v).expect("match binds lhs variables");
                                    image_sets
                                        .push(self.par(&img.clone(), spec, flavor, cap, complete)?);
                                }
                                let mut counters = vec![0usize; rhs_vars.len()];
                                loop {
                                    let tau: Substitution = rhs_vars
                                        .iter()
                                        .enumerate()
                                        .map(|(k, v)| (v.clone(), image_sets[k][counters[k]].clone()))
                                        .collect();
                                    add(substitute(&rule.rhs, &tau), &mut out)?;
                                    // Odometer over the image sets.
                                    let mut k = 0;
                                    loop {
                                        if k == counters.len() {
                                            break;
                                        }
                                        counters[k] += 1;
                                        if counters[k] < image_sets[k].len() {
                                            break;
                                        }
                                        counters[k] = 0;
                                        k += 1;
                                    }
                                    if k == counters.len() {
                                        break;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn lhs_arg_count(rule: &Rule) -> usize {
    rule.lhs.spine().1.len()
}

/// Text rendering of a derivation: a `start` line, then one line per step
/// (`position kind result`), each rule step followed by its condition
/// justifications and their sub-derivations, indented two spaces per level.
pub fn render_derivation(d: &Derivation) -> String {
    fn pad(out: &mut String, indent: usize) {
        for _ in 0..indent {
            out.push(' ');
        }
    }
    fn rec(d: &Derivation, indent: usize, out: &mut String) {
        pad(out, indent);
        out.push_str(&format!("start {}\n", d.start));
        for step in &d.steps {
            pad(out, indent);
            out.push_str(&format!(
                "{} {} {}\n",
                format_position(&step.pos),
                step.kind,
                step.result
            ));
            for cj in &step.conditions {
                pad(out, indent + 2);
                out.push_str(&format!(
                    "cond {} = {} meet {}\n",
                    cj.lhs_instance, cj.rhs_instance, cj.witness
                ));
                rec(&cj.left, indent + 4, out);
                rec(&cj.right, indent + 4, out);
            }
        }
    }
    let mut out = String::new();
    rec(d, 0, &mut out);
    out.pop();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_system, parse_term};

    const TREE: &str = "
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

    const MINUS: &str = "
        sig minus: 2; sig zero: 0; sig s: 1;
        rule m_eq: x = y => minus x y -> zero;
        rule m_gap: s x = y => minus x y -> s zero;
    ";

    fn tree() -> RewriteSystem {
        parse_system(TREE).unwrap()
    }
    fn minus() -> RewriteSystem {
        parse_system(MINUS).unwrap()
    }
    fn t(sys: &RewriteSystem, s: &str) -> Term {
        let consts = sys.signature.symbols().map(|(n, _)| n.clone()).collect();
        parse_term(s, &consts).unwrap()
    }

    #[test]
    fn conditional_rule_fires_when_its_condition_joins() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "occ (cons zero nil) (nd a (cons (nd b nil) nil))");
        let ss = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A));
        assert!(ss.complete);
        assert_eq!(ss.steps.len(), 1);
        assert_eq!(ss.steps[0].kind, StepKind::Rule("occ_in".into()));
        assert_eq!(
            ss.steps[0].result,
            t(&sys, "occ nil (get (cons (nd b nil) nil) zero)")
        );
    }

    #[test]
    fn level_zero_and_level_one_stratification() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "occ (cons zero nil) (nd a (cons (nd b nil) nil))");
        // Level 0: no rule steps at all.
        let ss0 = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A).at_level(0));
        assert!(ss0.steps.is_empty() && ss0.complete);
        // Level 1: the condition needs level-1 joins itself, so the root
        // rules are decisively inapplicable and nothing else matches.
        let ss1 = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A).at_level(1));
        assert!(ss1.steps.is_empty() && ss1.complete);
        // Level 2 reaches the step.
        let ss2 = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A).at_level(2));
        assert_eq!(ss2.steps.len(), 1);
    }

    #[test]
    fn level_monotonicity_on_nested_conditions() {
        let sys = minus();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "minus (minus zero zero) zero");
        let ss1 = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A).at_level(1));
        assert_eq!(
            ss1.steps
                .iter()
                .map(|s| (s.pos.clone(), s.kind.clone()))
                .collect::<Vec<_>>(),
            vec![(vec![1, 2], StepKind::Rule("m_eq".into()))]
        );
        let ss2 = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A).at_level(2));
        let kinds: Vec<_> = ss2
            .steps
            .iter()
            .map(|s| (s.pos.clone(), s.kind.clone()))
            .collect();
        assert_eq!(
            kinds,
            vec![
                (vec![], StepKind::Rule("m_eq".into())),
                (vec![1, 2], StepKind::Rule("m_eq".into())),
            ]
        );
        // Every level-1 step survives at level 2.
        for s in &ss1.steps {
            assert!(ss2.steps.contains(s));
        }
    }

    #[test]
    fn beta_and_rule_steps_combine_in_order() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "len (cons ((\\x. x) a) nil)");
        let combined = eng.one_step_reducts(&term, RelationSpec::new(RelKind::BetaA));
        let kinds: Vec<_> = combined
            .steps
            .iter()
            .map(|s| (s.pos.clone(), s.kind.clone()))
            .collect();
        assert_eq!(
            kinds,
            vec![
                (vec![], StepKind::Rule("len_cons".into())),
                (vec![2, 1, 2], StepKind::Beta),
            ]
        );
        let pure = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A));
        assert_eq!(pure.steps.len(), 1);
        assert_eq!(pure.steps[0].kind, StepKind::Rule("len_cons".into()));
    }

    #[test]
    fn b_base_changes_low_level_joins() {
        // h's condition joins only through a rule step, which the empty
        // level-0 base cannot supply but the full-a base can.
        let sys = parse_system(
            "sig minus: 2; sig zero: 0; sig s: 1; sig h: 0; sig a: 0;
             rule m_eq: x = y => minus x y -> zero;
             rule h_fire: minus zero zero = zero => h -> a;",
        )
        .unwrap();
        let mut eng = Engine::new(&sys);
        let h = t(&sys, "h");
        let empty = eng.one_step_reducts(&h, RelationSpec::new(RelKind::B).at_level(1));
        assert!(empty.steps.is_empty() && empty.complete);
        let full = eng.one_step_reducts(
            &h,
            RelationSpec::new(RelKind::B)
                .at_level(1)
                .with_base(BBase::FullA),
        );
        assert_eq!(full.steps.len(), 1);
        assert_eq!(full.steps[0].result, t(&sys, "a"));
    }

    #[test]
    fn beta_in_condition_joins_separates_the_families() {
        let sys = parse_system(
            "sig f: 1; sig a: 0; sig b: 0; sig d: 0;
             rule f_cond: x = d => f x -> a;
             rule f_b: f x -> b;",
        )
        .unwrap();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "f ((\\z. d) b)");
        // Without beta the condition (\z. d) b ~ d is decisively stuck.
        let a_side = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A));
        let a_kinds: Vec<_> = a_side.steps.iter().map(|s| s.kind.clone()).collect();
        assert!(a_side.complete);
        assert_eq!(a_kinds, vec![StepKind::Rule("f_b".into())]);
        // With beta in condition joins, f_cond fires too.
        let b_side = eng.one_step_reducts(&term, RelationSpec::new(RelKind::B));
        let b_kinds: Vec<_> = b_side.steps.iter().map(|s| s.kind.clone()).collect();
        assert_eq!(
            b_kinds,
            vec![
                StepKind::Rule("f_b".into()),
                StepKind::Rule("f_cond".into())
            ]
        );
    }

    #[test]
    fn joinable_records_full_traces() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "occ (cons zero nil) (nd a (cons (nd b nil) nil))");
        let tt = t(&sys, "tt");
        match eng.joinable(&term, &tt, RelationSpec::new(RelKind::A)) {
            JoinVerdict::Joinable {
                witness,
                left,
                right,
            } => {
                assert_eq!(witness, tt);
                assert!(right.steps.is_empty());
                let rendered = render_derivation(&left);
                let expected = "\
start occ (cons zero nil) (nd a (cons (nd b nil) nil))
e rule occ_in occ nil (get (cons (nd b nil) nil) zero)
  cond gt (len (cons (nd b nil) nil)) zero = tt meet tt
    start gt (len (cons (nd b nil) nil)) zero
    1.2 rule len_cons gt (s (len nil)) zero
    e rule gt_s_zero tt
    start tt
e rule occ_nil tt";
                assert_eq!(rendered, expected);
            }
            other => panic!("expected joinable, got {other:?}"),
        }
    }

    #[test]
    fn distinct_constructors_are_not_joinable() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let verdict = eng.joinable(
            &t(&sys, "tt"),
            &t(&sys, "ff"),
            RelationSpec::new(RelKind::BetaA),
        );
        assert_eq!(verdict, JoinVerdict::NotJoinable);
    }

    #[test]
    fn cyclic_beta_graphs_still_close() {
        // (\x. x x) (\x. x x) reduces only to itself: the graph closes on
        // the cycle, so non-joinability with a constant is decisive.
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let omega = t(&sys, "(\\x. x x) (\\x. x x)");
        let verdict = eng.joinable(&omega, &t(&sys, "a"), RelationSpec::new(RelKind::Beta));
        assert_eq!(verdict, JoinVerdict::NotJoinable);
    }

    #[test]
    fn growing_graphs_return_unknown() {
        let sys = tree();
        let budget = StepBudget {
            join_depth: 6,
            max_graph: 40,
            ..StepBudget::default()
        };
        let mut eng = Engine::with_budget(&sys, budget);
        // The unfolding of this fixpoint term grows forever.
        let theta = t(&sys, "(\\u. \\v. v (u u v)) (\\u. \\v. v (u u v)) s");
        let verdict = eng.joinable(&theta, &t(&sys, "a"), RelationSpec::new(RelKind::Beta));
        assert_eq!(verdict, JoinVerdict::Unknown);
    }

    #[test]
    fn normalize_reaches_tree_normal_forms() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "occ (cons zero nil) (nd a (cons (nd b nil) nil))");
        match eng.normalize(&term, RelationSpec::new(RelKind::A)) {
            NormalizeResult::NormalForm { term: nf, derivation } => {
                assert_eq!(nf, t(&sys, "tt"));
                assert_eq!(derivation.steps.len(), 2);
                assert_eq!(derivation.end(), &nf);
            }
            other => panic!("expected a normal form, got {other:?}"),
        }
    }

    #[test]
    fn normalize_flags_undecided_applicability() {
        let sys = parse_system(
            "sig f: 1; sig g: 1; sig s: 1; sig c: 0; sig a: 0; sig tt: 0;
             rule grow: g x -> g (s x);
             rule fr: g c = tt => f c -> a;",
        )
        .unwrap();
        let budget = StepBudget {
            join_depth: 8,
            max_graph: 50,
            ..StepBudget::default()
        };
        let mut eng = Engine::with_budget(&sys, budget);
        match eng.normalize(&t(&sys, "f c"), RelationSpec::new(RelKind::A)) {
            NormalizeResult::Undecided { partial, .. } => {
                assert_eq!(partial, t(&sys, "f c"));
            }
            other => panic!("expected undecided, got {other:?}"),
        }
    }

    #[test]
    fn normalize_runs_out_of_fuel_on_divergence() {
        let sys = minus();
        let budget = StepBudget {
            beta_fuel: 5,
            ..StepBudget::default()
        };
        let mut eng = Engine::with_budget(&sys, budget);
        let theta = t(&sys, "(\\u. \\v. v (u u v)) (\\u. \\v. v (u u v)) s");
        match eng.normalize(&theta, RelationSpec::new(RelKind::Beta)) {
            NormalizeResult::FuelExhausted { derivation, .. } => {
                assert_eq!(derivation.steps.len(), 5);
            }
            other => panic!("expected fuel exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn rewriting_under_binders_recaptures() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "\\x. car (cons x nil)");
        let ss = eng.one_step_reducts(&term, RelationSpec::new(RelKind::A));
        assert_eq!(ss.steps.len(), 1);
        assert_eq!(ss.steps[0].result, t(&sys, "\\x. x"));
    }

    #[test]
    fn graph_exploration_closes_terminating_systems() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let g = eng.explore_graph(&t(&sys, "gt (s zero) zero"), RelationSpec::new(RelKind::A));
        assert!(g.complete);
        assert_eq!(g.nodes.len(), 2);
        let (desc, closed) = g.descendant_closure(0);
        assert_eq!(desc.len(), 2);
        assert!(closed);
        assert_eq!(g.node_of(&t(&sys, "tt")), Some(1));
        assert_eq!(g.path_to(1).len(), 1);
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("gt_s_zero"));
    }

    #[test]
    fn nested_parallel_extends_flat() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let term = t(&sys, "cdr (cons a (cons (car nil) nil))");
        let spec = RelationSpec::new(RelKind::A);
        let flat = eng
            .parallel_reducts(&term, spec, ParallelFlavor::Flat, 10_000)
            .unwrap();
        let nested = eng
            .parallel_reducts(&term, spec, ParallelFlavor::Nested, 10_000)
            .unwrap();
        assert!(flat.complete && nested.complete);
        let want_flat = vec![
            term.clone(),
            t(&sys, "cdr (cons a (cons err nil))"),
            t(&sys, "cons (car nil) nil"),
        ];
        for u in &want_flat {
            assert!(flat.terms.contains(u), "flat set missing {u}");
        }
        assert_eq!(flat.terms.len(), 3);
        for u in &flat.terms {
            assert!(nested.terms.contains(u));
        }
        assert!(nested.terms.contains(&t(&sys, "cons err nil")));
        assert_eq!(nested.terms.len(), 4);
    }

    #[test]
    fn parallel_set_always_contains_the_term() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        for s in ["a", "\\x. gt x zero", "len (cons a nil)"] {
            let term = t(&sys, s);
            for flavor in [ParallelFlavor::Flat, ParallelFlavor::Nested] {
                let set = eng
                    .parallel_reducts(&term, RelationSpec::new(RelKind::BetaA), flavor, 10_000)
                    .unwrap();
                assert!(set.terms.contains(&term));
            }
        }
    }

    #[test]
    fn inertness_classification() {
        let sys = tree();
        assert!(is_inert(&t(&sys, "tt"), &sys));
        assert!(is_inert(&t(&sys, "cons a nil"), &sys));
        assert!(is_inert(&t(&sys, "\\x. x"), &sys));
        assert!(!is_inert(&t(&sys, "len nil"), &sys));
        assert!(!is_inert(&t(&sys, "(\\x. x) a"), &sys));
        assert!(!is_inert(&Term::var("x"), &sys));
    }

    #[test]
    fn spec_display_is_stable() {
        assert_eq!(RelationSpec::new(RelKind::Beta).to_string(), "beta");
        assert_eq!(RelationSpec::new(RelKind::BetaA).to_string(), "beta-a@omega");
        assert_eq!(
            RelationSpec::new(RelKind::BetaB)
                .at_level(3)
                .with_base(BBase::FullA)
                .to_string(),
            "beta-b@3+base=a"
        );
    }

    #[test]
    fn trivial_join_of_equal_terms() {
        let sys = tree();
        let mut eng = Engine::new(&sys);
        let u = t(&sys, "\\x. gt x zero");
        let v = t(&sys, "\\y. gt y zero");
        match eng.joinable(&u, &v, RelationSpec::new(RelKind::BetaA)) {
            JoinVerdict::Joinable { left, right, .. } => {
                assert!(left.steps.is_empty() && right.steps.is_empty());
            }
            other => panic!("expected joinable, got {other:?}"),
        }
    }
}
