//! Lexer and parsers for the term and rule-file grammars.
//!
//! ```text
//! term ::= lam | app        lam ::= '\' ident '.' term
//! app  ::= atom+            atom ::= ident | '(' term ')'
//!
//! file ::= (decl | rule)*
//! decl ::= 'sig' ident ':' nat ';'
//! rule ::= 'rule' ident ':' conds? term '->' term ';'
//! conds ::= cond ('/\' cond)* '=>'   cond ::= term '=' term
//! ```
//!
//! `#` starts a comment running to end of line, except that `#` immediately
//! following an identifier continues it as a fresh-name suffix (`x#3`).
//! Identifiers declared with `sig` denote constants; in rule files every
//! other identifier is a variable. Binders shadow constants.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::system::{Condition, RewriteSystem, Rule};
use crate::term::{classify, free_vars, Signature, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("{0}")]
    Syntax(ParseError),
    #[error("rule `{rule}`: variable `{var}` occurs in the conditions or right-hand side but not in the left-hand side")]
    VariableEscape { rule: String, var: String },
    #[error("rule `{rule}`: left-hand side must be a non-variable algebraic term")]
    NonAlgebraicLhs { rule: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u32),
    Lambda,
    Dot,
    LParen,
    RParen,
    Arrow,
    FatArrow,
    Eq,
    Wedge,
    Semi,
    Colon,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Lambda => write!(f, "`\\`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::FatArrow => write!(f, "`=>`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Wedge => write!(f, "`/\\`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

type Spanned = (Tok, u32, u32);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            if b == b'#' {
                // Comment: fresh-name suffixes are consumed with their
                // identifier below, so a bare '#' here starts a comment.
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match b {
                b'\\' => {
                    self.bump();
                    Tok::Lambda
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b':' => {
                    self.bump();
                    Tok::Colon
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected `>` after `-`"));
                    }
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::FatArrow
                    } else {
                        Tok::Eq
                    }
                }
                b'/' => {
                    self.bump();
                    if self.peek() == Some(b'\\') {
                        self.bump();
                        Tok::Wedge
                    } else {
                        return Err(self.err("expected `\\` after `/`"));
                    }
                }
                b'0'..=b'9' => {
                    let mut n: u32 = 0;
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() {
                            n = n
                                .checked_mul(10)
                                .and_then(|n| n.checked_add((c - b'0') as u32))
                                .ok_or_else(|| self.err("number too large"))?;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Nat(n)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut name = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                            name.push(self.bump() as char);
                        } else {
                            break;
                        }
                    }
                    // A '#' glued to the identifier introduces a numeric
                    // fresh-name suffix, not a comment.
                    if self.peek() == Some(b'#') {
                        let save = (self.pos, self.line, self.col);
                        self.bump();
                        if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                            name.push('#');
                            while let Some(c) = self.peek() {
                                if c.is_ascii_digit() {
                                    name.push(self.bump() as char);
                                } else {
                                    break;
                                }
                            }
                        } else {
                            (self.pos, self.line, self.col) = save;
                        }
                    }
                    Tok::Ident(name)
                }
                c => return Err(self.err(format!("unexpected character `{}`", c as char))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1));
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, _, _)) => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err_here(format!("expected {what}, found end of input"))),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.next(&want.to_string())?;
        if got == want {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.err_here(format!("expected {want}, found {got}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next(what)? {
            Tok::Ident(s) => Ok(s),
            got => {
                self.pos -= 1;
                Err(self.err_here(format!("expected {what}, found {got}")))
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen))
    }

    fn term(&mut self, scope: &mut Vec<String>, resolve: &Resolver) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            self.pos += 1;
            let binder = self.ident("a binder name")?;
            self.expect(Tok::Dot)?;
            scope.push(binder.clone());
            let body = self.term(scope, resolve)?;
            scope.pop();
            return Ok(Term::lam(binder, body));
        }
        let mut cur = self.atom(scope, resolve)?;
        while self.starts_atom() {
            let arg = self.atom(scope, resolve)?;
            cur = Term::app(cur, arg);
        }
        Ok(cur)
    }

    fn atom(&mut self, scope: &mut Vec<String>, resolve: &Resolver) -> Result<Term, ParseError> {
        match self.next("a term")? {
            Tok::Ident(name) => {
                if scope.iter().any(|b| b == &name) {
                    Ok(Term::var(name))
                } else {
                    match resolve {
                        Resolver::Consts(consts) => {
                            if consts.contains(&name) {
                                Ok(Term::cst(name))
                            } else {
                                Ok(Term::var(name))
                            }
                        }
                        Resolver::Strict(consts) => {
                            if consts.contains(&name) {
                                Ok(Term::cst(name))
                            } else {
                                self.pos -= 1;
                                Err(self.err_here(format!("undeclared symbol `{name}`")))
                            }
                        }
                    }
                }
            }
            Tok::LParen => {
                let t = self.term(scope, resolve)?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            got => {
                self.pos -= 1;
                Err(self.err_here(format!("expected a term, found {got}")))
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }
}

enum Resolver<'a> {
    /// Declared names are constants, everything else is a variable.
    Consts(&'a BTreeSet<String>),
    /// Declared names are constants, everything else is an error.
    Strict(&'a BTreeSet<String>),
}

fn parse_one_term(text: &str, resolve: &Resolver) -> Result<Term, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.term(&mut Vec::new(), resolve)?;
    if !p.at_end() {
        return Err(p.err_here("trailing input after term"));
    }
    Ok(t)
}

/// Parses a term. Identifiers found in `consts` become constants, all other
/// identifiers become variables.
pub fn parse_term(text: &str, consts: &BTreeSet<String>) -> Result<Term, ParseError> {
    parse_one_term(text, &Resolver::Consts(consts))
}

/// Parses a term against a signature, rejecting identifiers that are neither
/// bound nor declared. Used for command-line terms and seed files, where an
/// unknown name is almost always a typo.
pub fn parse_term_strict(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let consts: BTreeSet<String> = sig.symbols().map(|(n, _)| n.clone()).collect();
    parse_one_term(text, &Resolver::Strict(&consts))
}

/// Parses a seeds file: one term per line, `#` comments, blank lines ignored.
pub fn parse_seeds(text: &str, sig: &Signature) -> Result<Vec<Term>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let meat = strip_comment(line);
        if meat.trim().is_empty() {
            continue;
        }
        let t = parse_term_strict(meat, sig).map_err(|e| ParseError {
            line: i as u32 + 1,
            col: e.col,
            message: e.message,
        })?;
        out.push(t);
    }
    Ok(out)
}

/// Removes a comment while respecting fresh-name suffixes (`x#3`).
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' {
            let after_ident = i > 0
                && (bytes[i - 1].is_ascii_alphanumeric()
                    || bytes[i - 1] == b'_'
                    || bytes[i - 1] == b'\'');
            let before_digit = bytes.get(i + 1).map(|c| c.is_ascii_digit()).unwrap_or(false);
            if after_ident && before_digit {
                continue;
            }
            return &line[..i];
        }
    }
    line
}

/// Parses a rule file into a rewrite system and validates every rule:
/// the left-hand side must be non-variable algebraic, and all variables of
/// the conditions and right-hand side must occur in the left-hand side.
pub fn parse_system(text: &str) -> Result<RewriteSystem, SystemError> {
    let toks = Lexer::new(text).tokens().map_err(SystemError::Syntax)?;

    // First pass: collect declared constants so rule order never matters.
    // Only `sig` at the start of a statement counts; a variable spelled
    // "sig" inside a rule body stays a variable.
    let mut consts: BTreeSet<String> = BTreeSet::new();
    {
        let mut at_stmt_start = true;
        let mut i = 0;
        while i < toks.len() {
            if at_stmt_start {
                if let (Tok::Ident(kw), _, _) = &toks[i] {
                    if kw == "sig" {
                        if let Some((Tok::Ident(name), _, _)) = toks.get(i + 1) {
                            consts.insert(name.clone());
                        }
                    }
                }
            }
            at_stmt_start = matches!(toks[i].0, Tok::Semi);
            i += 1;
        }
    }

    let mut p = Parser { toks, pos: 0 };
    let mut sig = Signature::new();
    let mut rules: Vec<Rule> = Vec::new();
    let resolver = Resolver::Consts(&consts);

    while !p.at_end() {
        let kw = p.ident("`sig` or `rule`").map_err(SystemError::Syntax)?;
        match kw.as_str() {
            "sig" => {
                let name = p.ident("a symbol name").map_err(SystemError::Syntax)?;
                p.expect(Tok::Colon).map_err(SystemError::Syntax)?;
                let arity = match p.next("an arity").map_err(SystemError::Syntax)? {
                    Tok::Nat(n) => n,
                    got => {
                        p.pos -= 1;
                        return Err(SystemError::Syntax(
                            p.err_here(format!("expected an arity, found {got}")),
                        ));
                    }
                };
                p.expect(Tok::Semi).map_err(SystemError::Syntax)?;
                if sig.contains(&name) {
                    return Err(SystemError::Syntax(
                        p.err_here(format!("symbol `{name}` declared twice")),
                    ));
                }
                sig.declare(name, arity);
            }
            "rule" => {
                let name = p.ident("a rule name").map_err(SystemError::Syntax)?;
                p.expect(Tok::Colon).map_err(SystemError::Syntax)?;
                if rules.iter().any(|r| r.name == name) {
                    return Err(SystemError::Syntax(
                        p.err_here(format!("rule `{name}` defined twice")),
                    ));
                }
                let mut scope = Vec::new();
                let first = p.term(&mut scope, &resolver).map_err(SystemError::Syntax)?;
                let mut conditions = Vec::new();
                let lhs = match p.peek() {
                    Some(Tok::Eq) => {
                        p.pos += 1;
                        let rhs = p.term(&mut scope, &resolver).map_err(SystemError::Syntax)?;
                        conditions.push(Condition {
                            lhs: first,
                            rhs,
                        });
                        loop {
                            match p.peek() {
                                Some(Tok::Wedge) => {
                                    p.pos += 1;
                                    let d =
                                        p.term(&mut scope, &resolver).map_err(SystemError::Syntax)?;
                                    p.expect(Tok::Eq).map_err(SystemError::Syntax)?;
                                    let c =
                                        p.term(&mut scope, &resolver).map_err(SystemError::Syntax)?;
                                    conditions.push(Condition { lhs: d, rhs: c });
                                }
                                Some(Tok::FatArrow) => {
                                    p.pos += 1;
                                    break;
                                }
                                _ => {
                                    return Err(SystemError::Syntax(
                                        p.err_here("expected `/\\` or `=>` after condition"),
                                    ))
                                }
                            }
                        }
                        p.term(&mut scope, &resolver).map_err(SystemError::Syntax)?
                    }
                    _ => first,
                };
                p.expect(Tok::Arrow).map_err(SystemError::Syntax)?;
                let rhs = p.term(&mut scope, &resolver).map_err(SystemError::Syntax)?;
                p.expect(Tok::Semi).map_err(SystemError::Syntax)?;
                rules.push(Rule {
                    name,
                    conditions,
                    lhs,
                    rhs,
                });
            }
            other => {
                p.pos -= 1;
                return Err(SystemError::Syntax(
                    p.err_here(format!("expected `sig` or `rule`, found `{other}`")),
                ));
            }
        }
    }

    // Validate rules and mark defined symbols.
    for rule in &rules {
        let lhs_class = classify(&rule.lhs, &sig).map_err(|_| SystemError::NonAlgebraicLhs {
            rule: rule.name.clone(),
        })?;
        let head_ok = matches!(rule.lhs.spine().0, Term::Const(_));
        if !lhs_class.algebraic || !head_ok || matches!(rule.lhs, Term::Var(_)) {
            return Err(SystemError::NonAlgebraicLhs {
                rule: rule.name.clone(),
            });
        }
        let lhs_vars = free_vars(&rule.lhs);
        let mut used = free_vars(&rule.rhs);
        for c in &rule.conditions {
            used.extend(free_vars(&c.lhs));
            used.extend(free_vars(&c.rhs));
        }
        if let Some(escapee) = used.iter().find(|v| !lhs_vars.contains(*v)) {
            return Err(SystemError::VariableEscape {
                rule: rule.name.clone(),
                var: escapee.clone(),
            });
        }
        if let Term::Const(head) = rule.lhs.spine().0 {
            sig.mark_defined(head);
        }
    }

    Ok(RewriteSystem {
        signature: sig,
        rules,
    })
}
