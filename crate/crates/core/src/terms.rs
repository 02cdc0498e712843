//! Signatures, absolutely free terms, and the text notation for both.
//!
//! Terms refer to operation symbols by their position in a [`Signature`], so
//! the same term can be read against any signature of the same shape (this is
//! how a starred signature reuses the terms of the base one). Variables are
//! zero-based internally and printed one-based: `Term::Var(0)` is `x1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of operation symbols. The order is fixed at construction
/// and drives every deterministic enumeration in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Symbol>", into = "Vec<Symbol>")]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl TryFrom<Vec<Symbol>> for Signature {
    type Error = Error;

    fn try_from(symbols: Vec<Symbol>) -> Result<Self> {
        Signature::new(symbols)
    }
}

impl From<Signature> for Vec<Symbol> {
    fn from(sig: Signature) -> Self {
        sig.symbols
    }
}

fn is_variable_name(name: &str) -> bool {
    name.strip_prefix('x')
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

fn is_identifier(name: &str) -> bool {
    let body = name.strip_suffix('*').unwrap_or(name);
    let mut chars = body.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !is_identifier(&s.name) || is_variable_name(&s.name) {
                return Err(Error::Input(format!(
                    "`{}` is not a valid symbol name",
                    s.name
                )));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::DuplicateSymbol(s.name.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    /// Parses `name/arity` items separated by commas.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lx = Lexer::new(text);
        let mut symbols = Vec::new();
        lx.skip_ws();
        if lx.at_end() {
            return Ok(Signature { symbols });
        }
        loop {
            let (line, column) = lx.position();
            let name = lx.identifier()?;
            if is_variable_name(&name) {
                return Err(Error::Syntax {
                    line,
                    column,
                    message: format!("`{name}` is reserved for variables"),
                });
            }
            lx.expect('/')?;
            let arity = lx.number()?;
            if symbols.iter().any(|s: &Symbol| s.name == name) {
                return Err(Error::DuplicateSymbol(name));
            }
            symbols.push(Symbol { name, arity });
            lx.skip_ws();
            if lx.at_end() {
                break;
            }
            lx.expect(',')?;
        }
        Ok(Signature { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, op: usize) -> &Symbol {
        &self.symbols[op]
    }

    pub fn name(&self, op: usize) -> &str {
        &self.symbols[op].name
    }

    pub fn arity(&self, op: usize) -> usize {
        self.symbols[op].arity
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    pub fn has_constants(&self) -> bool {
        self.symbols.iter().any(|s| s.arity == 0)
    }

    /// Same shape, every name suffixed with `*`.
    pub fn starred(&self) -> Signature {
        Signature {
            symbols: self
                .symbols
                .iter()
                .map(|s| Symbol {
                    name: format!("{}*", s.name),
                    arity: s.arity,
                })
                .collect(),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Zero-based variable index.
    Var(usize),
    /// Symbol index and arguments.
    App(usize, Vec<Term>),
}

/// What a symbol becomes under [`Term::replace_symbols`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Replacement {
    Symbol(usize),
    /// A term whose variables `x1..x_arity` stand for the children.
    Template(Term),
}

impl Term {
    pub fn var(index: usize) -> Term {
        Term::Var(index)
    }

    /// Checked application.
    pub fn apply(sig: &Signature, op: usize, args: Vec<Term>) -> Result<Term> {
        let expected = sig.arity(op);
        if args.len() != expected {
            return Err(Error::ArityMismatch {
                symbol: sig.name(op).to_string(),
                expected,
                found: args.len(),
            });
        }
        Ok(Term::App(op, args))
    }

    /// `op(x1, ..., x_arity)`.
    pub fn basic(sig: &Signature, op: usize) -> Term {
        Term::App(op, (0..sig.arity(op)).map(Term::Var).collect())
    }

    pub fn parse(text: &str, sig: &Signature, rank: usize) -> Result<Term> {
        let mut lx = Lexer::new(text);
        let t = lx.term(sig, rank)?;
        lx.skip_ws();
        if !lx.at_end() {
            return Err(lx.error("trailing input"));
        }
        Ok(t)
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Number of variables needed to interpret the term (largest index + 1).
    pub fn rank(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, args) => args.iter().map(Term::rank).max().unwrap_or(0),
        }
    }

    /// Checks every application against `sig`.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(op, args) => {
                if *op >= sig.len() {
                    return Err(Error::UnknownSymbol(format!("#{op}")));
                }
                if args.len() != sig.arity(*op) {
                    return Err(Error::ArityMismatch {
                        symbol: sig.name(*op).to_string(),
                        expected: sig.arity(*op),
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }

    /// Simultaneous substitution.
    pub fn substitute(&self, assignment: &BTreeMap<usize, Term>) -> Result<Term> {
        match self {
            Term::Var(i) => assignment
                .get(i)
                .cloned()
                .ok_or(Error::UnmappedVariable(i + 1)),
            Term::App(op, args) => Ok(Term::App(
                *op,
                args.iter()
                    .map(|a| a.substitute(assignment))
                    .collect::<Result<_>>()?,
            )),
        }
    }

    /// Substitutes `args[i]` for `x_{i+1}`.
    pub fn instantiate(&self, args: &[Term]) -> Result<Term> {
        match self {
            Term::Var(i) => args.get(*i).cloned().ok_or(Error::UnmappedVariable(i + 1)),
            Term::App(op, children) => Ok(Term::App(
                *op,
                children
                    .iter()
                    .map(|c| c.instantiate(args))
                    .collect::<Result<_>>()?,
            )),
        }
    }

    /// Bottom-up symbol replacement. `mapping[op]` says what symbol `op`
    /// turns into; templates must not use variables beyond the arity of the
    /// symbol they replace.
    pub fn replace_symbols(&self, sig: &Signature, mapping: &[Replacement]) -> Result<Term> {
        match self {
            Term::Var(i) => Ok(Term::Var(*i)),
            Term::App(op, args) => {
                let children = args
                    .iter()
                    .map(|a| a.replace_symbols(sig, mapping))
                    .collect::<Result<Vec<_>>>()?;
                match mapping.get(*op) {
                    None => Err(Error::UnknownSymbol(format!("#{op}"))),
                    Some(Replacement::Symbol(to)) => Ok(Term::App(*to, children)),
                    Some(Replacement::Template(t)) => {
                        if t.rank() > sig.arity(*op) {
                            return Err(Error::ArityMismatch {
                                symbol: sig.name(*op).to_string(),
                                expected: sig.arity(*op),
                                found: t.rank(),
                            });
                        }
                        t.instantiate(&children)
                    }
                }
            }
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }

    pub fn to_text(&self, sig: &Signature) -> String {
        self.display(sig).to_string()
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => write!(f, "x{}", i + 1),
            Term::App(op, args) => {
                write!(f, "{}(", self.sig.name(*op))?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", a.display(self.sig))?;
                }
                f.write_str(")")
            }
        }
    }
}

/// All terms over `x1..x_rank` of depth at most `max_depth`, each exactly once.
///
/// Order: by depth; within a depth by symbol order; within a symbol
/// lexicographically by the positions of the children in this same list.
/// Depth 0 holds the variables in index order. A constant has depth 1.
pub fn enumerate_terms(sig: &Signature, rank: usize, max_depth: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = (0..rank).map(Term::Var).collect();
    let mut prev_start = 0;
    for depth in 1..=max_depth {
        let below = terms.len();
        let mut fresh = Vec::new();
        for op in 0..sig.len() {
            let arity = sig.arity(op);
            if arity == 0 {
                if depth == 1 {
                    fresh.push(Term::App(op, Vec::new()));
                }
                continue;
            }
            for_each_tuple(below, arity, |tuple| {
                if tuple.iter().any(|&c| c >= prev_start) {
                    fresh.push(Term::App(
                        op,
                        tuple.iter().map(|&c| terms[c].clone()).collect(),
                    ));
                }
            });
        }
        if fresh.is_empty() {
            break;
        }
        terms.extend(fresh);
        prev_start = below;
    }
    terms
}

/// Visits every tuple in `{0..n}^k` in lexicographic order (first position
/// most significant). `k = 0` visits the empty tuple once.
pub fn for_each_tuple(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > 0 && n == 0 {
        return;
    }
    let mut tuple = vec![0usize; k];
    loop {
        f(&tuple);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn position(&self) -> (usize, usize) {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        (line, column)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.position();
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn identifier(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.pos += 1,
            _ => return Err(self.error("expected an identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.peek() == Some('*') {
            self.pos += 1;
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.error("expected a number"))
    }

    fn term(&mut self, sig: &Signature, rank: usize) -> Result<Term> {
        self.skip_ws();
        let (line, column) = self.position();
        let name = self.identifier()?;
        if is_variable_name(&name) {
            let index: usize = name[1..].parse().map_err(|_| Error::Syntax {
                line,
                column,
                message: format!("bad variable `{name}`"),
            })?;
            if index == 0 {
                return Err(Error::Syntax {
                    line,
                    column,
                    message: "variables are numbered from x1".into(),
                });
            }
            if index > rank {
                return Err(Error::VariableOutOfRange { index, rank });
            }
            return Ok(Term::Var(index - 1));
        }
        let op = sig
            .index_of(&name)
            .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
        let mut args = Vec::new();
        if self.eat('(') && !self.eat(')') {
            loop {
                args.push(self.term(sig, rank)?);
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        Term::apply(sig, op, args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group() -> Signature {
        Signature::parse("mul/2, inv/1, e/0").unwrap()
    }

    fn meet() -> Signature {
        Signature::parse("meet/2").unwrap()
    }

    fn show(ts: &[Term], sig: &Signature) -> Vec<String> {
        ts.iter().map(|t| t.to_text(sig)).collect()
    }

    #[test]
    fn parse_signature_examples() {
        let sig = group();
        let pairs: Vec<_> = sig
            .symbols()
            .iter()
            .map(|s| (s.name.as_str(), s.arity))
            .collect();
        assert_eq!(pairs, vec![("mul", 2), ("inv", 1), ("e", 0)]);
        assert_eq!(meet().symbols().len(), 1);
        assert!(matches!(
            Signature::parse("meet/2, meet/1"),
            Err(Error::DuplicateSymbol(n)) if n == "meet"
        ));
    }

    #[test]
    fn parse_signature_reports_position() {
        match Signature::parse("meet/2,\n  join") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Signature::parse("x1/2").is_err());
    }

    #[test]
    fn parse_term_examples() {
        let sig = Signature::parse("mul/2").unwrap();
        let t = Term::parse("mul(x2,x1)", &sig, 2).unwrap();
        assert_eq!(t, Term::App(0, vec![Term::Var(1), Term::Var(0)]));
        assert_eq!(Term::parse("x1", &sig, 2).unwrap(), Term::Var(0));
        assert!(matches!(
            Term::parse("mul(x1)", &sig, 2),
            Err(Error::ArityMismatch {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            Term::parse("mul(x1,x3)", &sig, 2),
            Err(Error::VariableOutOfRange { index: 3, rank: 2 })
        ));
        assert!(matches!(
            Term::parse("f(x1)", &sig, 1),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn constants_with_and_without_parens() {
        let sig = group();
        let a = Term::parse("e", &sig, 0).unwrap();
        let b = Term::parse(" e ( ) ", &sig, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(&sig), "e()");
        assert_eq!(a.depth(), 1);
    }

    #[test]
    fn substitute_examples() {
        let sig = group();
        let t = Term::parse("mul(x1,x2)", &sig, 2).unwrap();
        let asg = BTreeMap::from([(0, Term::parse("e", &sig, 0).unwrap()), (1, Term::Var(0))]);
        assert_eq!(t.substitute(&asg).unwrap().to_text(&sig), "mul(e(),x1)");

        let asg = BTreeMap::from([(0, Term::Var(0))]);
        assert_eq!(Term::Var(0).substitute(&asg).unwrap(), Term::Var(0));

        let m = meet();
        let t = Term::parse("meet(x1,x1)", &m, 1).unwrap();
        let asg = BTreeMap::from([(0, Term::parse("meet(x1,x2)", &m, 2).unwrap())]);
        assert_eq!(
            t.substitute(&asg).unwrap().to_text(&m),
            "meet(meet(x1,x2),meet(x1,x2))"
        );
        assert!(matches!(
            t.substitute(&BTreeMap::new()),
            Err(Error::UnmappedVariable(1))
        ));
    }

    #[test]
    fn term_vars_examples() {
        let sig = group();
        let vars = |s: &str| Term::parse(s, &sig, 2).unwrap().vars();
        assert_eq!(vars("mul(x2,x1)"), BTreeSet::from([0, 1]));
        assert!(vars("e").is_empty());
        assert_eq!(vars("mul(x1,x1)"), BTreeSet::from([0]));
    }

    #[test]
    fn enumerate_examples() {
        let m = meet();
        assert_eq!(show(&enumerate_terms(&m, 1, 1), &m), ["x1", "meet(x1,x1)"]);
        assert_eq!(show(&enumerate_terms(&m, 2, 0), &m), ["x1", "x2"]);
        let f = Signature::parse("f/1").unwrap();
        assert_eq!(
            show(&enumerate_terms(&f, 1, 2), &f),
            ["x1", "f(x1)", "f(f(x1))"]
        );
    }

    #[test]
    fn enumerate_group_depth_one() {
        let sig = group();
        assert_eq!(
            show(&enumerate_terms(&sig, 2, 1), &sig),
            [
                "x1",
                "x2",
                "mul(x1,x1)",
                "mul(x1,x2)",
                "mul(x2,x1)",
                "mul(x2,x2)",
                "inv(x1)",
                "inv(x2)",
                "e()"
            ]
        );
        // Nothing over zero variables except what constants build.
        assert_eq!(show(&enumerate_terms(&sig, 0, 1), &sig), ["e()"]);
    }

    #[test]
    fn enumerate_is_duplicate_free_and_ordered() {
        let sig = group();
        let terms = enumerate_terms(&sig, 2, 2);
        let set: BTreeSet<_> = terms.iter().collect();
        assert_eq!(set.len(), terms.len());
        assert!(terms.windows(2).all(|w| w[0].depth() <= w[1].depth()));
        // Brute-force count: 9 terms of depth <= 1; depth 2 adds mul pairs with
        // a depth-1 child (81 - 4) and inv of a depth-1 term (7).
        assert_eq!(terms.len(), 9 + 77 + 7);
        // Every term of depth <= 2 over two variables is present: build them
        // independently by brute force.
        let mut brute: BTreeSet<Term> = BTreeSet::new();
        let mut layer: Vec<Term> = vec![Term::Var(0), Term::Var(1)];
        brute.extend(layer.iter().cloned());
        for _ in 0..2 {
            let mut next = Vec::new();
            for a in &layer {
                next.push(Term::App(1, vec![a.clone()]));
                for b in &layer {
                    next.push(Term::App(0, vec![a.clone(), b.clone()]));
                }
            }
            next.push(Term::App(2, vec![]));
            brute.extend(next.iter().cloned());
            layer = brute.iter().cloned().collect();
        }
        assert_eq!(brute, set.into_iter().cloned().collect());
    }

    #[test]
    fn replace_symbols_examples() {
        let sig = Signature::parse("mul/2").unwrap();
        let star = sig.starred();
        let t = Term::parse("mul(x2,x1)", &sig, 2).unwrap();
        let renamed = t.replace_symbols(&sig, &[Replacement::Symbol(0)]).unwrap();
        assert_eq!(renamed.to_text(&star), "mul*(x2,x1)");

        let t = Term::parse("mul*(x1,x2)", &star, 2).unwrap();
        let tpl = Term::parse("mul(x2,x1)", &sig, 2).unwrap();
        let expanded = t
            .replace_symbols(&star, &[Replacement::Template(tpl)])
            .unwrap();
        assert_eq!(expanded.to_text(&sig), "mul(x2,x1)");

        let m = meet();
        let ms = m.starred();
        let t = Term::parse("meet*(meet*(x1,x2),x2)", &ms, 2).unwrap();
        let expanded = t
            .replace_symbols(&ms, &[Replacement::Template(Term::Var(0))])
            .unwrap();
        assert_eq!(expanded, Term::Var(0));

        let bad = Term::parse("mul(x1,x3)", &sig, 3).unwrap();
        let unary = Signature::parse("f/1").unwrap();
        let t = Term::parse("f(x1)", &unary, 1).unwrap();
        assert!(t
            .replace_symbols(&unary, &[Replacement::Template(bad)])
            .is_err());
    }

    #[test]
    fn tuples_cover_all_and_empty() {
        let mut seen = Vec::new();
        for_each_tuple(2, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut count = 0;
        for_each_tuple(3, 0, |_| count += 1);
        assert_eq!(count, 1);
        for_each_tuple(0, 1, |_| panic!("no tuples over an empty set"));
    }
}
