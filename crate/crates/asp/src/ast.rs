//! Syntax tree for the supported fragment and its pretty-printer.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Sym(Arc<str>),
    Var(Arc<str>),
    /// `_`; every occurrence is a distinct variable.
    Anon,
    Neg(Box<Term>),
    Binary(Box<Term>, ArithOp, Box<Term>),
    Tuple(Vec<Term>),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Int(_) | Term::Sym(_) => true,
            Term::Var(_) | Term::Anon => false,
            Term::Neg(t) => t.is_ground(),
            Term::Binary(l, _, r) => l.is_ground() && r.is_ground(),
            Term::Tuple(ts) => ts.iter().all(Term::is_ground),
        }
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.to_string());
            }
            Term::Neg(t) => t.collect_vars(out),
            Term::Binary(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Tuple(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Term::Int(_) | Term::Sym(_) | Term::Anon => {}
        }
    }

    /// Variables that a match against a ground value binds: plain variables,
    /// possibly nested in tuples. Variables under arithmetic do not bind.
    pub(crate) fn collect_binding_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.to_string());
            }
            Term::Tuple(ts) => ts.iter().for_each(|t| t.collect_binding_vars(out)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomPattern {
    pub predicate: Arc<str>,
    pub args: Vec<Term>,
}

impl AtomPattern {
    pub fn new(predicate: impl Into<Arc<str>>, args: Vec<Term>) -> Self {
        AtomPattern { predicate: predicate.into(), args }
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.args.iter().for_each(|t| t.collect_vars(out));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    /// `=` and `==` are the same test.
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Le => CmpOp::Gt,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Gt => ord == Greater,
            CmpOp::Le => ord != Greater,
            CmpOp::Ge => ord != Less,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl Comparison {
    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Pos(AtomPattern),
    Neg(AtomPattern),
    /// A comparison, optionally written with a leading `not`.
    Cmp {
        negated: bool,
        cmp: Comparison,
    },
}

impl Literal {
    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.collect_vars(out),
            Literal::Cmp { cmp, .. } => cmp.collect_vars(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChoiceElement {
    pub atom: AtomPattern,
    pub condition: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    Atom(AtomPattern),
    /// `L { a : cond; ... } U`; missing bounds are `None`.
    Choice {
        lower: Option<u32>,
        upper: Option<u32>,
        elements: Vec<ChoiceElement>,
    },
    /// `{ cmp; ... } = k`: exactly `k` comparisons must hold whenever the body does.
    Cardinality {
        elements: Vec<Comparison>,
        count: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatementKind {
    Fact,
    Rule,
    Constraint,
    ChoiceRule,
    CardinalityHeadRule,
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub head: Option<Head>,
    pub body: Vec<Literal>,
    /// Verbatim source of the statement this one was parsed (or pool-expanded) from.
    pub source_text: String,
    pub line: usize,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Eq for Statement {}

impl Statement {
    pub fn kind(&self) -> StatementKind {
        match &self.head {
            None => StatementKind::Constraint,
            Some(Head::Atom(_)) if self.body.is_empty() => StatementKind::Fact,
            Some(Head::Atom(_)) => StatementKind::Rule,
            Some(Head::Choice { .. }) => StatementKind::ChoiceRule,
            Some(Head::Cardinality { .. }) => StatementKind::CardinalityHeadRule,
        }
    }
}

impl fmt::Display for ArithOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
        })
    }
}

fn join<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) if *i < 0 => write!(f, "-{}", i.unsigned_abs()),
            Term::Int(i) => write!(f, "{i}"),
            Term::Sym(s) => f.write_str(s),
            Term::Var(s) => f.write_str(s),
            Term::Anon => f.write_str("_"),
            Term::Neg(t) => match **t {
                Term::Binary(..) => write!(f, "-({t})"),
                _ => write!(f, "-{t}"),
            },
            Term::Binary(l, op, r) => {
                // Left-associative: parenthesise a compound right operand.
                write!(f, "{l} {op} ")?;
                match **r {
                    Term::Binary(..) => write!(f, "({r})"),
                    _ => write!(f, "{r}"),
                }
            }
            Term::Tuple(ts) => {
                f.write_str("(")?;
                join(f, ts, ", ")?;
                if ts.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            join(f, &self.args, ", ")?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "not {a}"),
            Literal::Cmp { negated: true, cmp } => write!(f, "not {cmp}"),
            Literal::Cmp { negated: false, cmp } => write!(f, "{cmp}"),
        }
    }
}

impl fmt::Display for ChoiceElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)?;
        if !self.condition.is_empty() {
            f.write_str(" : ")?;
            join(f, &self.condition, ", ")?;
        }
        Ok(())
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Atom(a) => write!(f, "{a}"),
            Head::Choice { lower, upper, elements } => {
                if let Some(l) = lower {
                    write!(f, "{l} ")?;
                }
                f.write_str("{ ")?;
                join(f, elements, "; ")?;
                f.write_str(" }")?;
                if let Some(u) = upper {
                    write!(f, " {u}")?;
                }
                Ok(())
            }
            Head::Cardinality { elements, count } => {
                f.write_str("{ ")?;
                join(f, elements, "; ")?;
                write!(f, " }} = {count}")
            }
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
            if !self.body.is_empty() {
                f.write_str(" ")?;
            }
        }
        if !self.body.is_empty() || self.head.is_none() {
            f.write_str(":- ")?;
            join(f, &self.body, ", ")?;
        }
        f.write_str(".")
    }
}

/// Renders statements one per line.
pub fn print_program(statements: &[Statement]) -> String {
    let mut out = String::new();
    for s in statements {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}
