//! Recursive-descent parser for the supported fragment.

use crate::ast::*;
use crate::error::ParseError;
use crate::lexer::{tokenize, Tok, Token};
use crate::value::{Atom, Value};

/// Parses program text into statements, expanding `;` pools.
pub fn parse_program(src: &str) -> Result<Vec<Statement>, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: tokens, pos: 0, src };
    let mut out = Vec::new();
    while p.peek() != &Tok::Eof {
        let stmt = p.statement()?;
        out.extend(stmt);
    }
    Ok(out)
}

/// Parses a whitespace-separated list of ground atoms, as printed after an
/// `Answer:` line by clingo-style solvers.
pub fn parse_ground_atoms(line: &str) -> Result<Vec<Atom>, ParseError> {
    let tokens = tokenize(line)?;
    let mut p = Parser { toks: tokens, pos: 0, src: line };
    let mut out = Vec::new();
    while p.peek() != &Tok::Eof {
        out.push(p.ground_atom()?);
    }
    Ok(out)
}

/// Atom site before pool expansion: one argument list per alternative.
type Pooled = Vec<AtomPattern>;

enum PLit {
    Pos(Pooled),
    Neg(Pooled),
    Cmp { negated: bool, cmp: Comparison },
}

enum PHead {
    Atom(Pooled),
    Choice { lower: Option<u32>, upper: Option<u32>, elements: Vec<ChoiceElement> },
    Cardinality { elements: Vec<Comparison>, count: u32 },
}

enum Expr {
    Term(Term),
    /// `name(args; args ...)` or a bare lowercase name.
    Func {
        name: String,
        pools: Vec<Vec<Term>>,
    },
}

enum AtomOrCmp {
    Atom(Pooled),
    Cmp(Comparison),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn cur(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.cur();
        Err(ParseError::Syntax { line: t.line, column: t.column, token: t.tok.text(), message: message.into() })
    }

    fn unsupported<T>(&self, construct: impl Into<String>) -> Result<T, ParseError> {
        let t = self.cur();
        Err(ParseError::Unsupported { line: t.line, column: t.column, construct: construct.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn check_unsupported_operator(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Other(op) if op == ".." => self.unsupported("interval `..`"),
            Tok::Other(op) if ["*", "/", "\\", "**", "&", "^", "?", "@"].contains(&op.as_str()) => self.unsupported(format!("arithmetic operator `{op}`")),
            Tok::Other(op) if op == "|" => self.unsupported("disjunction or absolute value `|`"),
            _ => Ok(()),
        }
    }

    fn statement(&mut self) -> Result<Vec<Statement>, ParseError> {
        let start = self.cur().offset;
        let line = self.cur().line;
        match self.peek().clone() {
            Tok::Directive(name) => return self.unsupported(format!("#{name} directive")),
            Tok::Other(op) if op == ":~" => return self.unsupported("weak constraint"),
            _ => {}
        }
        let head = if *self.peek() == Tok::If { None } else { Some(self.head()?) };
        let mut body = Vec::new();
        if *self.peek() == Tok::If {
            self.bump();
            body = self.body()?;
        } else if head.is_none() {
            return self.syntax("expected statement");
        }
        if *self.peek() != Tok::Dot {
            self.check_unsupported_operator()?;
            if let Tok::Other(op) = self.peek() {
                if op == "|" {
                    return self.unsupported("disjunctive head");
                }
            }
            return self.syntax("expected `.`");
        }
        let end = self.cur().offset + 1;
        self.bump();
        let source_text = self.src[start..end].trim().to_string();
        expand(head, body, source_text, line).map_err(|construct| ParseError::Unsupported { line, column: 1, construct })
    }

    fn head(&mut self) -> Result<PHead, ParseError> {
        let starts_brace = matches!(self.peek(), Tok::LBrace) || (matches!(self.peek(), Tok::Int(_)) && matches!(self.peek_at(1), Tok::LBrace));
        if starts_brace {
            return self.brace_head();
        }
        if matches!(self.peek(), Tok::Not) {
            return self.unsupported("default negation in rule head");
        }
        match self.atom_or_cmp()? {
            AtomOrCmp::Atom(a) => {
                if matches!(self.peek(), Tok::Semi) || matches!(self.peek(), Tok::Other(o) if o == "|") {
                    return self.unsupported("disjunctive head");
                }
                Ok(PHead::Atom(a))
            }
            AtomOrCmp::Cmp(_) => self.syntax("comparison cannot be a rule head"),
        }
    }

    fn bound(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) if i >= 0 && i <= u32::MAX as i64 => {
                self.bump();
                Ok(i as u32)
            }
            Tok::Int(_) | Tok::Minus => self.syntax("bound must be a non-negative integer"),
            Tok::Var(_) | Tok::Ident(_) | Tok::LParen => self.unsupported("non-integer cardinality bound"),
            _ => self.syntax("expected integer bound"),
        }
    }

    fn brace_head(&mut self) -> Result<PHead, ParseError> {
        let lower = if let Tok::Int(_) = self.peek() { Some(self.bound()?) } else { None };
        self.expect(Tok::LBrace, "`{`")?;
        let mut atoms: Vec<ChoiceElement> = Vec::new();
        let mut cmps: Vec<Comparison> = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                match self.atom_or_cmp()? {
                    AtomOrCmp::Cmp(c) => {
                        if *self.peek() == Tok::Colon {
                            return self.unsupported("conditional comparison element");
                        }
                        cmps.push(c);
                    }
                    AtomOrCmp::Atom(alts) => {
                        let mut condition = Vec::new();
                        if *self.peek() == Tok::Colon {
                            self.bump();
                            loop {
                                match self.literal()? {
                                    PLit::Pos(a) if a.len() == 1 => condition.push(Literal::Pos(a.into_iter().next().unwrap())),
                                    PLit::Neg(a) if a.len() == 1 => condition.push(Literal::Neg(a.into_iter().next().unwrap())),
                                    PLit::Cmp { negated, cmp } => condition.push(Literal::Cmp { negated, cmp }),
                                    _ => return self.unsupported("pool inside choice condition"),
                                }
                                if *self.peek() == Tok::Comma {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        for atom in alts {
                            atoms.push(ChoiceElement { atom, condition: condition.clone() });
                        }
                    }
                }
                if *self.peek() == Tok::Semi {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.check_unsupported_operator()?;
        self.expect(Tok::RBrace, "`}`")?;
        let mut upper = None;
        let mut exact = None;
        match self.peek() {
            Tok::Eq | Tok::EqEq => {
                self.bump();
                exact = Some(self.bound()?);
            }
            Tok::Int(_) => upper = Some(self.bound()?),
            Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge | Tok::Ne => {
                return self.unsupported("relational cardinality bound");
            }
            _ => {}
        }
        if exact.is_some() && lower.is_some() {
            return self.syntax("bound given twice");
        }
        if !atoms.is_empty() && !cmps.is_empty() {
            return self.unsupported("mixed atom and comparison elements in head");
        }
        if !cmps.is_empty() {
            return match exact {
                Some(count) => Ok(PHead::Cardinality { elements: cmps, count }),
                None => self.unsupported("comparison elements require `= k`"),
            };
        }
        let (lower, upper) = match exact {
            Some(k) => (Some(k), Some(k)),
            None => (lower, upper),
        };
        if let (Some(l), Some(u)) = (lower, upper) {
            if l > u {
                // Unsatisfiable bounds are legal; the rule simply never holds.
            }
        }
        Ok(PHead::Choice { lower, upper, elements: atoms })
    }

    fn body(&mut self) -> Result<Vec<PLit>, ParseError> {
        let mut lits = vec![self.literal()?];
        while matches!(self.peek(), Tok::Comma | Tok::Semi) {
            self.bump();
            lits.push(self.literal()?);
        }
        Ok(lits)
    }

    fn literal(&mut self) -> Result<PLit, ParseError> {
        match self.peek() {
            Tok::LBrace => return self.unsupported("body aggregate"),
            Tok::Directive(d) => return self.unsupported(format!("#{d} in body")),
            _ => {}
        }
        if *self.peek() == Tok::Not {
            self.bump();
            if *self.peek() == Tok::Not {
                return self.unsupported("double negation");
            }
            return Ok(match self.atom_or_cmp()? {
                AtomOrCmp::Atom(a) => PLit::Neg(a),
                AtomOrCmp::Cmp(cmp) => PLit::Cmp { negated: true, cmp },
            });
        }
        Ok(match self.atom_or_cmp()? {
            AtomOrCmp::Atom(a) => PLit::Pos(a),
            AtomOrCmp::Cmp(cmp) => PLit::Cmp { negated: false, cmp },
        })
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq | Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn atom_or_cmp(&mut self) -> Result<AtomOrCmp, ParseError> {
        let lhs = self.expr()?;
        self.check_unsupported_operator()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let lhs = self.to_term(lhs)?;
            let rhs = self.expr()?;
            self.check_unsupported_operator()?;
            let rhs = self.to_term(rhs)?;
            return Ok(AtomOrCmp::Cmp(Comparison { lhs, op, rhs }));
        }
        match lhs {
            Expr::Func { name, pools } => Ok(AtomOrCmp::Atom(pools.into_iter().map(|args| AtomPattern::new(name.clone(), args)).collect())),
            Expr::Term(Term::Sym(name)) => Ok(AtomOrCmp::Atom(vec![AtomPattern::new(name, vec![])])),
            Expr::Term(_) => self.syntax("expected an atom"),
        }
    }

    fn to_term(&self, e: Expr) -> Result<Term, ParseError> {
        match e {
            Expr::Term(t) => Ok(t),
            Expr::Func { name, pools } if pools.len() == 1 && pools[0].is_empty() => Ok(Term::Sym(name.into())),
            Expr::Func { name, .. } => self.unsupported(format!("function term `{name}(...)`")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Tok::Plus | Tok::Minus) {
            let op = if self.bump().tok == Tok::Plus { ArithOp::Add } else { ArithOp::Sub };
            let l = self.to_term(lhs)?;
            let r = self.unary()?;
            let r = self.to_term(r)?;
            lhs = Expr::Term(Term::Binary(Box::new(l), op, Box::new(r)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            let t = self.to_term(inner)?;
            return Ok(Expr::Term(match t {
                Term::Int(i) => Term::Int(-i),
                other => Term::Neg(Box::new(other)),
            }));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Term(Term::Int(i)))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Expr::Term(Term::Var(v.into())))
            }
            Tok::Anon => {
                self.bump();
                Ok(Expr::Term(Term::Anon))
            }
            Tok::Str(_) => self.unsupported("string constant"),
            Tok::Directive(d) => self.unsupported(format!("#{d}")),
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Ok(Expr::Term(Term::Sym(name.into())));
                }
                self.bump();
                let mut pools = vec![Vec::new()];
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(Expr::Func { name, pools });
                }
                loop {
                    let arg = self.expr()?;
                    self.check_unsupported_operator()?;
                    let arg = self.to_term(arg)?;
                    pools.last_mut().unwrap().push(arg);
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::Semi => {
                            self.bump();
                            pools.push(Vec::new());
                        }
                        Tok::RParen => {
                            self.bump();
                            break;
                        }
                        _ => return self.syntax("expected `,`, `;` or `)`"),
                    }
                }
                Ok(Expr::Func { name, pools })
            }
            Tok::LParen => {
                self.bump();
                let mut items = Vec::new();
                let mut trailing_comma = false;
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(Expr::Term(Term::Tuple(items)));
                }
                loop {
                    let e = self.expr()?;
                    self.check_unsupported_operator()?;
                    items.push(self.to_term(e)?);
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                            if *self.peek() == Tok::RParen {
                                trailing_comma = true;
                                self.bump();
                                break;
                            }
                        }
                        Tok::RParen => {
                            self.bump();
                            break;
                        }
                        Tok::Semi => return self.unsupported("pool inside tuple"),
                        _ => return self.syntax("expected `,` or `)`"),
                    }
                }
                if items.len() == 1 && !trailing_comma {
                    Ok(Expr::Term(items.pop().unwrap()))
                } else {
                    Ok(Expr::Term(Term::Tuple(items)))
                }
            }
            Tok::Other(op) if op == "|" => self.unsupported("absolute value `|`"),
            _ => self.syntax("expected a term"),
        }
    }

    fn ground_value(&mut self) -> Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Value::Int(i))
            }
            Tok::Minus => {
                self.bump();
                match self.bump().tok {
                    Tok::Int(i) => Ok(Value::Int(-i)),
                    _ => self.syntax("expected integer after `-`"),
                }
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Value::Str(s.into()))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let args = self.ground_args()?;
                    Ok(Value::Func(name.into(), args))
                } else {
                    Ok(Value::Sym(name.into()))
                }
            }
            Tok::LParen => {
                let args = self.ground_args()?;
                Ok(Value::tuple(args))
            }
            _ => self.syntax("expected a ground term"),
        }
    }

    fn ground_args(&mut self) -> Result<Vec<Value>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.ground_value()?);
            match self.bump().tok {
                Tok::Comma if *self.peek() == Tok::RParen => {
                    self.bump();
                    break;
                }
                Tok::Comma => {}
                Tok::RParen => break,
                _ => return self.syntax("expected `,` or `)`"),
            }
        }
        Ok(args)
    }

    fn ground_atom(&mut self) -> Result<Atom, ParseError> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let args = if *self.peek() == Tok::LParen { self.ground_args()? } else { Vec::new() };
                let predicate = if negative { format!("-{name}") } else { name };
                Ok(Atom::new(predicate, args))
            }
            _ => self.syntax("expected a ground atom"),
        }
    }
}

fn cross<T: Clone>(acc: Vec<Vec<T>>, options: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(acc.len() * options.len());
    for prefix in &acc {
        for o in options {
            let mut v = prefix.clone();
            v.push(o.clone());
            out.push(v);
        }
    }
    out
}

fn expand(head: Option<PHead>, body: Vec<PLit>, source_text: String, line: usize) -> Result<Vec<Statement>, String> {
    let mut bodies: Vec<Vec<Literal>> = vec![Vec::new()];
    for lit in body {
        let options: Vec<Literal> = match lit {
            PLit::Pos(alts) => alts.into_iter().map(Literal::Pos).collect(),
            PLit::Neg(alts) => alts.into_iter().map(Literal::Neg).collect(),
            PLit::Cmp { negated, cmp } => vec![Literal::Cmp { negated, cmp }],
        };
        bodies = cross(bodies, &options);
    }
    let heads: Vec<Option<Head>> = match head {
        None => vec![None],
        Some(PHead::Atom(alts)) => alts.into_iter().map(|a| Some(Head::Atom(a))).collect(),
        Some(PHead::Choice { lower, upper, elements }) => vec![Some(Head::Choice { lower, upper, elements })],
        Some(PHead::Cardinality { elements, count }) => vec![Some(Head::Cardinality { elements, count })],
    };
    let mut out = Vec::with_capacity(heads.len() * bodies.len());
    for h in &heads {
        for b in &bodies {
            out.push(Statement { head: h.clone(), body: b.clone(), source_text: source_text.clone(), line });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<StatementKind> {
        parse_program(src).unwrap().iter().map(Statement::kind).collect()
    }

    #[test]
    fn pooled_facts_expand() {
        let stmts = parse_program("dog(beagle;golden;bernese).").unwrap();
        let printed: Vec<String> = stmts.iter().map(|s| s.to_string()).collect();
        assert_eq!(printed, ["dog(beagle).", "dog(golden).", "dog(bernese)."]);
        assert!(stmts.iter().all(|s| s.source_text == "dog(beagle;golden;bernese)."));
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("  % only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn statement_kinds() {
        assert_eq!(
            kinds("a. b :- a. :- b, not a. 1 { p(X) : q(X) } 1 :- a. { X = 1; Y = 2 } = 1 :- r(X, Y)."),
            [StatementKind::Fact, StatementKind::Rule, StatementKind::Constraint, StatementKind::ChoiceRule, StatementKind::CardinalityHeadRule]
        );
    }

    #[test]
    fn exact_count_on_atoms_is_a_choice() {
        let s = &parse_program("{ p(X) : q(X) } = 1.").unwrap()[0];
        match &s.head {
            Some(Head::Choice { lower, upper, .. }) => assert_eq!((*lower, *upper), (Some(1), Some(1))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negated_comparison() {
        let s = &parse_program(":- p(A1), q(A2), not A1 == A2 - 25.").unwrap()[0];
        assert_eq!(s.to_string(), ":- p(A1), q(A2), not A1 = A2 - 25.");
        assert!(matches!(s.body[2], Literal::Cmp { negated: true, .. }));
    }

    #[test]
    fn tuple_comparison() {
        let s = &parse_program(":- p(A, B), p(C, D), (A, B) != (C, D).").unwrap()[0];
        assert!(matches!(&s.body[2], Literal::Cmp { cmp: Comparison { lhs: Term::Tuple(t), .. }, .. } if t.len() == 2));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_program("p(a).\nq(b c).").unwrap_err();
        match err {
            ParseError::Syntax { line, column, token, .. } => {
                assert_eq!((line, column), (2, 5));
                assert_eq!(token, "c");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_program("p(a)"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn unsupported_constructs_are_named() {
        for (src, needle) in [
            ("#show p/1.", "#show"),
            ("p(1..3).", "interval"),
            (":- p(X), X * 2 > 3.", "operator"),
            ("a ; b.", "disjunctive"),
            (":- #count { X : p(X) } > 2.", "#count"),
            ("p(f(a)).", "function term"),
            ("p(\"x\").", "string"),
            (":~ p. [1]", "weak"),
        ] {
            let err = parse_program(src).unwrap_err();
            assert!(err.is_unsupported(), "{src}: {err:?}");
            assert!(err.to_string().contains(needle), "{src}: {err}");
        }
    }

    #[test]
    fn ground_atoms_from_solver_output() {
        let atoms = parse_ground_atoms("a(1) b(2) c d(x,(1,2),\"s t\")").unwrap();
        assert_eq!(atoms.len(), 4);
        assert_eq!(atoms[3].to_string(), "d(x,(1,2),\"s t\")");
    }

    #[test]
    fn negative_integers_fold() {
        let s = &parse_program("p(-3).").unwrap()[0];
        assert_eq!(s.to_string(), "p(-3).");
        let again = parse_program(&s.to_string()).unwrap();
        assert_eq!(&again[0], s);
    }
}
