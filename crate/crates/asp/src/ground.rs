//! Grounding: instantiates variables against the atoms a program can derive.
//!
//! Grounding runs in three passes. Certain atoms are the least model of the
//! facts and negation-free rules. Possible atoms add everything a choice or
//! rule head can produce. The final pass instantiates every statement over
//! the possible atoms and simplifies away certain literals, comparisons and
//! cardinality heads whose count is already decided.

use std::collections::BTreeSet;

use std::sync::Arc;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use crate::ast::*;
use crate::error::GroundError;
use crate::value::{Atom, Value};

pub type AtomId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: AtomId,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

/// One ground choice rule. `heads` excludes atoms that are already certain;
/// the bounds are shifted accordingly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundChoice {
    pub lower: usize,
    pub upper: usize,
    pub heads: Vec<AtomId>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

impl GroundChoice {
    pub fn is_conditional(&self) -> bool {
        !self.pos.is_empty() || !self.neg.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundConstraint {
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

#[derive(Debug, Clone, Default)]
pub struct GroundProgram {
    atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
    certain: Vec<bool>,
    pub rules: Vec<GroundRule>,
    pub choices: Vec<GroundChoice>,
    pub constraints: Vec<GroundConstraint>,
    /// Diagnostics a full solver reports as warnings (e.g. undefined atoms).
    pub warnings: Vec<String>,
}

impl GroundProgram {
    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn is_certain(&self, id: AtomId) -> bool {
        self.certain[id]
    }

    pub fn certain_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len()).filter(move |&i| self.certain[i])
    }

    fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len();
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        self.certain.push(false);
        id
    }
}

type Subst = HashMap<Arc<str>, Value>;

/// Atom store keyed by signature.
#[derive(Default)]
struct Domain {
    atoms: Vec<Atom>,
    by_sig: HashMap<Arc<str>, HashMap<usize, Vec<usize>>>,
    index: HashMap<Atom, usize>,
}

impl Domain {
    fn insert(&mut self, atom: Atom) -> bool {
        if self.index.contains_key(&atom) {
            return false;
        }
        let i = self.atoms.len();
        self.by_sig.entry(atom.predicate.clone()).or_default().entry(atom.args.len()).or_default().push(i);
        self.index.insert(atom.clone(), i);
        self.atoms.push(atom);
        true
    }

    /// Indices of the atoms with this signature.
    fn get(&self, predicate: &str, arity: usize) -> &[usize] {
        self.by_sig.get(predicate).and_then(|m| m.get(&arity)).map(Vec::as_slice).unwrap_or(&[])
    }

    fn contains(&self, atom: &Atom) -> bool {
        self.index.contains_key(atom)
    }
}

/// A statement prepared for grounding: anonymous variables renamed and a
/// join order for its positive body atoms.
struct Prepared {
    stmt: Statement,
    order: Vec<usize>,
    text: String,
}

pub fn ground(statements: &[Statement]) -> Result<GroundProgram, GroundError> {
    let prepared = statements.iter().map(prepare).collect::<Result<Vec<_>, _>>()?;
    let warnings = undefined_atom_warnings(statements);

    // Pass 1: certain atoms.
    let mut certain = Domain::default();
    let definite: Vec<&Prepared> =
        prepared.iter().filter(|p| matches!(p.stmt.head, Some(Head::Atom(_))) && p.stmt.body.iter().all(|l| !matches!(l, Literal::Neg(_)))).collect();
    loop {
        let mut changed = false;
        for p in &definite {
            let Some(Head::Atom(head)) = &p.stmt.head else { unreachable!() };
            let mut new = Vec::new();
            join(p, &certain, &mut |s, _| {
                new.push(instantiate(head, s, &p.text)?);
                Ok(())
            })?;
            for a in new {
                changed |= certain.insert(a);
            }
        }
        if !changed {
            break;
        }
    }

    // Pass 2: possible atoms.
    let mut possible = Domain::default();
    let mut seed: Vec<&Atom> = certain.atoms.iter().collect();
    seed.sort();
    for a in seed {
        possible.insert(a.clone());
    }
    loop {
        let mut changed = false;
        for p in &prepared {
            let mut new = Vec::new();
            match &p.stmt.head {
                Some(Head::Atom(head)) => join(p, &possible, &mut |s, _| {
                    if negatives_blocked(&p.stmt.body, s, &certain, &p.text)? {
                        return Ok(());
                    }
                    new.push(instantiate(head, s, &p.text)?);
                    Ok(())
                })?,
                Some(Head::Choice { elements, .. }) => join(p, &possible, &mut |s, _| {
                    if negatives_blocked(&p.stmt.body, s, &certain, &p.text)? {
                        return Ok(());
                    }
                    for el in elements {
                        for a in expand_element(el, s, &certain, &possible, &p.text)? {
                            new.push(a);
                        }
                    }
                    Ok(())
                })?,
                _ => {}
            }
            for a in new {
                changed |= possible.insert(a);
            }
        }
        if !changed {
            break;
        }
    }

    // Pass 3: ground program.
    let mut prog = GroundProgram { warnings, ..Default::default() };
    let mut certain_atoms: Vec<&Atom> = certain.atoms.iter().collect();
    certain_atoms.sort();
    for a in certain_atoms {
        let id = prog.intern(a.clone());
        prog.certain[id] = true;
    }
    let mut seen_rules = HashSet::default();
    let mut seen_choices = HashSet::default();
    let mut seen_constraints: HashMap<u64, Vec<usize>> = HashMap::default();

    // Per possible atom: whether it is certain, and its id once interned.
    let possible_certain: Vec<bool> = possible.atoms.iter().map(|a| certain.contains(a)).collect();
    let mut possible_ids: Vec<Option<AtomId>> = vec![None; possible.atoms.len()];
    for p in &prepared {
        // Body index of a positive literal -> its position in the join order.
        let mut slot = vec![usize::MAX; p.stmt.body.len()];
        for (k, &i) in p.order.iter().enumerate() {
            slot[i] = k;
        }
        join(p, &possible, &mut |s, matched| {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (i, lit) in p.stmt.body.iter().enumerate() {
                match lit {
                    Literal::Pos(_) => {
                        let d = matched[slot[i]];
                        if !possible_certain[d] {
                            let id = *possible_ids[d].get_or_insert_with(|| prog.intern(possible.atoms[d].clone()));
                            pos.push(id);
                        }
                    }
                    Literal::Neg(a) => {
                        let atom = instantiate(a, s, &p.text)?;
                        if certain.contains(&atom) {
                            return Ok(());
                        }
                        if possible.contains(&atom) {
                            neg.push(prog.intern(atom));
                        }
                    }
                    Literal::Cmp { .. } => {}
                }
            }
            pos.sort_unstable();
            pos.dedup();
            neg.sort_unstable();
            neg.dedup();
            match &p.stmt.head {
                None => {
                    push_constraint(&mut prog, &mut seen_constraints, GroundConstraint { pos, neg });
                }
                Some(Head::Atom(h)) => {
                    let atom = instantiate(h, s, &p.text)?;
                    if certain.contains(&atom) {
                        return Ok(());
                    }
                    let head = prog.intern(atom);
                    let r = GroundRule { head, pos, neg };
                    if seen_rules.insert(r.clone()) {
                        prog.rules.push(r);
                    }
                }
                Some(Head::Cardinality { elements, count }) => {
                    let mut holding = 0u32;
                    for cmp in elements {
                        if eval_cmp(cmp, false, s, &p.text)? {
                            holding += 1;
                        }
                    }
                    if holding != *count {
                        push_constraint(&mut prog, &mut seen_constraints, GroundConstraint { pos, neg });
                    }
                }
                Some(Head::Choice { lower, upper, elements }) => {
                    let mut heads: Vec<Atom> = Vec::new();
                    for el in elements {
                        heads.extend(expand_element(el, s, &certain, &possible, &p.text)?);
                    }
                    heads.sort();
                    heads.dedup();
                    let fixed = heads.iter().filter(|a| certain.contains(a)).count();
                    let free: Vec<AtomId> = heads.into_iter().filter(|a| !certain.contains(a)).map(|a| prog.intern(a)).collect();
                    let lower = lower.unwrap_or(0) as usize;
                    let upper = upper.map(|u| u as usize).unwrap_or(free.len() + fixed);
                    if fixed > upper || lower > upper || lower > free.len() + fixed {
                        // The bounds can never be met: the body must be false.
                        push_constraint(&mut prog, &mut seen_constraints, GroundConstraint { pos, neg });
                        return Ok(());
                    }
                    let g = GroundChoice { lower: lower.saturating_sub(fixed), upper: (upper - fixed).min(free.len()), heads: free, pos, neg };
                    if seen_choices.insert(g.clone()) {
                        prog.choices.push(g);
                    }
                }
            }
            Ok(())
        })?;
    }
    Ok(prog)
}

/// Adds a constraint unless an identical one is already present. Duplicates
/// are found by hash so the constraint is never cloned.
fn push_constraint(prog: &mut GroundProgram, seen: &mut HashMap<u64, Vec<usize>>, c: GroundConstraint) {
    let h = std::hash::BuildHasher::hash_one(&rustc_hash::FxBuildHasher, &c);
    let bucket = seen.entry(h).or_default();
    if bucket.iter().any(|&i| prog.constraints[i] == c) {
        return;
    }
    bucket.push(prog.constraints.len());
    prog.constraints.push(c);
}

fn undefined_atom_warnings(statements: &[Statement]) -> Vec<String> {
    let mut defined: HashSet<(Arc<str>, usize)> = HashSet::default();
    for s in statements {
        match &s.head {
            Some(Head::Atom(a)) => {
                defined.insert((a.predicate.clone(), a.args.len()));
            }
            Some(Head::Choice { elements, .. }) => {
                for el in elements {
                    defined.insert((el.atom.predicate.clone(), el.atom.args.len()));
                }
            }
            _ => {}
        }
    }
    let mut warnings = Vec::new();
    let mut reported = HashSet::default();
    let mut check = |a: &AtomPattern, line: usize| {
        let sig = (a.predicate.clone(), a.args.len());
        if !defined.contains(&sig) && reported.insert(sig.clone()) {
            warnings.push(format!("line {line}: warning: atom does not occur in any rule head: {}/{}", sig.0, sig.1));
        }
    };
    for s in statements {
        let mut lits: Vec<&Literal> = s.body.iter().collect();
        if let Some(Head::Choice { elements, .. }) = &s.head {
            for el in elements {
                lits.extend(el.condition.iter());
            }
        }
        for lit in lits {
            if let Literal::Pos(a) | Literal::Neg(a) = lit {
                check(a, s.line);
            }
        }
    }
    warnings
}

fn rename_anon(term: &mut Term, counter: &mut usize) {
    match term {
        Term::Anon => {
            *term = Term::Var(format!("_#{counter}").into());
            *counter += 1;
        }
        Term::Neg(t) => rename_anon(t, counter),
        Term::Binary(l, _, r) => {
            rename_anon(l, counter);
            rename_anon(r, counter);
        }
        Term::Tuple(ts) => ts.iter_mut().for_each(|t| rename_anon(t, counter)),
        _ => {}
    }
}

fn rename_lit(lit: &mut Literal, counter: &mut usize) {
    match lit {
        Literal::Pos(a) | Literal::Neg(a) => a.args.iter_mut().for_each(|t| rename_anon(t, counter)),
        Literal::Cmp { cmp, .. } => {
            rename_anon(&mut cmp.lhs, counter);
            rename_anon(&mut cmp.rhs, counter);
        }
    }
}

fn display_var(v: &str) -> String {
    if v.starts_with("_#") {
        "_".into()
    } else {
        v.to_string()
    }
}

fn binding_vars(a: &AtomPattern) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    a.args.iter().for_each(|t| t.collect_binding_vars(&mut out));
    out
}

fn all_vars_lit(l: &Literal) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    l.collect_vars(&mut out);
    out
}

fn unsafe_err(var: &str, text: &str) -> GroundError {
    GroundError::UnsafeVariable { variable: display_var(var), statement: text.to_string() }
}

/// Orders positive atoms so that arithmetic arguments only see bound variables.
fn join_order(atoms: &[(usize, &AtomPattern)], mut bound: BTreeSet<String>, text: &str) -> Result<Vec<usize>, GroundError> {
    let mut remaining: Vec<(usize, &AtomPattern)> = atoms.to_vec();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let pick = remaining.iter().position(|(_, a)| {
            let mut all = BTreeSet::new();
            a.collect_vars(&mut all);
            let binding = binding_vars(a);
            all.difference(&binding).all(|v| bound.contains(v))
        });
        match pick {
            Some(i) => {
                let (idx, a) = remaining.remove(i);
                bound.extend(binding_vars(a));
                order.push(idx);
            }
            None => {
                let (_, a) = remaining[0];
                let mut all = BTreeSet::new();
                a.collect_vars(&mut all);
                let v = all.into_iter().find(|v| !bound.contains(v)).unwrap_or_default();
                return Err(unsafe_err(&v, text));
            }
        }
    }
    Ok(order)
}

fn prepare(stmt: &Statement) -> Result<Prepared, GroundError> {
    let mut stmt = stmt.clone();
    let text = stmt.source_text.clone();
    let mut counter = 0;
    for lit in &mut stmt.body {
        rename_lit(lit, &mut counter);
    }
    match &mut stmt.head {
        Some(Head::Atom(a)) => a.args.iter_mut().for_each(|t| rename_anon(t, &mut counter)),
        Some(Head::Choice { elements, .. }) => {
            for el in elements {
                el.atom.args.iter_mut().for_each(|t| rename_anon(t, &mut counter));
                el.condition.iter_mut().for_each(|l| rename_lit(l, &mut counter));
            }
        }
        Some(Head::Cardinality { elements, .. }) => {
            for c in elements {
                rename_anon(&mut c.lhs, &mut counter);
                rename_anon(&mut c.rhs, &mut counter);
            }
        }
        None => {}
    }

    // Safety.
    let positives: Vec<(usize, &AtomPattern)> = stmt
        .body
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l {
            Literal::Pos(a) => Some((i, a)),
            _ => None,
        })
        .collect();
    let mut bound = BTreeSet::new();
    for (_, a) in &positives {
        bound.extend(binding_vars(a));
    }
    let order = join_order(&positives, BTreeSet::new(), &text)?;
    let require = |vars: BTreeSet<String>, bound: &BTreeSet<String>| -> Result<(), GroundError> {
        match vars.into_iter().find(|v| !bound.contains(v)) {
            Some(v) => Err(unsafe_err(&v, &text)),
            None => Ok(()),
        }
    };
    for lit in &stmt.body {
        if !matches!(lit, Literal::Pos(_)) {
            require(all_vars_lit(lit), &bound)?;
        }
    }
    match &stmt.head {
        Some(Head::Atom(a)) => {
            let mut vars = BTreeSet::new();
            a.collect_vars(&mut vars);
            require(vars, &bound)?;
        }
        Some(Head::Cardinality { elements, .. }) => {
            for c in elements {
                let mut vars = BTreeSet::new();
                c.collect_vars(&mut vars);
                require(vars, &bound)?;
            }
        }
        Some(Head::Choice { elements, .. }) => {
            for el in elements {
                let conds: Vec<(usize, &AtomPattern)> = el
                    .condition
                    .iter()
                    .enumerate()
                    .filter_map(|(i, l)| match l {
                        Literal::Pos(a) => Some((i, a)),
                        _ => None,
                    })
                    .collect();
                let mut local = bound.clone();
                for (_, a) in &conds {
                    local.extend(binding_vars(a));
                }
                join_order(&conds, bound.clone(), &text)?;
                for l in &el.condition {
                    if !matches!(l, Literal::Pos(_)) {
                        require(all_vars_lit(l), &local)?;
                    }
                }
                let mut vars = BTreeSet::new();
                el.atom.collect_vars(&mut vars);
                require(vars, &local)?;
            }
        }
        None => {}
    }
    Ok(Prepared { stmt, order, text })
}

pub(crate) fn eval(term: &Term, s: &Subst, text: &str) -> Result<Value, GroundError> {
    let arith = |message: String| GroundError::Arithmetic { message, statement: text.to_string() };
    Ok(match term {
        Term::Int(i) => Value::Int(*i),
        Term::Sym(x) => Value::Sym(x.clone()),
        Term::Var(v) => s.get(v).cloned().ok_or_else(|| unsafe_err(v, text))?,
        Term::Anon => return Err(unsafe_err("_", text)),
        Term::Tuple(ts) => Value::tuple(ts.iter().map(|t| eval(t, s, text)).collect::<Result<_, _>>()?),
        Term::Neg(t) => match eval(t, s, text)? {
            Value::Int(i) => Value::Int(i.checked_neg().ok_or_else(|| arith("integer overflow".into()))?),
            other => return Err(arith(format!("unary minus applied to `{other}`"))),
        },
        Term::Binary(l, op, r) => {
            let (lv, rv) = (eval(l, s, text)?, eval(r, s, text)?);
            match (&lv, &rv) {
                (Value::Int(a), Value::Int(b)) => {
                    let v = match op {
                        ArithOp::Add => a.checked_add(*b),
                        ArithOp::Sub => a.checked_sub(*b),
                    };
                    Value::Int(v.ok_or_else(|| arith("integer overflow".into()))?)
                }
                _ => return Err(arith(format!("`{lv} {op} {rv}` is not integer arithmetic"))),
            }
        }
    })
}

fn eval_cmp(cmp: &Comparison, negated: bool, s: &Subst, text: &str) -> Result<bool, GroundError> {
    Ok(cmp.op.holds(compare_terms(&cmp.lhs, &cmp.rhs, s, text)?) != negated)
}

/// Orders two terms by value. Variables are read in place and tuples of equal
/// length compare element by element, so nothing is built.
fn compare_terms(l: &Term, r: &Term, s: &Subst, text: &str) -> Result<std::cmp::Ordering, GroundError> {
    match (l, r) {
        (Term::Var(a), Term::Var(b)) => {
            let a = s.get(a).ok_or_else(|| unsafe_err(a, text))?;
            let b = s.get(b).ok_or_else(|| unsafe_err(b, text))?;
            Ok(a.cmp(b))
        }
        (Term::Tuple(a), Term::Tuple(b)) if a.len() == b.len() => {
            for (x, y) in a.iter().zip(b) {
                let o = compare_terms(x, y, s, text)?;
                if o.is_ne() {
                    return Ok(o);
                }
            }
            Ok(std::cmp::Ordering::Equal)
        }
        _ => Ok(eval(l, s, text)?.cmp(&eval(r, s, text)?)),
    }
}

/// Matches `term` against `value`, recording new bindings in `trail` so the
/// caller can undo them.
fn match_term(term: &Term, value: &Value, s: &mut Subst, trail: &mut Vec<Arc<str>>, text: &str) -> Result<bool, GroundError> {
    match term {
        Term::Var(v) => match s.get(v) {
            Some(bound) => Ok(bound == value),
            None => {
                s.insert(v.clone(), value.clone());
                trail.push(v.clone());
                Ok(true)
            }
        },
        Term::Int(i) => Ok(matches!(value, Value::Int(j) if j == i)),
        Term::Sym(x) => Ok(matches!(value, Value::Sym(y) if y == x)),
        Term::Tuple(ts) => match value {
            Value::Func(name, args) if name.is_empty() && args.len() == ts.len() => {
                for (t, v) in ts.iter().zip(args) {
                    if !match_term(t, v, s, trail, text)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        },
        Term::Neg(_) | Term::Binary(..) => Ok(&eval(term, s, text)? == value),
        Term::Anon => Ok(true),
    }
}

fn match_atom(pat: &AtomPattern, atom: &Atom, s: &mut Subst, trail: &mut Vec<Arc<str>>, text: &str) -> Result<bool, GroundError> {
    for (t, v) in pat.args.iter().zip(atom.args.iter()) {
        if !match_term(t, v, s, trail, text)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn instantiate(pat: &AtomPattern, s: &Subst, text: &str) -> Result<Atom, GroundError> {
    Ok(Atom::new(pat.predicate.clone(), pat.args.iter().map(|t| eval(t, s, text)).collect::<Result<_, _>>()?))
}

/// A body comparison with its variables listed once.
struct PendingCmp<'a> {
    lit: &'a Literal,
    vars: Vec<String>,
}

fn pending_cmps(body: &[Literal]) -> Vec<PendingCmp<'_>> {
    body.iter().filter(|l| matches!(l, Literal::Cmp { .. })).map(|lit| PendingCmp { lit, vars: all_vars_lit(lit).into_iter().collect() }).collect()
}

/// Join callback: the substitution and the matched domain atoms.
type Visit<'a> = dyn FnMut(&Subst, &[usize]) -> Result<(), GroundError> + 'a;

/// Enumerates substitutions satisfying the positive atoms (against `domain`)
/// and the comparisons of a prepared statement's body.
fn join(p: &Prepared, domain: &Domain, f: &mut Visit<'_>) -> Result<(), GroundError> {
    let cmps = pending_cmps(&p.stmt.body);
    let mut done = vec![false; cmps.len()];
    let mut matched = Vec::with_capacity(p.order.len());
    join_rec(&p.stmt.body, &p.order, 0, &cmps, &mut done, domain, &mut Subst::default(), &mut matched, &p.text, f)
}

#[allow(clippy::too_many_arguments)]
fn join_rec(
    body: &[Literal],
    order: &[usize],
    depth: usize,
    cmps: &[PendingCmp],
    done: &mut Vec<bool>,
    domain: &Domain,
    s: &mut Subst,
    matched: &mut Vec<usize>,
    text: &str,
    f: &mut Visit<'_>,
) -> Result<(), GroundError> {
    // Check comparisons as soon as their variables are bound.
    let mut newly = Vec::new();
    for (i, pc) in cmps.iter().enumerate() {
        if !done[i] && pc.vars.iter().all(|v| s.contains_key(v.as_str())) {
            let Literal::Cmp { negated, cmp } = pc.lit else { unreachable!() };
            if !eval_cmp(cmp, *negated, s, text)? {
                for j in newly {
                    done[j] = false;
                }
                return Ok(());
            }
            done[i] = true;
            newly.push(i);
        }
    }
    let result = if depth == order.len() {
        f(s, matched)
    } else {
        let Literal::Pos(pat) = &body[order[depth]] else { unreachable!() };
        let mut r = Ok(());
        let mut trail = Vec::new();
        for &i in domain.get(&pat.predicate, pat.args.len()) {
            let ok = match_atom(pat, &domain.atoms[i], s, &mut trail, text);
            if let Ok(true) = ok {
                matched.push(i);
                r = join_rec(body, order, depth + 1, cmps, done, domain, s, matched, text, f);
                matched.pop();
            } else if let Err(e) = ok {
                r = Err(e);
            }
            for v in trail.drain(..) {
                s.remove(&v);
            }
            if r.is_err() {
                break;
            }
        }
        r
    };
    for j in newly {
        done[j] = false;
    }
    result
}

fn negatives_blocked(body: &[Literal], s: &Subst, certain: &Domain, text: &str) -> Result<bool, GroundError> {
    for lit in body {
        if let Literal::Neg(a) = lit {
            if certain.contains(&instantiate(a, s, text)?) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Ground head atoms of one choice element under a body substitution.
fn expand_element(el: &ChoiceElement, s: &Subst, certain: &Domain, possible: &Domain, text: &str) -> Result<Vec<Atom>, GroundError> {
    let positives: Vec<(usize, &AtomPattern)> = el
        .condition
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l {
            Literal::Pos(a) => Some((i, a)),
            _ => None,
        })
        .collect();
    let bound: BTreeSet<String> = s.keys().map(|k| k.to_string()).collect();
    let order = join_order(&positives, bound, text)?;
    let sub = Prepared { stmt: Statement { head: None, body: el.condition.clone(), source_text: String::new(), line: 0 }, order, text: text.to_string() };
    let cmps = pending_cmps(&sub.stmt.body);
    let mut done = vec![false; cmps.len()];
    let mut out = Vec::new();
    let mut start = s.clone();
    join_rec(&sub.stmt.body, &sub.order, 0, &cmps, &mut done, possible, &mut start, &mut Vec::new(), text, &mut |s2, _| {
        for lit in &el.condition {
            match lit {
                Literal::Pos(a) => {
                    if !certain.contains(&instantiate(a, s2, text)?) {
                        return Err(GroundError::Unsupported {
                            construct: format!("choice condition `{a}` is not a domain predicate"),
                            statement: text.to_string(),
                        });
                    }
                }
                Literal::Neg(a) => {
                    let atom = instantiate(a, s2, text)?;
                    if certain.contains(&atom) {
                        return Ok(());
                    }
                    if possible.contains(&atom) {
                        return Err(GroundError::Unsupported {
                            construct: format!("choice condition `not {a}` is not a domain predicate"),
                            statement: text.to_string(),
                        });
                    }
                }
                Literal::Cmp { .. } => {}
            }
        }
        out.push(instantiate(&el.atom, s2, text)?);
        Ok(())
    })?;
    Ok(out)
}
