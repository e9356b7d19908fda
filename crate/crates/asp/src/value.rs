//! Ground values and atoms.
//!
//! Values are totally ordered: integers by value, then symbolic constants,
//! then quoted strings, then compound terms (arity, name, arguments).
//! Tuples are compound terms with an empty name.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Sym(Arc<str>),
    Str(Arc<str>),
    Func(Arc<str>, Vec<Value>),
}

impl Value {
    pub fn sym(s: impl Into<Arc<str>>) -> Self {
        Value::Sym(s.into())
    }

    pub fn tuple(items: Vec<Value>) -> Self {
        Value::Func(Arc::from(""), items)
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Sym(_) => 1,
            Value::Str(_) => 2,
            Value::Func(..) => 3,
        }
    }

    /// Plain text of the value as a puzzle answer would spell it.
    pub fn surface(&self) -> String {
        match self {
            Value::Str(s) => s.to_string(),
            other => other.to_string(),
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Sym(a), Value::Sym(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Func(na, aa), Value::Func(nb, ab)) => aa.len().cmp(&ab.len()).then_with(|| na.cmp(nb)).then_with(|| aa.cmp(ab)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Value]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
            Value::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Value::Func(name, args) => {
                f.write_str(name)?;
                f.write_str("(")?;
                write_args(f, args)?;
                if name.is_empty() && args.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A ground atom `predicate(arg, ...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Arc<str>,
    pub args: Arc<[Value]>,
}

impl Atom {
    pub fn new(predicate: impl Into<Arc<str>>, args: Vec<Value>) -> Self {
        Atom { predicate: predicate.into(), args: args.into() }
    }

    pub fn signature(&self) -> (&str, usize) {
        (&self.predicate, self.args.len())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_args(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// One stable model.
///
/// Atoms keep the order in which they were reported (solver output order for
/// external runs, sorted order for the in-process enumerator). Equality,
/// ordering and hashing use the sorted atom set.
#[derive(Debug, Clone)]
pub struct AnswerSet {
    atoms: Vec<Atom>,
    /// Sorted atoms when `atoms` is not already sorted.
    key: Option<Vec<Atom>>,
}

impl AnswerSet {
    pub fn new(atoms: Vec<Atom>) -> Self {
        if atoms.windows(2).all(|w| w[0] < w[1]) {
            return AnswerSet { atoms, key: None };
        }
        let mut key = atoms.clone();
        key.sort();
        key.dedup();
        AnswerSet { atoms, key: Some(key) }
    }

    /// Builds from atoms already sorted and free of duplicates.
    pub(crate) fn from_sorted(atoms: Vec<Atom>) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0] < w[1]));
        AnswerSet { atoms, key: None }
    }

    pub fn empty() -> Self {
        AnswerSet::new(Vec::new())
    }

    /// Atoms in reported order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Atoms in canonical sorted order.
    pub fn sorted(&self) -> &[Atom] {
        self.key.as_deref().unwrap_or(&self.atoms)
    }

    pub fn len(&self) -> usize {
        self.sorted().len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted().is_empty()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.sorted().binary_search(atom).is_ok()
    }

    pub fn is_subset(&self, other: &AnswerSet) -> bool {
        self.sorted().iter().all(|a| other.contains(a))
    }

    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.atoms.iter().filter(move |a| &*a.predicate == predicate)
    }
}

impl PartialEq for AnswerSet {
    fn eq(&self, other: &Self) -> bool {
        self.sorted() == other.sorted()
    }
}

impl Eq for AnswerSet {}

impl std::hash::Hash for AnswerSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sorted().hash(state)
    }
}

impl Ord for AnswerSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sorted().cmp(other.sorted())
    }
}

impl PartialOrd for AnswerSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_precede_symbols() {
        assert!(Value::Int(1000) < Value::sym("a"));
        assert!(Value::Int(-3) < Value::Int(2));
        assert!(Value::sym("anna") < Value::sym("eva"));
        assert!(Value::sym("zed") < Value::Str("a".into()));
        assert!(Value::Str("z".into()) < Value::tuple(vec![]));
    }

    #[test]
    fn tuples_order_by_arity_first() {
        let short = Value::tuple(vec![Value::sym("z")]);
        let long = Value::tuple(vec![Value::Int(0), Value::Int(0)]);
        assert!(short < long);
    }

    #[test]
    fn display_matches_solver_style() {
        let a = Atom::new("assignment", vec![Value::sym("wedding"), Value::sym("herbert"), Value::Int(50)]);
        assert_eq!(a.to_string(), "assignment(wedding,herbert,50)");
        assert_eq!(Atom::new("go", vec![]).to_string(), "go");
        assert_eq!(Value::tuple(vec![Value::Int(1)]).to_string(), "(1,)");
    }

    #[test]
    fn answer_set_equality_ignores_order() {
        let a = Atom::new("p", vec![Value::Int(1)]);
        let b = Atom::new("p", vec![Value::Int(2)]);
        let x = AnswerSet::new(vec![a.clone(), b.clone()]);
        let y = AnswerSet::new(vec![b.clone(), a.clone()]);
        assert_eq!(x, y);
        assert_eq!(x.atoms()[0], a);
        assert_eq!(y.atoms()[0], b);
    }
}
