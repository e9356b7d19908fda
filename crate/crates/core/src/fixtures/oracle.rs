//! Ground truth for grid puzzles by checking every bijection between
//! categories against the stable-model definition.

use asploop_asp::{is_stable_model, AnswerSet, Atom, GroundProgram, Value};

use crate::matching::normalize_surface;
use crate::puzzle::PuzzleInstance;

/// ASP value of a category member: an integer if the normalized surface
/// form is one, a symbol otherwise.
pub fn member_value(member: &str) -> Value {
    let s = normalize_surface(member);
    s.parse::<i64>().map(Value::Int).unwrap_or_else(|_| Value::sym(s))
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Every candidate solution: the first category fixed in member order, one
/// permutation for each other category. `(n!)^(m-1)` candidates.
pub fn bijections(instance: &PuzzleInstance) -> Vec<Vec<Vec<usize>>> {
    let (m, n) = instance.dims();
    let perms = permutations(n);
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![(0..n).collect()]];
    for _ in 1..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut next = prefix.clone();
                    next.push(p.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// Stable models among the bijection candidates, where the solution atoms
/// are `predicate(...)` with arguments in category order.
pub fn bijection_models(prog: &GroundProgram, instance: &PuzzleInstance, predicate: &str) -> Vec<AnswerSet> {
    let (m, n) = instance.dims();
    let values: Vec<Vec<Value>> = instance.categories.iter().map(|c| c.members.iter().map(|s| member_value(s)).collect()).collect();
    let facts: Vec<Atom> = prog.certain_atoms().map(|id| prog.atom(id).clone()).collect();
    let mut found = Vec::new();
    for b in bijections(instance) {
        let mut atoms = facts.clone();
        for row in 0..n {
            atoms.push(Atom::new(predicate, (0..m).map(|k| values[k][b[k][row]].clone()).collect()));
        }
        let candidate = AnswerSet::new(atoms);
        if is_stable_model(prog, &candidate) {
            found.push(candidate);
        }
    }
    found.sort();
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
        let p = permutations(3);
        assert_eq!(p.first(), Some(&vec![0, 1, 2]));
        assert_eq!(p.last(), Some(&vec![2, 1, 0]));
    }

    #[test]
    fn member_values() {
        assert_eq!(member_value("$35"), Value::Int(35));
        assert_eq!(member_value("Pisces"), Value::sym("pisces"));
    }
}
