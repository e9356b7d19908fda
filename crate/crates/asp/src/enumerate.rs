//! Stable-model enumeration over a ground program.
//!
//! The search branches over the choice groups in order, picking for each an
//! admissible subset of its heads, then guesses the truth of derived atoms
//! that occur under negation. At each leaf the candidate is checked against
//! the least model of the program under that guess. Constraints over pure
//! choice atoms are tracked with counters during the search so most conflicts
//! are cut early.

use crate::error::SolveError;
use crate::ground::{AtomId, GroundProgram};
use crate::value::AnswerSet;

/// Models found, sorted, and whether the search space was covered.
///
/// `exhausted` is false when the search stopped at `cap + 1` models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub models: Vec<AnswerSet>,
    pub exhausted: bool,
}

pub fn enumerate_models(prog: &GroundProgram, cap: usize) -> Result<Enumeration, SolveError> {
    if cap == 0 {
        return Err(SolveError::InvalidCap);
    }
    let mut s = Search::new(prog, cap);
    let feasible = s.init();
    if feasible {
        s.groups(0);
    }
    let exhausted = !s.stop;
    // Sorting by atom rank orders each model and the model list the same way
    // as comparing the atoms themselves.
    let mut by_rank: Vec<AtomId> = (0..prog.atom_count()).collect();
    by_rank.sort_by(|&a, &b| prog.atom(a).cmp(prog.atom(b)));
    let mut rank = vec![0; by_rank.len()];
    for (r, &id) in by_rank.iter().enumerate() {
        rank[id] = r;
    }
    let mut ranked: Vec<Vec<usize>> = s
        .models
        .into_iter()
        .map(|ids| {
            let mut r: Vec<usize> = ids.into_iter().map(|i| rank[i]).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    ranked.sort_unstable();
    ranked.dedup();
    let models = ranked.into_iter().map(|r| AnswerSet::from_sorted(r.into_iter().map(|i| prog.atom(by_rank[i]).clone()).collect())).collect();
    Ok(Enumeration { models, exhausted })
}

enum Undo {
    True(AtomId),
    Undecided(AtomId),
    Pending(usize),
    Forbid(AtomId),
}

struct Search<'a> {
    prog: &'a GroundProgram,
    cap: usize,
    certain: Vec<bool>,
    /// Only true through unconditional choice groups.
    simple: Vec<bool>,
    possible: Vec<bool>,
    guess_idx: Vec<Option<usize>>,
    guess_atoms: Vec<AtomId>,
    guess_val: Vec<bool>,
    heavy_constraints: Vec<usize>,
    pos_watch: Vec<Vec<usize>>,
    neg_watch: Vec<Vec<usize>>,
    pending: Vec<usize>,
    true_count: Vec<u32>,
    undecided: Vec<u32>,
    forbidden: Vec<u32>,
    trail: Vec<Undo>,
    current: Vec<Vec<AtomId>>,
    models: Vec<Vec<AtomId>>,
    stop: bool,
}

impl<'a> Search<'a> {
    fn new(prog: &'a GroundProgram, cap: usize) -> Self {
        let n = prog.atom_count();
        let certain: Vec<bool> = (0..n).map(|i| prog.is_certain(i)).collect();
        let mut derived = vec![false; n];
        for r in &prog.rules {
            derived[r.head] = true;
        }
        let mut groups_of: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (g, c) in prog.choices.iter().enumerate() {
            for &h in &c.heads {
                groups_of[h].push(g);
            }
        }
        let simple: Vec<bool> =
            (0..n).map(|a| !certain[a] && !derived[a] && !groups_of[a].is_empty() && groups_of[a].iter().all(|&g| !prog.choices[g].is_conditional())).collect();
        let possible: Vec<bool> = (0..n).map(|a| certain[a] || derived[a] || !groups_of[a].is_empty()).collect();

        let mut guess_idx = vec![None; n];
        let mut guess_atoms = Vec::new();
        let negs = prog.rules.iter().flat_map(|r| r.neg.iter()).chain(prog.choices.iter().flat_map(|c| c.neg.iter()));
        for &q in negs {
            if possible[q] && !simple[q] && !certain[q] && guess_idx[q].is_none() {
                guess_idx[q] = Some(guess_atoms.len());
                guess_atoms.push(q);
            }
        }

        let mut heavy = Vec::new();
        let mut pos_watch = vec![Vec::new(); n];
        let mut neg_watch = vec![Vec::new(); n];
        let mut pending = vec![0; prog.constraints.len()];
        for (i, c) in prog.constraints.iter().enumerate() {
            if c.pos.iter().chain(&c.neg).all(|&a| simple[a]) {
                for &a in &c.pos {
                    pos_watch[a].push(i);
                }
                for &a in &c.neg {
                    neg_watch[a].push(i);
                }
                pending[i] = c.pos.len() + c.neg.len();
            } else {
                heavy.push(i);
            }
        }
        let undecided = groups_of.iter().map(|g| g.len() as u32).collect();
        Search {
            prog,
            cap,
            certain,
            simple,
            possible,
            guess_val: vec![false; guess_atoms.len()],
            guess_idx,
            guess_atoms,
            heavy_constraints: heavy,
            pos_watch,
            neg_watch,
            pending,
            true_count: vec![0; n],
            undecided,
            forbidden: vec![0; n],
            trail: Vec::new(),
            current: vec![Vec::new(); prog.choices.len()],
            models: Vec::new(),
            stop: false,
        }
    }

    /// Handles constraints that are already decided before any choice.
    fn init(&mut self) -> bool {
        for (i, c) in self.prog.constraints.iter().enumerate() {
            if self.heavy_constraints.contains(&i) {
                continue;
            }
            match self.pending[i] {
                0 => return false,
                1 => {
                    if let Some(&b) = c.pos.first() {
                        self.forbidden[b] += 1;
                    }
                }
                _ => {}
            }
        }
        self.trail.clear();
        true
    }

    fn groups(&mut self, level: usize) {
        if self.stop {
            return;
        }
        if level == self.prog.choices.len() {
            self.guesses(0);
            return;
        }
        let group = &self.prog.choices[level];
        let k = group.heads.len();
        let hi = group.upper.min(k);
        let mut sizes: Vec<usize> = Vec::new();
        if group.is_conditional() {
            sizes.push(0);
            sizes.extend(group.lower.max(1)..=hi);
        } else {
            sizes.extend(group.lower..=hi);
        }
        for size in sizes {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                if idx.iter().all(|&i| self.forbidden[group.heads[i]] == 0) {
                    let subset: Vec<AtomId> = idx.iter().map(|&i| group.heads[i]).collect();
                    let mark = self.trail.len();
                    if self.apply(level, &subset) {
                        self.current[level] = subset;
                        self.groups(level + 1);
                        self.current[level].clear();
                    }
                    self.undo(mark);
                    if self.stop {
                        return;
                    }
                }
                if !next_combination(&mut idx, k) {
                    break;
                }
            }
        }
    }

    fn apply(&mut self, g: usize, subset: &[AtomId]) -> bool {
        for &a in subset {
            self.true_count[a] += 1;
            self.trail.push(Undo::True(a));
            if self.true_count[a] == 1 && self.simple[a] {
                for k in 0..self.pos_watch[a].len() {
                    if !self.satisfy_literal(self.pos_watch[a][k]) {
                        return false;
                    }
                }
            }
        }
        for k in 0..self.prog.choices[g].heads.len() {
            let a = self.prog.choices[g].heads[k];
            self.undecided[a] -= 1;
            self.trail.push(Undo::Undecided(a));
            if self.undecided[a] == 0 && self.true_count[a] == 0 && self.simple[a] {
                for j in 0..self.neg_watch[a].len() {
                    if !self.satisfy_literal(self.neg_watch[a][j]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// One more body literal of constraint `c` became true.
    fn satisfy_literal(&mut self, c: usize) -> bool {
        self.pending[c] -= 1;
        self.trail.push(Undo::Pending(c));
        match self.pending[c] {
            0 => false,
            1 => {
                let con = &self.prog.constraints[c];
                if let Some(&b) = con.pos.iter().find(|&&b| self.true_count[b] == 0) {
                    self.forbidden[b] += 1;
                    self.trail.push(Undo::Forbid(b));
                }
                true
            }
            _ => true,
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::True(a) => self.true_count[a] -= 1,
                Undo::Undecided(a) => self.undecided[a] += 1,
                Undo::Pending(c) => self.pending[c] += 1,
                Undo::Forbid(a) => self.forbidden[a] -= 1,
            }
        }
    }

    fn guesses(&mut self, i: usize) {
        if self.stop {
            return;
        }
        if i == self.guess_atoms.len() {
            if let Some(model) = self.check() {
                self.models.push(model);
                if self.models.len() > self.cap {
                    self.stop = true;
                }
            }
            return;
        }
        for v in [false, true] {
            self.guess_val[i] = v;
            self.guesses(i + 1);
        }
    }

    /// Truth of `q` as assumed when evaluating `not q` during the fixpoint.
    fn assumed(&self, q: AtomId) -> bool {
        if self.simple[q] {
            self.true_count[q] > 0
        } else if let Some(i) = self.guess_idx[q] {
            self.guess_val[i]
        } else {
            self.certain[q]
        }
    }

    fn check(&self) -> Option<Vec<AtomId>> {
        let prog = self.prog;
        let mut m = self.certain.clone();
        loop {
            let mut changed = false;
            for r in &prog.rules {
                if !m[r.head] && r.pos.iter().all(|&a| m[a]) && r.neg.iter().all(|&q| !self.assumed(q)) {
                    m[r.head] = true;
                    changed = true;
                }
            }
            for (g, c) in prog.choices.iter().enumerate() {
                if c.pos.iter().all(|&a| m[a]) && c.neg.iter().all(|&q| !self.assumed(q)) {
                    for &a in &self.current[g] {
                        if !m[a] {
                            m[a] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (i, &q) in self.guess_atoms.iter().enumerate() {
            if m[q] != self.guess_val[i] {
                return None;
            }
        }
        for (g, c) in prog.choices.iter().enumerate() {
            let body = c.pos.iter().all(|&a| m[a]) && c.neg.iter().all(|&q| !m[q]);
            let chosen = &self.current[g];
            if body {
                if chosen.len() < c.lower || chosen.len() > c.upper {
                    return None;
                }
                if c.heads.iter().any(|h| m[*h] != chosen.contains(h)) {
                    return None;
                }
            } else if !chosen.is_empty() {
                return None;
            }
        }
        for &i in &self.heavy_constraints {
            let c = &prog.constraints[i];
            if c.pos.iter().all(|&a| m[a]) && c.neg.iter().all(|&q| !m[q]) {
                return None;
            }
        }
        debug_assert!((0..m.len()).all(|a| !m[a] || self.possible[a]));
        Some((0..m.len()).filter(|&a| m[a]).collect())
    }
}

/// Advances `idx` to the next `idx.len()`-combination of `0..n` in
/// lexicographic order.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
