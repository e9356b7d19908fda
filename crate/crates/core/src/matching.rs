//! Comparing an answer set against a puzzle's ground truth.
//!
//! Exact comparison runs on normalized surface forms. When that fails, every
//! ground-truth item is paired with its closest computed item by edit
//! distance and the resulting row map must be a consistent bijection.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use asploop_asp::AnswerSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::PuzzleInstance;

/// Lowercase, collapse each run of non-alphanumerics to `_`, trim underscores.
pub fn normalize_surface(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut gap = false;
    for ch in raw.chars() {
        if ch.is_alphanumeric() {
            if gap && !out.is_empty() {
                out.push('_');
            }
            gap = false;
            out.extend(ch.to_lowercase());
        } else {
            gap = true;
        }
    }
    out
}

/// Levenshtein distance over chars with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMethod {
    Exact,
    Levenshtein,
}

/// Row indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub matched: bool,
    pub method: Option<MatchMethod>,
    /// Ground-truth row to computed row.
    pub assignment_map: BTreeMap<usize, usize>,
    /// For each ground-truth row and item, the (gt row, computed row) argmin pair.
    pub item_matrix: Vec<Vec<(usize, usize)>>,
    pub diagnostics: Vec<String>,
}

impl MatchReport {
    fn failed(diagnostic: impl Into<String>) -> Self {
        MatchReport { matched: false, method: None, assignment_map: BTreeMap::new(), item_matrix: Vec::new(), diagnostics: vec![diagnostic.into()] }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("predicate {predicate} has arity {found} in the model, the puzzle has {expected} categories")]
    Arity { predicate: String, found: usize, expected: usize },
}

/// Target-predicate tuples of `model` as normalized strings, in reported order.
fn extract(model: &AnswerSet, predicate: &str) -> Vec<Vec<String>> {
    model.with_predicate(predicate).map(|a| a.args.iter().map(|v| normalize_surface(&v.surface())).collect()).collect()
}

fn normalized_truth(instance: &PuzzleInstance) -> Vec<Vec<String>> {
    instance.solution.iter().map(|row| row.iter().map(|s| normalize_surface(s)).collect()).collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Assigns each tuple position a category: most exact memberships first,
/// then least total edit distance to the category's members. Returns
/// `perm` with `perm[position] = category`.
fn assign_positions(tuples: &[Vec<String>], instance: &PuzzleInstance) -> Vec<usize> {
    let m = instance.m();
    let members: Vec<Vec<String>> = instance.categories.iter().map(|c| c.members.iter().map(|s| normalize_surface(s)).collect()).collect();
    // score[pos][cat] = (memberships, distance)
    let mut score = vec![vec![(0usize, 0usize); m]; m];
    for (pos, row) in score.iter_mut().enumerate() {
        for (cat, cell) in row.iter_mut().enumerate() {
            for t in tuples {
                let v = &t[pos];
                if members[cat].contains(v) {
                    cell.0 += 1;
                } else {
                    cell.1 += members[cat].iter().map(|x| edit_distance(v, x)).min().unwrap_or(0);
                }
            }
        }
    }
    let mut best: Option<((usize, usize), Vec<usize>)> = None;
    for perm in permutations(m) {
        let hits: usize = perm.iter().enumerate().map(|(p, &c)| score[p][c].0).sum();
        let dist: usize = perm.iter().enumerate().map(|(p, &c)| score[p][c].1).sum();
        let key = (usize::MAX - hits, dist);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Computed tuples reordered into category order.
fn reorder(tuples: &[Vec<String>], perm: &[usize]) -> Vec<Vec<String>> {
    tuples
        .iter()
        .map(|t| {
            let mut row = vec![String::new(); perm.len()];
            for (pos, &cat) in perm.iter().enumerate() {
                row[cat] = t[pos].clone();
            }
            row
        })
        .collect()
}

/// Fallback ordering key for one candidate item.
type TieKey = (usize, bool, bool, usize, usize);

pub fn match_solution(model: &AnswerSet, instance: &PuzzleInstance, target_predicate: &str) -> Result<MatchReport, MatchError> {
    match_with(model, instance, target_predicate, false)
}

/// Like [`match_solution`], but `force_fallback` skips the exact comparison.
pub fn match_with(model: &AnswerSet, instance: &PuzzleInstance, target_predicate: &str, force_fallback: bool) -> Result<MatchReport, MatchError> {
    let m = instance.m();
    if let Some(a) = model.with_predicate(target_predicate).find(|a| a.args.len() != m) {
        return Err(MatchError::Arity { predicate: target_predicate.into(), found: a.args.len(), expected: m });
    }
    let tuples = extract(model, target_predicate);
    let n = instance.n();
    if tuples.len() != n {
        return Ok(MatchReport::failed(format!("cardinality mismatch: {} {target_predicate} tuples, expected {n}", tuples.len())));
    }
    let computed = reorder(&tuples, &assign_positions(&tuples, instance));
    let truth = normalized_truth(instance);

    if !force_fallback {
        let rows: HashSet<&Vec<String>> = computed.iter().collect();
        if rows.len() == n && truth.iter().all(|t| rows.contains(t)) {
            let map: BTreeMap<usize, usize> = truth.iter().enumerate().map(|(i, t)| (i, computed.iter().position(|c| c == t).unwrap())).collect();
            let item_matrix = (0..n).map(|i| vec![(i, map[&i]); m]).collect();
            return Ok(MatchReport { matched: true, method: Some(MatchMethod::Exact), assignment_map: map, item_matrix, diagnostics: Vec::new() });
        }
    }

    // Fallback: argmin over every computed item, ties broken by containment,
    // then same category, then lowest computed row.
    let mut matrix = Vec::with_capacity(n);
    for (i, row) in truth.iter().enumerate() {
        let mut cells = Vec::with_capacity(m);
        for (c, item) in row.iter().enumerate() {
            // (distance, not contained, other category, row, column) and the row.
            let mut best: Option<(TieKey, usize)> = None;
            for (j, crow) in computed.iter().enumerate() {
                for (c2, other) in crow.iter().enumerate() {
                    let d = edit_distance(item, other);
                    let contained = !other.is_empty() && (item.contains(other.as_str()) || other.contains(item.as_str()));
                    let key = (d, !contained, c2 != c, j, c2);
                    if best.as_ref().is_none_or(|(k, _)| key < *k) {
                        best = Some((key, j));
                    }
                }
            }
            cells.push((i, best.map_or(usize::MAX, |(_, j)| j)));
        }
        matrix.push(cells);
    }
    let mut map = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for (i, cells) in matrix.iter().enumerate() {
        let targets: BTreeSet<usize> = cells.iter().map(|&(_, j)| j).collect();
        if targets.len() == 1 {
            map.insert(i, *targets.iter().next().unwrap());
        } else {
            diagnostics.push(format!("ground-truth row {i} spreads over computed rows {targets:?}"));
        }
    }
    let image: BTreeSet<usize> = map.values().copied().collect();
    if map.len() == n && image.len() != n {
        diagnostics.push("two ground-truth rows map to the same computed row".into());
    }
    let matched = diagnostics.is_empty();
    Ok(MatchReport {
        matched,
        method: matched.then_some(MatchMethod::Levenshtein),
        assignment_map: if matched { map } else { BTreeMap::new() },
        item_matrix: matrix,
        diagnostics,
    })
}

/// Guesses which predicate carries the solution: arity `m`, preferring
/// exactly `n` atoms, then the most category members among its arguments,
/// then the alphabetically first name.
pub fn detect_target_predicate(model: &AnswerSet, instance: &PuzzleInstance) -> Option<String> {
    let m = instance.m();
    let n = instance.n();
    let members: HashSet<String> = instance.categories.iter().flat_map(|c| c.members.iter().map(|s| normalize_surface(s))).collect();
    let mut stats: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for a in model.sorted() {
        if a.args.len() != m {
            continue;
        }
        let e = stats.entry(&*a.predicate).or_default();
        e.0 += 1;
        e.1 += a.args.iter().filter(|v| members.contains(&normalize_surface(&v.surface()))).count();
    }
    stats.into_iter().min_by_key(|(name, (count, hits))| (*count != n, usize::MAX - hits, *name)).map(|(name, _)| name.to_string())
}

/// The model's solution tuples in category order, if the predicate is found.
pub fn predicted_tuples(model: &AnswerSet, instance: &PuzzleInstance, predicate: &str) -> Vec<Vec<String>> {
    let tuples = extract(model, predicate);
    if tuples.is_empty() || tuples.iter().any(|t| t.len() != instance.m()) {
        return tuples;
    }
    let mut rows = reorder(&tuples, &assign_positions(&tuples, instance));
    rows.sort();
    rows
}

/// Does some model in `models` match the ground truth?
pub fn any_model_matches(models: &[AnswerSet], instance: &PuzzleInstance) -> bool {
    models.iter().any(|model| model_matches(model, instance))
}

pub fn model_matches(model: &AnswerSet, instance: &PuzzleInstance) -> bool {
    detect_target_predicate(model, instance).and_then(|p| match_solution(model, instance, &p).ok()).is_some_and(|r| r.matched)
}
