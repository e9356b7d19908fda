//! Reference semantics: a direct stable-model check and an exhaustive
//! enumerator built on it. Both are slow and deliberately share nothing with
//! the search in `enumerate`.

use std::collections::BTreeSet;

use crate::enumerate::next_combination;
use crate::error::SolveError;
use crate::ground::{AtomId, GroundProgram};
use crate::value::AnswerSet;

/// Largest candidate space [`brute_force_models`] will walk.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Is `c` (indexed by atom id) a stable model of `prog`?
///
/// `c` must equal the least model of the reduct: rules whose negative body
/// holds in `c`, and choice rules contributing their heads that are in `c`.
/// Choice bounds and constraints must hold as well.
pub fn check_model(prog: &GroundProgram, c: &[bool]) -> bool {
    let n = prog.atom_count();
    assert_eq!(c.len(), n, "candidate must cover every atom");
    let holds = |pos: &[AtomId], neg: &[AtomId], i: &[bool]| pos.iter().all(|&a| i[a]) && neg.iter().all(|&q| !c[q]);
    let mut lm: Vec<bool> = (0..n).map(|a| prog.is_certain(a)).collect();
    loop {
        let mut changed = false;
        for r in &prog.rules {
            if !lm[r.head] && holds(&r.pos, &r.neg, &lm) {
                lm[r.head] = true;
                changed = true;
            }
        }
        for g in &prog.choices {
            if holds(&g.pos, &g.neg, &lm) {
                for &h in &g.heads {
                    if c[h] && !lm[h] {
                        lm[h] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if lm != c {
        return false;
    }
    for g in &prog.choices {
        if holds(&g.pos, &g.neg, c) {
            let k = g.heads.iter().filter(|&&h| c[h]).count();
            if k < g.lower || k > g.upper {
                return false;
            }
        }
    }
    !prog.constraints.iter().any(|k| holds(&k.pos, &k.neg, c))
}

/// Is `model` a stable model of `prog`? Atoms unknown to the program make it fail.
pub fn is_stable_model(prog: &GroundProgram, model: &AnswerSet) -> bool {
    let mut c = vec![false; prog.atom_count()];
    for atom in model.sorted() {
        match prog.atom_id(atom) {
            Some(id) => c[id] = true,
            None => return false,
        }
    }
    check_model(prog, &c)
}

/// Every stable model, found by checking each candidate of the form
/// certain atoms + one admissible selection per choice group + any subset of
/// rule heads.
pub fn brute_force_models(prog: &GroundProgram) -> Result<Vec<AnswerSet>, SolveError> {
    let n = prog.atom_count();
    let mut options: Vec<Vec<Vec<AtomId>>> = Vec::new();
    let mut size: u128 = 1;
    for g in &prog.choices {
        let k = g.heads.len();
        let mut opts = Vec::new();
        for s in 0..=k {
            let admissible = (s >= g.lower && s <= g.upper) || (s == 0 && g.is_conditional());
            if !admissible {
                continue;
            }
            let mut idx: Vec<usize> = (0..s).collect();
            loop {
                opts.push(idx.iter().map(|&i| g.heads[i]).collect());
                if opts.len() as u128 > BRUTE_FORCE_LIMIT {
                    return Err(SolveError::SearchSpaceTooLarge { size: u128::MAX, limit: BRUTE_FORCE_LIMIT });
                }
                if !next_combination(&mut idx, k) {
                    break;
                }
            }
        }
        size = size.saturating_mul(opts.len() as u128);
        options.push(opts);
    }
    let derived: Vec<AtomId> = prog.rules.iter().map(|r| r.head).collect::<BTreeSet<_>>().into_iter().collect();
    size = size.saturating_mul(1u128.checked_shl(derived.len() as u32).unwrap_or(u128::MAX));
    if size > BRUTE_FORCE_LIMIT {
        return Err(SolveError::SearchSpaceTooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }
    if options.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }

    let mut found = BTreeSet::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        for mask in 0u64..(1u64 << derived.len()) {
            let mut c: Vec<bool> = (0..n).map(|a| prog.is_certain(a)).collect();
            for (g, &p) in pick.iter().enumerate() {
                for &a in &options[g][p] {
                    c[a] = true;
                }
            }
            for (i, &d) in derived.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    c[d] = true;
                }
            }
            if check_model(prog, &c) {
                found.insert(AnswerSet::new((0..n).filter(|&a| c[a]).map(|a| prog.atom(a).clone()).collect()));
            }
        }
        // Odometer over group options.
        let mut g = 0;
        loop {
            if g == pick.len() {
                return Ok(found.into_iter().collect());
            }
            pick[g] += 1;
            if pick[g] < options[g].len() {
                break;
            }
            pick[g] = 0;
            g += 1;
        }
    }
}
