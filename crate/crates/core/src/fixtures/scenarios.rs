//! Candidate pools for the scripted search and datagen fixtures, and the
//! recorder that turns them into prompt-hash scripts.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::pool::{wrap_completion, Distractor, PoolContext, PoolGenerator, StepPool};
use super::{FixtureError, FixtureSet};
use crate::datagen::{run_dfs, DatagenConfig};
use crate::generator::{script_to_jsonl, Generator, RecordingGenerator};
use crate::puzzle::PuzzleInstance;
use crate::search::{run_search, SearchConfig};
use crate::solver::Gateway;
use crate::trajectory::DEFAULT_PREAMBLE;

pub const DEFAULT_SEED: u64 = 7;

/// The puzzle the single-instance scenarios run on.
pub const SCENARIO_PUZZLE: &str = "anniversary";
/// Hint step whose first batch is all errors in the regeneration scenario.
pub const REGEN_STEP: usize = 2;
/// Hint step that holds the trap in the backtracking scenario.
pub const TRAP_STEP: usize = 1;

/// One entry of a candidate batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Ref,
    /// The reference plus a `% variant k` comment.
    Variant(usize),
    /// The reference plus a constraint that forbids a ground-truth atom.
    Trap,
    D(Distractor),
}

use Distractor::*;
use Slot::{Ref, Trap, Variant, D};

struct Builder<'a> {
    references: &'a [String],
    ctx: PoolContext,
    /// Body of the trap constraint.
    trap: Option<String>,
}

impl Builder<'_> {
    fn render(&self, step: usize, slot: Slot) -> String {
        let reference = &self.references[step];
        match slot {
            Ref => wrap_completion(reference, true),
            Variant(k) => wrap_completion(&format!("{reference}\n% variant {k}"), true),
            Trap => wrap_completion(&format!("{reference}\n:- {}.", self.trap.as_deref().expect("trap chosen")), true),
            D(Prose) => wrap_completion(&Prose.render(reference, &self.ctx), false),
            D(d) => wrap_completion(&d.render(reference, &self.ctx), true),
        }
    }

    fn batch(&self, step: usize, slots: &[Slot]) -> Vec<String> {
        slots.iter().map(|&s| self.render(step, s)).collect()
    }
}

const BASE_FIRST: [Slot; 5] = [D(LooseBounds), Ref, D(Syntax), D(MissingUniqueness), D(Unsat)];
const BASE_REGEN: [Slot; 10] =
    [D(Syntax), D(LooseBounds), Ref, D(MissingUniqueness), D(Unsat), D(Prose), D(Syntax), D(LooseBounds), D(Unsat), D(MissingUniqueness)];
const ALL_ERRORS: [Slot; 5] = [D(Syntax), D(Undefined), D(Vacuous), D(Unsafe), D(Prose)];
const NEGATIVE_REGEN: [Slot; 10] = [D(Syntax), D(Unsafe), Ref, D(Unsat), D(Undefined), D(Vacuous), D(Prose), D(Syntax), D(Unsat), D(Undefined)];

fn pool_context(set: &FixtureSet, instance: &PuzzleInstance) -> Result<PoolContext, FixtureError> {
    let base = &set.reference_blocks(&instance.id)?[0];
    let first = base.lines().next().unwrap_or_default();
    let prog = asploop_asp::ground(&asploop_asp::parse_program(first).map_err(|e| FixtureError::Scenario(e.to_string()))?)
        .map_err(|e| FixtureError::Scenario(e.to_string()))?;
    let fact =
        prog.certain_atoms().map(|id| prog.atom(id).clone()).min().ok_or_else(|| FixtureError::Scenario(format!("{}: base has no facts", instance.id)))?;
    let truth = set.truth_model(instance)?;
    let pred =
        crate::matching::detect_target_predicate(&truth, instance).ok_or_else(|| FixtureError::Scenario(format!("{}: no solution predicate", instance.id)))?;
    let mut atoms: Vec<&asploop_asp::Atom> = truth.with_predicate(&pred).collect();
    atoms.sort();
    let truth_atoms = atoms.into_iter().map(|a| a.to_string()).collect();
    Ok(PoolContext { fact_predicate: fact.predicate.to_string(), fact: fact.to_string(), truth_atoms })
}

fn builder<'a>(set: &'a FixtureSet, instance: &PuzzleInstance) -> Result<Builder<'a>, FixtureError> {
    Ok(Builder { references: set.reference_blocks(&instance.id)?, ctx: pool_context(set, instance)?, trap: None })
}

/// Every step offers a flagless candidate; no recovery is needed.
fn clean_pools(b: &Builder, hints: usize) -> Vec<StepPool> {
    let mut steps = vec![vec![b.batch(0, &BASE_FIRST), b.batch(0, &BASE_REGEN)]];
    for k in 1..=hints {
        steps.push(vec![b.batch(k, &[D(Syntax), D(Weak), Ref, D(Unsat), D(Vacuous)]), b.batch(k, &NEGATIVE_REGEN)]);
    }
    steps
}

/// Step `REGEN_STEP` starts with five errors; the regeneration batch holds
/// the reference.
fn regen_pools(b: &Builder, hints: usize) -> Vec<StepPool> {
    let mut steps = clean_pools(b, hints);
    steps[REGEN_STEP] = vec![b.batch(REGEN_STEP, &ALL_ERRORS), b.batch(REGEN_STEP, &NEGATIVE_REGEN)];
    steps
}

/// Step `TRAP_STEP` offers a trap that beats the reference on reward but
/// excludes the ground truth, so a later step runs out of valid
/// continuations.
fn backtrack_pools(b: &Builder, hints: usize) -> Vec<StepPool> {
    let mut steps = vec![vec![b.batch(0, &BASE_FIRST), b.batch(0, &BASE_REGEN)]];
    for k in 1..=hints {
        let first: &[Slot] =
            if k == TRAP_STEP { &[Trap, Ref, D(Syntax), D(Unsat), D(Undefined)] } else { &[D(Syntax), Ref, D(Unsat), D(Undefined), D(Vacuous)] };
        steps.push(vec![b.batch(k, first), b.batch(k, &NEGATIVE_REGEN)]);
    }
    steps
}

/// Picks the trap constraint body: the trap must keep the step satisfiable
/// with strictly fewer models than the reference while excluding the ground
/// truth. Candidates forbid a ground-truth atom or force a wrong one; a trap
/// that fails two hints later is preferred. Returns the body and the first
/// step whose reference continuation is unsatisfiable.
pub fn choose_trap(set: &FixtureSet, instance: &PuzzleInstance, gateway: &Gateway) -> Result<(String, usize), FixtureError> {
    let refs = set.reference_blocks(&instance.id)?;
    let ctx = pool_context(set, instance)?;
    let cap = crate::datagen::classification_cap(instance)?;
    let prefix = |k: usize| refs[..=k].join("\n");
    let plain = gateway.solve(&prefix(TRAP_STEP), cap);
    let mut bodies: Vec<String> = ctx.truth_atoms.clone();
    bodies.extend(target_atoms(set, instance)?.into_iter().filter(|a| !ctx.truth_atoms.contains(a)).map(|a| format!("not {a}")));
    let mut fallback = None;
    for body in bodies {
        let trapped = format!("{}\n:- {body}.", prefix(TRAP_STEP));
        let v = gateway.solve(&trapped, cap);
        if !v.flagless() || v.model_count() >= plain.model_count() {
            continue;
        }
        let fail = (TRAP_STEP + 1..refs.len()).find(|&k| {
            let p = format!("{trapped}\n{}", refs[TRAP_STEP + 1..=k].join("\n"));
            gateway.solve(&p, cap).is_unsat()
        });
        match fail {
            Some(f) if f == TRAP_STEP + 2 => return Ok((body, f)),
            Some(f) => {
                fallback.get_or_insert((body, f));
            }
            None => {}
        }
    }
    fallback.ok_or_else(|| FixtureError::Scenario(format!("{}: no usable trap", instance.id)))
}

/// Every ground atom of the solution predicate the base reference can
/// produce, sorted.
fn target_atoms(set: &FixtureSet, instance: &PuzzleInstance) -> Result<Vec<String>, FixtureError> {
    let truth = set.truth_model(instance)?;
    let pred =
        crate::matching::detect_target_predicate(&truth, instance).ok_or_else(|| FixtureError::Scenario(format!("{}: no solution predicate", instance.id)))?;
    let base = &set.reference_blocks(&instance.id)?[0];
    let prog = asploop_asp::ground(&asploop_asp::parse_program(base).map_err(|e| FixtureError::Scenario(e.to_string()))?)
        .map_err(|e| FixtureError::Scenario(e.to_string()))?;
    let mut atoms: Vec<&asploop_asp::Atom> = (0..prog.atom_count()).map(|i| prog.atom(i)).filter(|a| *a.predicate == *pred).collect();
    atoms.sort();
    Ok(atoms.into_iter().map(|a| a.to_string()).collect())
}

fn shuffled(rng: &mut StdRng, slots: &[Slot]) -> Vec<Slot> {
    let mut v = slots.to_vec();
    v.shuffle(rng);
    v
}

/// Reference plus distractors in seeded order at every step.
fn e2e_pools(b: &Builder, hints: usize, rng: &mut StdRng) -> Vec<StepPool> {
    let mut steps = vec![vec![b.batch(0, &shuffled(rng, &BASE_FIRST)), b.batch(0, &shuffled(rng, &BASE_REGEN))]];
    for k in 1..=hints {
        let first = shuffled(rng, &[Ref, D(Weak), D(Unsat), D(Syntax), D(Undefined)]);
        let regen = shuffled(rng, &[Ref, D(Weak), D(Unsat), D(Syntax), D(Undefined), D(Vacuous), D(Unsafe), D(Prose), D(Syntax), D(Unsat)]);
        steps.push(vec![b.batch(k, &first), b.batch(k, &regen)]);
    }
    steps
}

const REJECTED: [Slot; 5] = [D(Unsat), D(Syntax), D(Undefined), D(ForbidTruth), D(Vacuous)];

/// A hint batch with `chosen` acceptable candidates (the reference and
/// commented variants) and `5 - chosen` rejected ones, in seeded order.
fn split_batch(chosen: usize, rng: &mut StdRng) -> Vec<Slot> {
    let mut slots: Vec<Slot> = (0..chosen).map(|k| if k == 0 { Ref } else { Variant(k) }).collect();
    slots.extend(REJECTED.iter().take(5 - chosen));
    slots.shuffle(rng);
    slots
}

/// The first hint has `chosen` acceptable candidates; every other hint has
/// exactly one.
fn datagen_split_pools(b: &Builder, hints: usize, chosen: usize, rng: &mut StdRng) -> Vec<StepPool> {
    let mut steps = vec![vec![b.batch(0, &shuffled(rng, &BASE_FIRST))]];
    for k in 1..=hints {
        let c = if k == 1 { chosen } else { 1 };
        steps.push(vec![b.batch(k, &split_batch(c, rng))]);
    }
    steps
}

/// Two chosen at the first hint, none at the second, one elsewhere.
fn datagen_mixed_pools(b: &Builder, hints: usize, rng: &mut StdRng) -> Vec<StepPool> {
    let mut steps = vec![vec![b.batch(0, &shuffled(rng, &BASE_FIRST))]];
    for k in 1..=hints {
        let c = match k {
            1 => 2,
            2 => 0,
            _ => 1,
        };
        steps.push(vec![b.batch(k, &split_batch(c, rng))]);
    }
    steps
}

/// What a script drives.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptRun {
    Search(SearchConfig),
    Datagen(DatagenConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptSpec {
    /// File name under `scripts/`.
    pub file: String,
    pub instance_ids: Vec<String>,
    pub run: ScriptRun,
}

/// Every checked-in script, in a fixed order.
pub fn script_specs(set: &FixtureSet) -> Vec<ScriptSpec> {
    let one = vec![SCENARIO_PUZZLE.to_string()];
    let all: Vec<String> = set.puzzles.iter().map(|p| p.id.clone()).collect();
    let mut specs = Vec::new();
    for name in ["clean", "regen", "backtrack"] {
        specs.push(ScriptSpec { file: format!("search_{name}.jsonl"), instance_ids: one.clone(), run: ScriptRun::Search(SearchConfig::default()) });
        specs.push(ScriptSpec { file: format!("search_{name}_plain.jsonl"), instance_ids: one.clone(), run: ScriptRun::Search(SearchConfig::sequential(5)) });
    }
    specs.push(ScriptSpec { file: "e2e_n5.jsonl".into(), instance_ids: all.clone(), run: ScriptRun::Search(SearchConfig::sequential(5)) });
    specs.push(ScriptSpec { file: "e2e_n1.jsonl".into(), instance_ids: all.clone(), run: ScriptRun::Search(SearchConfig::sequential(1)) });
    for c in 0..=5 {
        specs.push(ScriptSpec { file: format!("datagen_c{c}.jsonl"), instance_ids: one.clone(), run: ScriptRun::Datagen(DatagenConfig::default()) });
    }
    specs.push(ScriptSpec { file: "datagen_mixed.jsonl".into(), instance_ids: all, run: ScriptRun::Datagen(DatagenConfig::default()) });
    specs
}

/// Pool generator for a script file.
pub fn pools_for(set: &FixtureSet, file: &str, gateway: &Gateway, seed: u64) -> Result<PoolGenerator, FixtureError> {
    let stem = file.trim_end_matches(".jsonl");
    let mut rng = StdRng::seed_from_u64(seed);
    let mut g = PoolGenerator::new();
    let scenario = set.puzzle(SCENARIO_PUZZLE)?;
    let hints = scenario.hints.len();
    match stem.trim_end_matches("_plain") {
        "search_clean" => g.add(scenario, clean_pools(&builder(set, scenario)?, hints)),
        "search_regen" => g.add(scenario, regen_pools(&builder(set, scenario)?, hints)),
        "search_backtrack" => {
            let mut b = builder(set, scenario)?;
            b.trap = Some(choose_trap(set, scenario, gateway)?.0);
            g.add(scenario, backtrack_pools(&b, hints));
        }
        "e2e_n5" | "e2e_n1" => {
            for p in &set.puzzles {
                g.add(p, e2e_pools(&builder(set, p)?, p.hints.len(), &mut rng));
            }
        }
        "datagen_mixed" => {
            for p in &set.puzzles {
                g.add(p, datagen_mixed_pools(&builder(set, p)?, p.hints.len(), &mut rng));
            }
        }
        s => {
            let c: usize = s
                .strip_prefix("datagen_c")
                .and_then(|c| c.parse().ok())
                .filter(|&c| c <= 5)
                .ok_or_else(|| FixtureError::Scenario(format!("unknown script {file}")))?;
            g.add(scenario, datagen_split_pools(&builder(set, scenario)?, hints, c, &mut rng));
        }
    }
    Ok(g)
}

/// Runs a spec against a generator, discarding results.
pub fn drive(set: &FixtureSet, spec: &ScriptSpec, generator: &dyn Generator, gateway: &Gateway) -> Result<(), FixtureError> {
    for id in &spec.instance_ids {
        let inst = set.puzzle(id)?;
        match &spec.run {
            ScriptRun::Search(cfg) => {
                run_search(inst, generator, gateway, cfg, &[], DEFAULT_PREAMBLE).map_err(|e| FixtureError::Scenario(format!("{}: {e}", spec.file)))?;
            }
            ScriptRun::Datagen(cfg) => {
                run_dfs(inst, generator, gateway, cfg, &[], DEFAULT_PREAMBLE).map_err(|e| FixtureError::Scenario(format!("{}: {e}", spec.file)))?;
            }
        }
    }
    Ok(())
}

/// Records every script: file name to JSONL text.
pub fn build_scripts(set: &FixtureSet, gateway: &Gateway, seed: u64) -> Result<BTreeMap<String, String>, FixtureError> {
    let mut out = BTreeMap::new();
    for spec in script_specs(set) {
        let rec = RecordingGenerator::new(pools_for(set, &spec.file, gateway, seed)?);
        drive(set, &spec, &rec, gateway)?;
        out.insert(spec.file.clone(), script_to_jsonl(&rec.entries()));
    }
    Ok(out)
}
