//! A generator that answers from per-step candidate pools, used to record
//! the scripted fixtures.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use crate::generator::{prompt_sha256, Completion, GenError, Generator};
use crate::puzzle::PuzzleInstance;
use crate::trajectory::{HINT_HEADER, TASK_HEADER};

/// Corrupted or useless candidate blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distractor {
    /// A comment only: flagless, narrows nothing.
    Weak,
    /// Forbids a fact, so the program has no models.
    Unsat,
    /// The reference with its final period removed.
    Syntax,
    /// Refers to an atom no rule defines.
    Undefined,
    /// `:- f, not f.` over an undefined `f`.
    Vacuous,
    /// A constraint with an unbound variable.
    Unsafe,
    /// Prose with no code at all.
    Prose,
    /// Forbids one ground-truth atom: satisfiable but wrong.
    ForbidTruth,
    /// Base step only: drops the uniqueness rule.
    MissingUniqueness,
    /// Base step only: lower bound 0 on the choice rule.
    LooseBounds,
}

/// Facts about a puzzle the distractors are built from.
#[derive(Debug, Clone)]
pub struct PoolContext {
    /// A ground fact, e.g. `people(50)`.
    pub fact: String,
    /// The fact's predicate name.
    pub fact_predicate: String,
    /// Ground-truth solution atoms.
    pub truth_atoms: Vec<String>,
}

impl Distractor {
    pub fn render(self, reference: &str, ctx: &PoolContext) -> String {
        let r = reference.trim_end();
        match self {
            Distractor::Weak => "% nothing new follows from this hint".into(),
            Distractor::Unsat => format!(":- {}.", ctx.fact),
            Distractor::Syntax => r.strip_suffix('.').unwrap_or(r).to_string(),
            Distractor::Undefined => ":- not hint_holds.".into(),
            Distractor::Vacuous => ":- f, not f.".into(),
            Distractor::Unsafe => format!(":- {}(X), Y != X.", ctx.fact_predicate),
            Distractor::Prose => "This hint is already implied by the encoding, so nothing needs to be added.".into(),
            Distractor::ForbidTruth => format!(":- {}.", ctx.truth_atoms[0]),
            Distractor::MissingUniqueness => {
                let lines: Vec<&str> = r.lines().collect();
                lines[..lines.len() - 1].join("\n")
            }
            Distractor::LooseBounds => r.replacen("1 {", "0 {", 1),
        }
    }
}

/// Wraps a block the way chat models tend to answer. Prose stays bare.
pub fn wrap_completion(block: &str, fenced: bool) -> String {
    if fenced {
        format!("Here is the encoding.\n```asp\n{}\n```\n", block.trim_end())
    } else {
        block.to_string()
    }
}

/// Whitespace-separated words.
pub fn word_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Candidate batches for one step. Call `i` on the same prompt answers from
/// batch `i`, or the last batch once they run out.
pub type StepPool = Vec<Vec<String>>;

struct Entry {
    description: String,
    hints: Vec<String>,
    steps: Vec<StepPool>,
}

/// Finds the puzzle by its description and the step by the last hint
/// section of the prompt.
pub struct PoolGenerator {
    entries: Vec<Entry>,
    calls: Mutex<HashMap<String, usize>>,
}

impl PoolGenerator {
    pub fn new() -> Self {
        PoolGenerator { entries: Vec::new(), calls: Mutex::new(HashMap::new()) }
    }

    /// `steps[0]` is the base step, `steps[k]` the step for hint `k - 1`.
    pub fn add(&mut self, instance: &PuzzleInstance, steps: Vec<StepPool>) {
        self.entries.push(Entry { description: instance.description.trim().to_string(), hints: instance.hints.clone(), steps });
    }

    fn locate(&self, prompt: &str) -> Option<(&Entry, usize)> {
        let entry = self.entries.iter().find(|e| prompt.contains(&e.description))?;
        let Some(pos) = prompt.rfind(HINT_HEADER) else {
            return Some((entry, 0));
        };
        let rest = &prompt[pos + HINT_HEADER.len()..];
        let end = rest.find(&format!("\n\n{TASK_HEADER}")).unwrap_or(rest.len());
        let hint = rest[..end].trim();
        let k = entry.hints.iter().position(|h| h.trim() == hint)?;
        Some((entry, k + 1))
    }

    /// Number of calls seen per prompt hash.
    pub fn call_counts(&self) -> BTreeMap<String, usize> {
        self.calls.lock().unwrap().iter().map(|(k, v)| (k.clone(), *v)).collect()
    }
}

impl Default for PoolGenerator {
    fn default() -> Self {
        Self::new()
    }
}

impl Generator for PoolGenerator {
    fn id(&self) -> String {
        "pool".into()
    }

    fn complete(&self, prompt: &str, n: usize, _temperature: f64) -> Result<Vec<Completion>, GenError> {
        let (entry, step) = self.locate(prompt).ok_or_else(|| GenError::Backend("prompt matches no pooled puzzle step".into()))?;
        let pool = entry.steps.get(step).ok_or_else(|| GenError::Backend(format!("no pool for step {step}")))?;
        let call = {
            let mut calls = self.calls.lock().unwrap();
            let c = calls.entry(prompt_sha256(prompt)).or_default();
            *c += 1;
            *c - 1
        };
        let Some(batch) = pool.get(call).or(pool.last()) else {
            return Ok(Vec::new());
        };
        Ok(batch.iter().take(n).map(|t| Completion { text: t.clone(), output_tokens: word_count(t) }).collect())
    }
}
