//! The bundled fixture corpus: puzzles with reference encodings, the
//! worked encodings, a cross-check program set and generator scripts.
//!
//! Layout under `fixtures/`:
//!
//! - `puzzles.json`: puzzle instances in dataset format.
//! - `references.json`: per puzzle, the reference block for the base step
//!   followed by one block per hint.
//! - `encodings/*.lp`: full encodings, including a broken listing.
//! - `crosscheck/*.lp`: small programs for solver cross-checks.
//! - `scripts/*.jsonl`: scripted-generator fixtures keyed by prompt hash.

pub mod oracle;
pub mod pool;
pub mod scenarios;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use asploop_asp::{enumerate_models, parse_program, AnswerSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::ScriptedGenerator;
use crate::matching::{detect_target_predicate, model_matches, normalize_surface, predicted_tuples};
use crate::puzzle::{expected_model_count, PuzzleError, PuzzleInstance};
use crate::solver::{solve_internal, Gateway};

pub const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

/// Solution atoms listed for the anniversary puzzle.
pub const ANNIVERSARY_ATOMS: &str =
    "assignment(anniversary,susan,75) assignment(wedding,herbert,50) assignment(birthday,joel,100) assignment(graduation,teresa,125)";

/// Puzzles whose solution is typed in from the source text rather than derived.
const TRANSCRIBED: &[&str] = &["anniversary"];
/// Puzzles whose solution comes from the bijection oracle.
const ORACLE_SOLVED: &[&str] = &["tattoo"];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("missing fixture: {0}")]
    Missing(String),
    #[error("{id}: {message}")]
    Solve { id: String, message: String },
    #[error("fixture drift in: {}", .0.join("; "))]
    Drift(Vec<String>),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

fn read(path: &Path) -> Result<String, FixtureError> {
    std::fs::read_to_string(path).map_err(|e| FixtureError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn write(path: &Path, text: &str) -> Result<(), FixtureError> {
    std::fs::write(path, text).map_err(|e| FixtureError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FixtureError> {
    serde_json::from_str(&read(path)?).map_err(|e| FixtureError::Json { path: path.display().to_string(), message: e.to_string() })
}

fn lp_files(dir: &Path) -> Result<Vec<(String, String)>, FixtureError> {
    let entries = std::fs::read_dir(dir).map_err(|e| FixtureError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    let mut out = Vec::new();
    for e in entries.flatten() {
        let p = e.path();
        if p.extension().is_some_and(|x| x == "lp") {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().to_string();
            out.push((name, read(&p)?));
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub root: PathBuf,
    pub puzzles: Vec<PuzzleInstance>,
    pub references: BTreeMap<String, Vec<String>>,
    /// File stem to source.
    pub encodings: BTreeMap<String, String>,
    /// (file stem, source), sorted by name.
    pub crosscheck: Vec<(String, String)>,
}

impl FixtureSet {
    pub fn load(root: &Path) -> Result<Self, FixtureError> {
        Ok(FixtureSet {
            root: root.to_path_buf(),
            puzzles: read_json(&root.join("puzzles.json"))?,
            references: read_json(&root.join("references.json"))?,
            encodings: lp_files(&root.join("encodings"))?.into_iter().collect(),
            crosscheck: lp_files(&root.join("crosscheck"))?,
        })
    }

    pub fn load_default() -> Result<Self, FixtureError> {
        Self::load(Path::new(FIXTURE_DIR))
    }

    pub fn puzzle(&self, id: &str) -> Result<&PuzzleInstance, FixtureError> {
        self.puzzles.iter().find(|p| p.id == id).ok_or_else(|| FixtureError::Missing(format!("puzzle {id}")))
    }

    pub fn reference_blocks(&self, id: &str) -> Result<&[String], FixtureError> {
        self.references.get(id).map(Vec::as_slice).ok_or_else(|| FixtureError::Missing(format!("reference blocks for {id}")))
    }

    /// All reference blocks joined: the full encoding.
    pub fn reference_program(&self, id: &str) -> Result<String, FixtureError> {
        Ok(self.reference_blocks(id)?.join("\n"))
    }

    pub fn encoding(&self, stem: &str) -> Result<&str, FixtureError> {
        self.encodings.get(stem).map(String::as_str).ok_or_else(|| FixtureError::Missing(format!("encodings/{stem}.lp")))
    }

    pub fn script_path(&self, file: &str) -> PathBuf {
        self.root.join("scripts").join(file)
    }

    pub fn scripted(&self, file: &str) -> Result<ScriptedGenerator, FixtureError> {
        ScriptedGenerator::load(&self.script_path(file)).map_err(|e| FixtureError::Missing(e.to_string()))
    }

    /// The unique model of a puzzle's full reference encoding.
    pub fn truth_model(&self, instance: &PuzzleInstance) -> Result<AnswerSet, FixtureError> {
        unique_model(&instance.id, &self.reference_program(&instance.id)?)
    }
}

fn unique_model(id: &str, program: &str) -> Result<AnswerSet, FixtureError> {
    let v = solve_internal(program, 2);
    if !v.flagless() || v.model_count() != 1 {
        return Err(FixtureError::Solve {
            id: id.to_string(),
            message: format!("expected one model, got {} (flags {:?}, {:?})", v.model_count(), v.flags(), v.diagnostics()),
        });
    }
    Ok(v.models()[0].clone())
}

/// Solution rows in category order, using the puzzle's own surface forms.
/// Rows are ordered by the first category's member order.
pub fn solution_from_model(model: &AnswerSet, instance: &PuzzleInstance) -> Option<Vec<Vec<String>>> {
    let pred = detect_target_predicate(model, instance)?;
    let mut rows = Vec::new();
    for t in predicted_tuples(model, instance, &pred) {
        let row = t
            .iter()
            .zip(&instance.categories)
            .map(|(v, c)| c.members.iter().find(|m| normalize_surface(m) == normalize_surface(v)).cloned())
            .collect::<Option<Vec<String>>>()?;
        rows.push(row);
    }
    let first = &instance.categories.first()?.members;
    rows.sort_by_key(|r| first.iter().position(|m| *m == r[0]));
    Some(rows)
}

fn sorted_rows(rows: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut r = rows.to_vec();
    r.sort();
    r
}

/// The tattoo puzzle ground truth from the bijection oracle: the unique
/// stable model among all `(n!)^(m-1)` candidates.
pub fn oracle_solution(set: &FixtureSet, id: &str) -> Result<(AnswerSet, Vec<Vec<String>>), FixtureError> {
    let inst = set.puzzle(id)?;
    let program = set.reference_program(id)?;
    let fail = |message: String| FixtureError::Solve { id: id.to_string(), message };
    let prog = asploop_asp::ground(&parse_program(&program).map_err(|e| fail(e.to_string()))?).map_err(|e| fail(e.to_string()))?;
    let truth = set.truth_model(inst)?;
    let pred = detect_target_predicate(&truth, inst).ok_or_else(|| fail("no solution predicate".into()))?;
    let models = oracle::bijection_models(&prog, inst, &pred);
    if models.len() != 1 {
        return Err(fail(format!("bijection oracle found {} models", models.len())));
    }
    let rows = solution_from_model(&models[0], inst).ok_or_else(|| fail("oracle model does not map onto the categories".into()))?;
    Ok((models[0].clone(), rows))
}

/// Solutions for every puzzle that is not transcribed.
pub fn derived_solutions(set: &FixtureSet) -> Result<BTreeMap<String, Vec<Vec<String>>>, FixtureError> {
    let mut out = BTreeMap::new();
    for p in &set.puzzles {
        if TRANSCRIBED.contains(&p.id.as_str()) {
            continue;
        }
        let rows = if ORACLE_SOLVED.contains(&p.id.as_str()) {
            oracle_solution(set, &p.id)?.1
        } else {
            let model = set.truth_model(p)?;
            solution_from_model(&model, p).ok_or_else(|| FixtureError::Solve { id: p.id.clone(), message: "model does not map onto the categories".into() })?
        };
        out.insert(p.id.clone(), rows);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn record(&mut self, name: impl Into<String>, result: Result<String, String>) {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn ensure(&self) -> Result<(), FixtureError> {
        let failed: Vec<String> = self.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(FixtureError::Drift(failed))
        }
    }
}

fn check_anniversary(set: &FixtureSet) -> Result<String, String> {
    let listed = asploop_asp::parse_ground_atoms(ANNIVERSARY_ATOMS).map_err(|e| e.to_string())?;
    let file = unique_model("anniversary.lp", set.encoding("anniversary").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if !listed.iter().all(|a| file.contains(a)) {
        return Err(format!("model {file} lacks a listed atom"));
    }
    let steps = unique_model("anniversary", &set.reference_program("anniversary").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if steps != file {
        return Err("step blocks and the full encoding disagree".into());
    }
    let inst = set.puzzle("anniversary").map_err(|e| e.to_string())?;
    if !model_matches(&file, inst) {
        return Err("model does not match the transcribed solution".into());
    }
    Ok("1 model with the 4 listed atoms".into())
}

fn check_listing(set: &FixtureSet) -> Result<String, String> {
    let v = solve_internal(set.encoding("anniversary_listing").map_err(|e| e.to_string())?, 10);
    let unsafe_diag = v.diagnostics().iter().any(|d| d.contains("unsafe"));
    if v.has_error() && unsafe_diag {
        Ok(v.diagnostics().join("; "))
    } else {
        Err(format!("expected an unsafe-variable error, got flags {:?} {:?}", v.flags(), v.diagnostics()))
    }
}

fn check_tattoo(set: &FixtureSet) -> Result<String, String> {
    let (model, rows) = oracle_solution(set, "tattoo").map_err(|e| e.to_string())?;
    let file = unique_model("tattoo.lp", set.encoding("tattoo").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if file != model {
        return Err("enumerator and bijection oracle disagree".into());
    }
    let stored = &set.puzzle("tattoo").map_err(|e| e.to_string())?.solution;
    if sorted_rows(stored) != sorted_rows(&rows) {
        return Err(format!("stored solution {stored:?} differs from oracle {rows:?}"));
    }
    Ok(format!("{rows:?}"))
}

fn check_puzzle(set: &FixtureSet, p: &PuzzleInstance, derived: &BTreeMap<String, Vec<Vec<String>>>) -> Result<String, String> {
    p.validate().map_err(|e| e.to_string())?;
    let expected = expected_model_count(p).map_err(|e| e.to_string())?;
    let blocks = set.reference_blocks(&p.id).map_err(|e| e.to_string())?;
    if blocks.len() != p.hints.len() + 1 {
        return Err(format!("{} blocks for {} hints", blocks.len(), p.hints.len()));
    }
    let base = solve_internal(&blocks[0], expected as usize);
    if !base.flagless() || base.model_count() as u64 != expected {
        return Err(format!("base has {} models, expected {expected}", base.model_count()));
    }
    let model = set.truth_model(p).map_err(|e| e.to_string())?;
    if !model_matches(&model, p) {
        return Err("reference model does not match the stored solution".into());
    }
    if let Some(rows) = derived.get(&p.id) {
        if sorted_rows(rows) != sorted_rows(&p.solution) {
            return Err(format!("stored solution differs from derived {rows:?}"));
        }
    }
    Ok(format!("base {expected} models, reference unique"))
}

fn check_crosscheck(name: &str, src: &str) -> Result<String, String> {
    let prog = match parse_program(src).map_err(|e| e.to_string()).and_then(|s| asploop_asp::ground(&s).map_err(|e| e.to_string())) {
        Ok(p) => p,
        Err(e) => return Ok(format!("rejected: {e}")),
    };
    let e = enumerate_models(&prog, 1_000_000).map_err(|e| e.to_string())?;
    if !e.exhausted {
        return Err(format!("{name}: enumeration not exhausted"));
    }
    let brute = asploop_asp::brute_force_models(&prog).map_err(|e| e.to_string())?;
    if brute != e.models {
        return Err(format!("enumerator found {}, brute force {}", e.models.len(), brute.len()));
    }
    Ok(format!("{} models", e.models.len()))
}

/// Re-derives every computed fixture value and compares it with what is
/// stored. Needs no network and no external solver.
pub fn verify_fixtures(set: &FixtureSet) -> VerifyReport {
    let mut r = VerifyReport::default();
    r.record("anniversary reference encoding", check_anniversary(set));
    r.record("anniversary consolidated listing", check_listing(set));
    r.record("tattoo bijection oracle", check_tattoo(set));
    let derived = derived_solutions(set);
    if let Err(e) = &derived {
        r.record("derived solutions", Err(e.to_string()));
    }
    let derived = derived.unwrap_or_default();
    for p in &set.puzzles {
        r.record(format!("puzzle {}", p.id), check_puzzle(set, p, &derived));
    }
    if set.crosscheck.len() < 20 {
        r.record("cross-check corpus size", Err(format!("{} programs, need 20", set.crosscheck.len())));
    }
    for (name, src) in &set.crosscheck {
        r.record(format!("cross-check {name}"), check_crosscheck(name, src));
    }
    for spec in scenarios::script_specs(set) {
        let res = set.scripted(&spec.file).map(|_| "parses".to_string()).map_err(|e| e.to_string());
        r.record(format!("script {}", spec.file), res);
    }
    r
}

/// Fills derived solutions into `puzzles.json` and re-records every script.
/// Returns the files written.
pub fn write_fixtures(root: &Path, seed: u64) -> Result<Vec<PathBuf>, FixtureError> {
    let mut set = FixtureSet::load(root)?;
    let derived = derived_solutions(&set)?;
    for p in &mut set.puzzles {
        if let Some(rows) = derived.get(&p.id) {
            p.solution = rows.clone();
        }
    }
    let puzzles_path = root.join("puzzles.json");
    let text = serde_json::to_string_pretty(&set.puzzles).expect("puzzles serialize") + "\n";
    write(&puzzles_path, &text)?;
    let mut written = vec![puzzles_path];
    let set = FixtureSet::load(root)?;
    let dir = root.join("scripts");
    std::fs::create_dir_all(&dir).map_err(|e| FixtureError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    for (file, jsonl) in scenarios::build_scripts(&set, &Gateway::internal(), seed)? {
        let path = dir.join(file);
        write(&path, &jsonl)?;
        written.push(path);
    }
    Ok(written)
}
