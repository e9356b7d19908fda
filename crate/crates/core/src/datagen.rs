//! Depth-first training-data generation: sample candidates per step, label
//! them with the solver, branch on chosen ones and pair chosen with rejected.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{GenError, Generator};
use crate::matching::any_model_matches;
use crate::puzzle::{expected_model_count, PuzzleError, PuzzleInstance};
use crate::solver::{Gateway, SolverVerdict, DEFAULT_CAP};
use crate::trajectory::{build_base_prompt, build_hint_prompt, combine, generate, CandidateEncoding, Exemplar, Label, Trajectory, TrajectoryError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatagenConfig {
    pub n_samples: usize,
    pub temperature: f64,
    pub max_chosen_branch: usize,
    /// Overrides the instance-derived cap.
    pub cap: Option<usize>,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        DatagenConfig { n_samples: 5, temperature: 0.8, max_chosen_branch: 2, cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub instance_id: String,
    pub step: usize,
    pub branch: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub prompt: String,
    pub completion: String,
    pub meta: RecordMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceRecord {
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub meta: RecordMeta,
}

/// Label counts for one step visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounts {
    pub step: usize,
    pub branch: String,
    pub chosen: usize,
    pub rejected: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatagenStats {
    pub steps: Vec<StepCounts>,
    pub mean_chosen: f64,
    pub std_chosen: f64,
    pub mean_rejected: f64,
    pub std_rejected: f64,
    /// (branch, hint index) for every hint dropped because all samples failed.
    pub dropped_hints: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatagenOutput {
    pub sft: Vec<SftRecord>,
    pub pref: Vec<PreferenceRecord>,
    pub stats: DatagenStats,
}

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("instance {id}: {source}")]
    Generator { id: String, source: GenError },
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("config: {0}")]
    Config(String),
}

/// Four times the expected count, bounded by the gateway default.
pub fn classification_cap(instance: &PuzzleInstance) -> Result<usize, PuzzleError> {
    let expected = expected_model_count(instance)?;
    Ok(expected.saturating_mul(4).min(DEFAULT_CAP as u64) as usize)
}

/// Labels a hint-step candidate: chosen iff the partial program is flagless
/// and some model still matches the ground truth.
pub fn classify(gateway: &Gateway, candidate: &CandidateEncoding, trajectory: &Trajectory, instance: &PuzzleInstance, cap: usize) -> (Label, SolverVerdict) {
    let verdict = gateway.solve(&combine(trajectory, Some(candidate)), cap);
    let ok = verdict.flagless() && any_model_matches(verdict.models(), instance);
    (if ok { Label::Chosen } else { Label::Rejected }, verdict)
}

/// Labels a base-step candidate: chosen iff flagless with exactly the
/// expected number of models.
pub fn classify_base(gateway: &Gateway, candidate: &CandidateEncoding, instance: &PuzzleInstance, cap: usize) -> Result<(Label, SolverVerdict), PuzzleError> {
    let expected = expected_model_count(instance)?;
    let verdict = gateway.solve(&candidate.text, cap);
    let ok = verdict.flagless() && verdict.model_count() as u64 == expected;
    Ok((if ok { Label::Chosen } else { Label::Rejected }, verdict))
}

struct Run<'a> {
    instance: &'a PuzzleInstance,
    generator: &'a dyn Generator,
    gateway: &'a Gateway,
    config: &'a DatagenConfig,
    cap: usize,
    out: DatagenOutput,
}

impl Run<'_> {
    fn sample(&self, prompt: &str) -> Result<Vec<CandidateEncoding>, DatagenError> {
        generate(self.generator, prompt, self.config.n_samples, self.config.temperature)
            .map_err(|source| DatagenError::Generator { id: self.instance.id.clone(), source })
    }

    /// Emits records for one labeled step and returns the candidates to branch on.
    fn record(&mut self, prompt: &str, step: usize, branch: &str, candidates: &[CandidateEncoding]) -> Vec<usize> {
        let meta = RecordMeta { instance_id: self.instance.id.clone(), step, branch: branch.to_string() };
        let chosen: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].label == Some(Label::Chosen)).collect();
        let rejected: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].label == Some(Label::Rejected)).collect();
        for &i in &chosen {
            self.out.sft.push(SftRecord { prompt: prompt.to_string(), completion: candidates[i].text.clone(), meta: meta.clone() });
        }
        let kept: Vec<usize> = chosen.iter().copied().take(self.config.max_chosen_branch).collect();
        let mut pairs = 0;
        if !rejected.is_empty() {
            for &c in &kept {
                for &r in &rejected {
                    self.out.pref.push(PreferenceRecord {
                        prompt: prompt.to_string(),
                        chosen: candidates[c].text.clone(),
                        rejected: candidates[r].text.clone(),
                        meta: meta.clone(),
                    });
                    pairs += 1;
                }
            }
        }
        self.out.stats.steps.push(StepCounts { step, branch: branch.to_string(), chosen: chosen.len(), rejected: rejected.len(), pairs });
        kept
    }

    fn dfs(&mut self, trajectory: Trajectory, next_hint: usize, branch: String) -> Result<(), DatagenError> {
        let Some(hint) = self.instance.hints.get(next_hint) else {
            return Ok(());
        };
        let prompt = build_hint_prompt(&trajectory, hint)?;
        let mut candidates = self.sample(&prompt)?;
        for c in &mut candidates {
            let (label, verdict) = classify(self.gateway, c, &trajectory, self.instance, self.cap);
            c.label = Some(label);
            c.verdict = Some(verdict);
        }
        let kept = self.record(&prompt, next_hint + 1, &branch, &candidates);
        if kept.is_empty() {
            log::debug!("{}: dropping hint {next_hint} on branch {branch}", self.instance.id);
            self.out.stats.dropped_hints.push((branch.clone(), next_hint));
            let mut t = trajectory;
            t.dropped_hints.push(next_hint);
            return self.dfs(t, next_hint + 1, branch);
        }
        for i in kept {
            let mut t = trajectory.clone();
            t.push_selected(hint.clone(), Some(next_hint), candidates[i].clone());
            self.dfs(t, next_hint + 1, format!("{branch}.{i}"))?;
        }
        Ok(())
    }
}

/// Runs the DFS for one instance. A generator failure discards everything
/// produced for the instance.
pub fn run_dfs(
    instance: &PuzzleInstance,
    generator: &dyn Generator,
    gateway: &Gateway,
    config: &DatagenConfig,
    shots: &[Exemplar],
    preamble: &str,
) -> Result<DatagenOutput, DatagenError> {
    if config.n_samples == 0 || config.max_chosen_branch == 0 {
        return Err(DatagenError::Config("n_samples and max_chosen_branch must be at least 1".into()));
    }
    let cap = match config.cap {
        Some(c) => c,
        None => classification_cap(instance)?,
    };
    let mut run = Run { instance, generator, gateway, config, cap, out: DatagenOutput::default() };
    let base_prompt = build_base_prompt(instance, shots, preamble)?;
    let mut base = run.sample(&base_prompt)?;
    for c in &mut base {
        let (label, verdict) = classify_base(gateway, c, instance, cap)?;
        c.label = Some(label);
        c.verdict = Some(verdict);
    }
    for i in run.record(&base_prompt, 0, "", &base) {
        let mut t = Trajectory::new(instance.id.clone());
        t.push_selected(base_prompt.clone(), None, base[i].clone());
        run.dfs(t, 0, i.to_string())?;
    }
    let mut out = run.out;
    let (mc, sc) = mean_std(out.stats.steps.iter().map(|s| s.chosen as f64));
    let (mr, sr) = mean_std(out.stats.steps.iter().map(|s| s.rejected as f64));
    out.stats.mean_chosen = mc;
    out.stats.std_chosen = sc;
    out.stats.mean_rejected = mr;
    out.stats.std_rejected = sr;
    Ok(out)
}

/// Population mean and standard deviation; zeros for an empty input.
fn mean_std(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.collect();
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Writes one JSON object per line. The file appears atomically; on failure
/// nothing is left behind.
pub fn export_jsonl<T: Serialize>(records: &[T], path: &Path) -> std::io::Result<usize> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(records.len())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> std::io::Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(std::io::Error::other)).collect()
}
