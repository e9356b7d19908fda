//! Prompts, trajectory state and partial-encoding assembly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{GenError, Generator};
use crate::puzzle::PuzzleInstance;
use crate::reward::RewardValue;
use crate::solver::SolverVerdict;

/// The instruction preamble shipped with the crate.
pub const DEFAULT_PREAMBLE: &str = include_str!("../templates/preamble.txt");

pub const MAX_SHOTS: usize = 2;

/// Section markers used in prompts.
pub const ENCODING_HEADER: &str = "### Encoding\n";
pub const HINT_HEADER: &str = "### Hint\n";
pub const TASK_HEADER: &str = "### Task\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Chosen,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEncoding {
    pub text: String,
    pub token_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<SolverVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward: Option<RewardValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl CandidateEncoding {
    pub fn new(text: impl Into<String>, token_count: u64) -> Self {
        CandidateEncoding { text: text.into(), token_count, verdict: None, reward: None, label: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// The base prompt at step 0, the hint text afterwards.
    pub input_text: String,
    /// Index into the puzzle's hints; `None` for the base step.
    pub hint_index: Option<usize>,
    pub candidates: Vec<CandidateEncoding>,
    pub selected_index: Option<usize>,
}

impl Step {
    pub fn selected(&self) -> Option<&CandidateEncoding> {
        self.selected_index.and_then(|i| self.candidates.get(i))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub instance_ref: String,
    pub steps: Vec<Step>,
    pub dropped_hints: Vec<usize>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TrajectoryError {
    #[error("at most {MAX_SHOTS} exemplars are supported, got {0}")]
    TooManyShots(usize),
    #[error("trajectory has no steps")]
    Empty,
    #[error("step {0} has no selected encoding")]
    Unselected(usize),
}

pub fn build_base_prompt(instance: &PuzzleInstance, shots: &[Exemplar], preamble: &str) -> Result<String, TrajectoryError> {
    if shots.len() > MAX_SHOTS {
        return Err(TrajectoryError::TooManyShots(shots.len()));
    }
    let mut p = String::new();
    p.push_str(preamble.trim_end());
    p.push_str("\n\n");
    for (i, shot) in shots.iter().enumerate() {
        p.push_str(&format!("### Example {}\n{}\n{ENCODING_HEADER}{}\n\n", i + 1, shot.input.trim_end(), shot.output.trim_end()));
    }
    p.push_str("### Problem\n");
    p.push_str(instance.description.trim());
    p.push_str("\n\n### Entities\n");
    for c in &instance.categories {
        p.push_str(&format!("{}: {}\n", c.name, c.members.join(", ")));
    }
    p.push('\n');
    p.push_str(TASK_HEADER);
    p.push_str("Write the facts for all entities and the choice rule that generates every possible assignment.\n");
    Ok(p)
}

impl Trajectory {
    pub fn new(instance_ref: impl Into<String>) -> Self {
        Trajectory { instance_ref: instance_ref.into(), ..Default::default() }
    }

    fn selected_blocks(&self) -> Result<Vec<&str>, TrajectoryError> {
        self.steps.iter().enumerate().map(|(i, s)| s.selected().map(|c| c.text.as_str()).ok_or(TrajectoryError::Unselected(i))).collect()
    }

    /// Appends a step whose selection is `chosen`.
    pub fn push_selected(&mut self, input_text: String, hint_index: Option<usize>, chosen: CandidateEncoding) {
        self.steps.push(Step { input_text, hint_index, candidates: vec![chosen], selected_index: Some(0) });
    }
}

/// The whole history followed by the new hint.
pub fn build_hint_prompt(trajectory: &Trajectory, hint: &str) -> Result<String, TrajectoryError> {
    if trajectory.steps.is_empty() {
        return Err(TrajectoryError::Empty);
    }
    let blocks = trajectory.selected_blocks()?;
    let mut p = String::new();
    for (step, block) in trajectory.steps.iter().zip(blocks) {
        if step.hint_index.is_some() {
            p.push_str(HINT_HEADER);
        }
        p.push_str(step.input_text.trim_end());
        p.push('\n');
        p.push_str(ENCODING_HEADER);
        p.push_str(block.trim_end());
        p.push_str("\n\n");
    }
    p.push_str(HINT_HEADER);
    p.push_str(hint.trim());
    p.push_str("\n\n");
    p.push_str(TASK_HEADER);
    p.push_str("Translate this hint into ASP statements that extend the encoding above.\n");
    Ok(p)
}

/// Selected blocks in step order, plus `extra`, joined by newlines. Steps
/// without a selection are skipped.
pub fn combine(trajectory: &Trajectory, extra: Option<&CandidateEncoding>) -> String {
    let mut blocks: Vec<&str> = trajectory.steps.iter().filter_map(|s| s.selected()).map(|c| c.text.as_str()).collect();
    if let Some(c) = extra {
        blocks.push(&c.text);
    }
    blocks.join("\n")
}

/// Pulls ASP code out of a completion: the first fenced block, else the lines
/// that parse as statements, else the text unchanged.
pub fn extract_code(raw: &str) -> String {
    if let Some(start) = raw.find("```") {
        let after = &raw[start + 3..];
        let body = match after.find('\n') {
            Some(nl) => &after[nl + 1..],
            None => "",
        };
        let end = body.find("```").unwrap_or(body.len());
        return body[..end].trim_end().to_string();
    }
    if matches!(asploop_asp::parse_program(raw), Ok(s) if !s.is_empty()) {
        return raw.to_string();
    }
    let lines: Vec<&str> = raw.lines().filter(|l| matches!(asploop_asp::parse_program(l), Ok(s) if !s.is_empty())).collect();
    if lines.is_empty() {
        raw.to_string()
    } else {
        lines.join("\n")
    }
}

pub const MAX_ATTEMPTS: usize = 3;

/// Asks `generator` for exactly `n` completions, retrying transport failures.
pub fn generate(generator: &dyn Generator, prompt: &str, n: usize, temperature: f64) -> Result<Vec<CandidateEncoding>, GenError> {
    if n == 0 {
        return Err(GenError::Argument("n must be at least 1".into()));
    }
    let mut attempt = 0;
    let completions = loop {
        attempt += 1;
        match generator.complete(prompt, n, temperature) {
            Ok(c) => break c,
            Err(GenError::Transport(msg)) if attempt < MAX_ATTEMPTS => {
                log::warn!("{}: attempt {attempt} failed: {msg}", generator.id());
            }
            Err(e) => return Err(e),
        }
    };
    if completions.len() < n {
        return Err(GenError::Short { backend: generator.id(), got: completions.len(), wanted: n });
    }
    Ok(completions.into_iter().take(n).map(|c| CandidateEncoding::new(extract_code(&c.text), c.output_tokens)).collect())
}
