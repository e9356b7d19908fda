//! Greedy best-of-N search over hint steps, with regeneration and
//! backtracking when every candidate at a step scores negative.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::classification_cap;
use crate::generator::{GenError, Generator};
use crate::matching::{detect_target_predicate, predicted_tuples};
use crate::puzzle::{expected_model_count, PuzzleError, PuzzleInstance};
use crate::reward::{choice_rule_reward, is_negative, reward, RewardValue};
use crate::solver::{Gateway, SolverVerdict};
use crate::trajectory::{build_base_prompt, build_hint_prompt, combine, generate, CandidateEncoding, Exemplar, Step, Trajectory, TrajectoryError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub temperature: f64,
    pub backtrack_limit: usize,
    pub regen_multiplier: usize,
    pub regen_enabled: bool,
    /// Overrides the instance-derived cap.
    pub cap: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { n: 5, temperature: 1.0, backtrack_limit: 5, regen_multiplier: 2, regen_enabled: true, cap: None }
    }
}

impl SearchConfig {
    /// Plain sequential best-of-N: no regeneration, no backtracking.
    pub fn sequential(n: usize) -> Self {
        SearchConfig { n, backtrack_limit: 0, regen_enabled: false, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Generated {
        step: usize,
        hint_index: Option<usize>,
        rewards: Vec<f64>,
    },
    Regenerated {
        step: usize,
        rewards: Vec<f64>,
    },
    /// Only emitted when there is more than one candidate to rank.
    Ranked {
        step: usize,
        pool: usize,
        best: usize,
    },
    Selected {
        step: usize,
        index: usize,
        reward: f64,
    },
    Backtracked {
        from_step: usize,
        to_step: usize,
        index: usize,
        reward: f64,
    },
    /// All candidates negative and no recovery left.
    RecoveryExhausted {
        step: usize,
        reason: String,
    },
    Final {
        model_count: usize,
        flagless: bool,
        predicted: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub instance_id: String,
    pub final_program: String,
    pub final_verdict: SolverVerdict,
    pub predicted_solution: Option<Vec<Vec<String>>>,
    pub trace: Vec<TraceEvent>,
    pub total_output_tokens: u64,
    pub generator_calls: usize,
    /// Full candidate pools; not serialized.
    #[serde(skip)]
    pub trajectory: Trajectory,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("instance {id}: {source}")]
    Generator { id: String, source: GenError, trace: Vec<TraceEvent> },
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("config: {0}")]
    Config(String),
}

/// Index of the maximal reward; the lowest index wins ties.
pub fn argmax(rewards: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &r) in rewards.iter().enumerate() {
        if best.is_none_or(|b| r > rewards[b]) {
            best = Some(i);
        }
    }
    best
}

fn rewards_of(cands: &[CandidateEncoding]) -> Vec<f64> {
    cands.iter().map(|c| c.reward.map_or(f64::NEG_INFINITY, |r| r.value)).collect()
}

struct Search<'a> {
    instance: &'a PuzzleInstance,
    generator: &'a dyn Generator,
    gateway: &'a Gateway,
    config: &'a SearchConfig,
    cap: usize,
    expected: u64,
    trace: Vec<TraceEvent>,
    tokens: u64,
    calls: usize,
}

impl Search<'_> {
    fn sample(&mut self, prompt: &str, n: usize) -> Result<Vec<CandidateEncoding>, SearchError> {
        self.calls += 1;
        let out = generate(self.generator, prompt, n, self.config.temperature).map_err(|source| SearchError::Generator {
            id: self.instance.id.clone(),
            source,
            trace: self.trace.clone(),
        })?;
        self.tokens += out.iter().map(|c| c.token_count).sum::<u64>();
        Ok(out)
    }

    fn score(&self, trajectory: &Trajectory, base: bool, cands: &mut [CandidateEncoding]) {
        for c in cands {
            let (verdict, r): (SolverVerdict, RewardValue) = if base {
                let v = self.gateway.solve(&c.text, self.cap);
                let r = choice_rule_reward(&v, self.expected).expect("expected count is positive");
                (v, r)
            } else {
                let v = self.gateway.solve(&combine(trajectory, Some(c)), self.cap);
                let r = reward(&v);
                (v, r)
            };
            c.verdict = Some(verdict);
            c.reward = Some(r);
        }
    }

    /// Generates, scores and, if everything is negative, regenerates once.
    /// Returns the candidate pool for the step.
    fn expand(&mut self, trajectory: &Trajectory, prompt: &str, step: usize, hint_index: Option<usize>) -> Result<Vec<CandidateEncoding>, SearchError> {
        let mut pool = self.sample(prompt, self.config.n)?;
        self.score(trajectory, hint_index.is_none(), &mut pool);
        self.trace.push(TraceEvent::Generated { step, hint_index, rewards: rewards_of(&pool) });
        if self.config.regen_enabled && pool.iter().all(|c| c.reward.is_some_and(|r| is_negative(&r))) {
            let mut extra = self.sample(prompt, self.config.n * self.config.regen_multiplier)?;
            self.score(trajectory, hint_index.is_none(), &mut extra);
            self.trace.push(TraceEvent::Regenerated { step, rewards: rewards_of(&extra) });
            pool.extend(extra);
        }
        Ok(pool)
    }

    fn select(&mut self, step: usize, pool: &[CandidateEncoding]) -> usize {
        let rewards = rewards_of(pool);
        let best = argmax(&rewards).expect("pool is non-empty");
        if pool.len() > 1 {
            self.trace.push(TraceEvent::Ranked { step, pool: pool.len(), best });
        }
        self.trace.push(TraceEvent::Selected { step, index: best, reward: rewards[best] });
        best
    }
}

fn all_negative(pool: &[CandidateEncoding]) -> bool {
    pool.iter().all(|c| c.reward.is_none_or(|r| is_negative(&r)))
}

/// Best untried non-negative alternative in a step: highest reward, then
/// lowest index.
fn next_alternative(step: &Step, tried: &[usize]) -> Option<usize> {
    let rewards: Vec<f64> = step
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| match c.reward {
            Some(r) if !is_negative(&r) && !tried.contains(&i) => r.value,
            _ => f64::NEG_INFINITY,
        })
        .collect();
    argmax(&rewards).filter(|&i| rewards[i] > f64::NEG_INFINITY)
}

pub fn run_search(
    instance: &PuzzleInstance,
    generator: &dyn Generator,
    gateway: &Gateway,
    config: &SearchConfig,
    shots: &[Exemplar],
    preamble: &str,
) -> Result<SearchOutcome, SearchError> {
    if config.n == 0 || config.regen_multiplier == 0 {
        return Err(SearchError::Config("n and regen_multiplier must be at least 1".into()));
    }
    let cap = match config.cap {
        Some(c) => c,
        None => classification_cap(instance)?,
    };
    let mut s = Search { instance, generator, gateway, config, cap, expected: expected_model_count(instance)?, trace: Vec::new(), tokens: 0, calls: 0 };

    let mut traj = Trajectory::new(instance.id.clone());
    let base_prompt = build_base_prompt(instance, shots, preamble)?;
    let pool = s.expand(&traj, &base_prompt, 0, None)?;
    let best = s.select(0, &pool);
    traj.steps.push(Step { input_text: base_prompt, hint_index: None, candidates: pool, selected_index: Some(best) });
    // Candidate indices already selected at each step, parallel to traj.steps.
    let mut tried: Vec<Vec<usize>> = vec![vec![best]];

    let mut backtracks = 0;
    let mut h = 0;
    while h < instance.hints.len() {
        let step = traj.steps.len();
        let prompt = build_hint_prompt(&traj, &instance.hints[h])?;
        let pool = s.expand(&traj, &prompt, step, Some(h))?;
        if all_negative(&pool) {
            let target = (1..traj.steps.len()).filter_map(|j| next_alternative(&traj.steps[j], &tried[j]).map(|_| j)).max_by(|&a, &b| {
                let ra = traj.steps[a].selected().and_then(|c| c.reward).map_or(f64::NEG_INFINITY, |r| r.value);
                let rb = traj.steps[b].selected().and_then(|c| c.reward).map_or(f64::NEG_INFINITY, |r| r.value);
                ra.total_cmp(&rb).then(a.cmp(&b))
            });
            if backtracks < config.backtrack_limit {
                if let Some(j) = target {
                    let alt = next_alternative(&traj.steps[j], &tried[j]).expect("target has an alternative");
                    backtracks += 1;
                    traj.steps.truncate(j + 1);
                    tried.truncate(j + 1);
                    traj.steps[j].selected_index = Some(alt);
                    tried[j].push(alt);
                    let reward = traj.steps[j].candidates[alt].reward.map_or(f64::NEG_INFINITY, |r| r.value);
                    s.trace.push(TraceEvent::Backtracked { from_step: step, to_step: j, index: alt, reward });
                    h = traj.steps[j].hint_index.expect("hint step") + 1;
                    continue;
                }
                s.trace.push(TraceEvent::RecoveryExhausted { step, reason: "no earlier step has an untried non-negative alternative".into() });
            } else if config.backtrack_limit > 0 || config.regen_enabled {
                s.trace.push(TraceEvent::RecoveryExhausted { step, reason: "backtrack limit reached".into() });
            }
        }
        let best = s.select(step, &pool);
        traj.steps.push(Step { input_text: instance.hints[h].clone(), hint_index: Some(h), candidates: pool, selected_index: Some(best) });
        tried.push(vec![best]);
        h += 1;
    }

    let final_program = combine(&traj, None);
    let final_verdict = gateway.solve(&final_program, cap);
    let predicted_solution = if final_verdict.flagless() && final_verdict.model_count() >= 1 {
        let model = &final_verdict.models()[0];
        detect_target_predicate(model, instance).map(|p| predicted_tuples(model, instance, &p))
    } else {
        None
    };
    s.trace.push(TraceEvent::Final { model_count: final_verdict.model_count(), flagless: final_verdict.flagless(), predicted: predicted_solution.is_some() });
    Ok(SearchOutcome {
        instance_id: instance.id.clone(),
        final_program,
        final_verdict,
        predicted_solution,
        trace: s.trace,
        total_output_tokens: s.tokens,
        generator_calls: s.calls,
        trajectory: traj,
    })
}
