//! Exact-match accuracy with failure buckets and per-size/difficulty splits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::model_matches;
use crate::puzzle::PuzzleInstance;
use crate::search::SearchOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Correct,
    Error,
    Unsat,
    MultipleModels,
    WrongUniqueModel,
    CapExceeded,
}

impl Outcome {
    pub const FAILURES: [Outcome; 5] = [Outcome::Error, Outcome::Unsat, Outcome::MultipleModels, Outcome::WrongUniqueModel, Outcome::CapExceeded];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::Error => "error",
            Outcome::Unsat => "unsat",
            Outcome::MultipleModels => "multiple-models",
            Outcome::WrongUniqueModel => "wrong-unique-model",
            Outcome::CapExceeded => "cap-exceeded",
        }
    }
}

/// Errors take precedence over cap overflow, which takes precedence over UNSAT.
pub fn classify_outcome(outcome: &SearchOutcome, instance: &PuzzleInstance) -> Outcome {
    let v = &outcome.final_verdict;
    if v.has_error() {
        Outcome::Error
    } else if v.cap_exceeded() {
        Outcome::CapExceeded
    } else if v.is_unsat() {
        Outcome::Unsat
    } else if v.model_count() > 1 {
        Outcome::MultipleModels
    } else if model_matches(&v.models()[0], instance) {
        Outcome::Correct
    } else {
        Outcome::WrongUniqueModel
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub instance_id: String,
    pub size: String,
    pub difficulty: String,
    pub output_tokens: u64,
    pub generator_calls: usize,
    pub model_count: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Split {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Failure counts; every bucket is present, zeros included.
    pub buckets: BTreeMap<String, usize>,
    pub by_size: BTreeMap<String, Split>,
    pub by_difficulty: BTreeMap<String, Split>,
    pub mean_output_tokens: f64,
    pub rows: Vec<InstanceRow>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{outcomes} outcomes for {instances} instances")]
    LengthMismatch { outcomes: usize, instances: usize },
    #[error("outcome {index} is for {got}, expected {want}")]
    Misaligned { index: usize, got: String, want: String },
}

pub fn evaluate_accuracy(outcomes: &[SearchOutcome], instances: &[PuzzleInstance]) -> Result<MetricsReport, MetricsError> {
    if outcomes.len() != instances.len() {
        return Err(MetricsError::LengthMismatch { outcomes: outcomes.len(), instances: instances.len() });
    }
    let mut buckets: BTreeMap<String, usize> = Outcome::FAILURES.iter().map(|o| (o.as_str().to_string(), 0)).collect();
    let mut by_size: BTreeMap<String, Split> = BTreeMap::new();
    let mut by_difficulty: BTreeMap<String, Split> = BTreeMap::new();
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut correct = 0;
    for (index, (o, inst)) in outcomes.iter().zip(instances).enumerate() {
        if o.instance_id != inst.id {
            return Err(MetricsError::Misaligned { index, got: o.instance_id.clone(), want: inst.id.clone() });
        }
        let outcome = classify_outcome(o, inst);
        let ok = outcome == Outcome::Correct;
        if ok {
            correct += 1;
        } else {
            *buckets.get_mut(outcome.as_str()).expect("all failures are bucketed") += 1;
        }
        let meta = inst.meta.as_ref();
        let size = meta.and_then(|m| m.size.clone()).unwrap_or_else(|| inst.size_label());
        by_size.entry(size.clone()).or_default().add(ok);
        let difficulty = meta.and_then(|m| m.difficulty.clone()).unwrap_or_default();
        if !difficulty.is_empty() {
            by_difficulty.entry(difficulty.clone()).or_default().add(ok);
        }
        rows.push(InstanceRow {
            instance_id: inst.id.clone(),
            size,
            difficulty,
            output_tokens: o.total_output_tokens,
            generator_calls: o.generator_calls,
            model_count: o.final_verdict.model_count(),
            outcome,
        });
    }
    let total = outcomes.len();
    let ratio = |a: f64| if total == 0 { 0.0 } else { a / total as f64 };
    Ok(MetricsReport {
        total,
        correct,
        accuracy: ratio(correct as f64),
        buckets,
        by_size,
        by_difficulty,
        mean_output_tokens: ratio(rows.iter().map(|r| r.output_tokens as f64).sum()),
        rows,
    })
}

/// Per-instance rows as CSV with a header line.
pub fn rows_to_csv(rows: &[InstanceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance_id", "size", "difficulty", "output_tokens", "generator_calls", "model_count", "outcome"]).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.instance_id.as_str(),
            &r.size,
            &r.difficulty,
            &r.output_tokens.to_string(),
            &r.generator_calls.to_string(),
            &r.model_count.to_string(),
            r.outcome.as_str(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Failure bucket counts as CSV, one line per bucket.
pub fn buckets_to_csv(report: &MetricsReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bucket", "count"]).expect("in-memory write");
    for o in Outcome::FAILURES {
        w.write_record([o.as_str(), &report.buckets[o.as_str()].to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puzzle::EntityCategory;
    use crate::solver::SolverVerdict;
    use crate::trajectory::Trajectory;
    use asploop_asp::parse_ground_atoms;
    use asploop_asp::AnswerSet;

    fn inst(id: &str) -> PuzzleInstance {
        let cat = |name: &str, m: &[&str]| EntityCategory { name: name.into(), members: m.iter().map(|s| s.to_string()).collect() };
        PuzzleInstance {
            id: id.into(),
            description: "d".into(),
            categories: vec![cat("a", &["1", "2"]), cat("b", &["x", "y"])],
            hints: vec![],
            solution: vec![vec!["1".into(), "x".into()], vec!["2".into(), "y".into()]],
            meta: None,
        }
    }

    fn model(text: &str) -> AnswerSet {
        AnswerSet::new(parse_ground_atoms(text).unwrap())
    }

    fn outcome(id: &str, v: SolverVerdict) -> SearchOutcome {
        SearchOutcome {
            instance_id: id.into(),
            final_program: String::new(),
            final_verdict: v,
            predicted_solution: None,
            trace: vec![],
            total_output_tokens: 10,
            generator_calls: 1,
            trajectory: Trajectory::default(),
        }
    }

    #[test]
    fn seven_of_ten() {
        let good = || SolverVerdict::from_models(vec![model("s(1,x) s(2,y)")], 100, vec![]);
        let wrong = || SolverVerdict::from_models(vec![model("s(1,y) s(2,x)")], 100, vec![]);
        let ids: Vec<String> = (0..10).map(|i| format!("p{i}")).collect();
        let instances: Vec<_> = ids.iter().map(|i| inst(i)).collect();
        let outcomes: Vec<_> = ids.iter().enumerate().map(|(k, i)| outcome(i, if k < 7 { good() } else { wrong() })).collect();
        let r = evaluate_accuracy(&outcomes, &instances).unwrap();
        assert_eq!(r.accuracy, 0.7);
        assert_eq!(r.buckets["wrong-unique-model"], 3);
        assert_eq!(r.by_size["2x2"].total, 10);
        assert_eq!(r.mean_output_tokens, 10.0);
    }

    #[test]
    fn buckets() {
        let two = SolverVerdict::from_models(vec![model("s(1,x) s(2,y)"), model("s(1,y) s(2,x)")], 100, vec![]);
        let cases = [
            (two, Outcome::MultipleModels),
            (SolverVerdict::error(vec!["e".into()]), Outcome::Error),
            (SolverVerdict::from_models(vec![], 100, vec![]), Outcome::Unsat),
            (SolverVerdict::from_models(vec![model("a"), model("b")], 1, vec![]), Outcome::CapExceeded),
        ];
        for (v, want) in cases {
            assert_eq!(classify_outcome(&outcome("p", v), &inst("p")), want);
        }
    }

    #[test]
    fn mismatch_and_csv() {
        assert_eq!(evaluate_accuracy(&[], &[inst("p")]), Err(MetricsError::LengthMismatch { outcomes: 0, instances: 1 }));
        let r = evaluate_accuracy(&[outcome("p", SolverVerdict::error(vec![]))], &[inst("p")]).unwrap();
        let csv = buckets_to_csv(&r);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.contains("error,1"));
        assert!(rows_to_csv(&r.rows).lines().nth(1).unwrap().ends_with(",error"));
    }
}
