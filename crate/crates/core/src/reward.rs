//! Solver-grounded reward: 1/M minus one for each of error, UNSAT and
//! cap exceeded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solver::SolverVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardValue {
    pub value: f64,
    pub recip_term: f64,
    pub e_flag: bool,
    pub u_flag: bool,
    pub ne_flag: bool,
}

impl RewardValue {
    fn new(recip_term: f64, v: &SolverVerdict) -> Self {
        let (e, u, ne) = v.flags();
        let value = recip_term - f64::from(u8::from(e)) - f64::from(u8::from(u)) - f64::from(u8::from(ne));
        RewardValue { value, recip_term, e_flag: e, u_flag: u, ne_flag: ne }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("expected model count must be at least 1")]
pub struct InvalidExpected;

/// The reciprocal term is 0 whenever a flag is set or no model exists.
pub fn reward(verdict: &SolverVerdict) -> RewardValue {
    let m = verdict.model_count();
    let recip = if verdict.flagless() && m >= 1 { 1.0 / m as f64 } else { 0.0 };
    RewardValue::new(recip, verdict)
}

/// Strict variant for the base encoding: the reciprocal term becomes 1 when
/// the exhausted model count equals `expected`, else 0.
pub fn choice_rule_reward(verdict: &SolverVerdict, expected: u64) -> Result<RewardValue, InvalidExpected> {
    if expected < 1 {
        return Err(InvalidExpected);
    }
    let hit = verdict.flagless() && verdict.model_count() as u64 == expected;
    Ok(RewardValue::new(if hit { 1.0 } else { 0.0 }, verdict))
}

pub fn is_negative(r: &RewardValue) -> bool {
    r.value < 0.0
}
