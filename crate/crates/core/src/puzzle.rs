//! Grid puzzle instances and dataset loading.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::normalize_surface;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCategory {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
}

/// One grid puzzle. Solution tuples list one member per category, in
/// category order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleInstance {
    pub id: String,
    pub description: String,
    pub categories: Vec<EntityCategory>,
    pub hints: Vec<String>,
    pub solution: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<PuzzleMeta>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PuzzleError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: record {index}: {message}")]
    Schema { path: String, index: usize, message: String },
    #[error("puzzle {id}: {reason}")]
    Invalid { id: String, reason: String },
    #[error("({n}!)^({m}-1) overflows a 64-bit integer")]
    Overflow { m: usize, n: usize },
}

impl PuzzleInstance {
    /// Number of categories.
    pub fn m(&self) -> usize {
        self.categories.len()
    }

    /// Members per category.
    pub fn n(&self) -> usize {
        self.categories.first().map_or(0, |c| c.members.len())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m(), self.n())
    }

    pub fn size_label(&self) -> String {
        self.meta.as_ref().and_then(|m| m.size.clone()).unwrap_or_else(|| format!("{}x{}", self.m(), self.n()))
    }

    pub fn validate(&self) -> Result<(), PuzzleError> {
        let invalid = |reason: String| Err(PuzzleError::Invalid { id: self.id.clone(), reason });
        let (m, n) = self.dims();
        if m < 2 {
            return invalid(format!("needs at least 2 categories, found {m}"));
        }
        if n < 2 {
            return invalid(format!("categories need at least 2 members, found {n}"));
        }
        for c in &self.categories {
            if c.members.len() != n {
                return invalid(format!("category {} has {} members, expected {n}", c.name, c.members.len()));
            }
            let mut seen = HashSet::new();
            for member in &c.members {
                if !seen.insert(normalize_surface(member)) {
                    return invalid(format!("category {} repeats member {member}", c.name));
                }
            }
        }
        if self.hints.is_empty() {
            return invalid("no hints".into());
        }
        if self.solution.len() != n {
            return invalid(format!("solution has {} tuples, expected {n}", self.solution.len()));
        }
        for (c, cat) in self.categories.iter().enumerate() {
            let mut used = HashSet::new();
            for row in &self.solution {
                if row.len() != m {
                    return invalid(format!("solution tuple {row:?} has {} items, expected {m}", row.len()));
                }
                if !cat.members.contains(&row[c]) {
                    return invalid(format!("{} is not a member of {}", row[c], cat.name));
                }
                if !used.insert(&row[c]) {
                    return invalid(format!("{} appears in more than one solution tuple", row[c]));
                }
            }
        }
        Ok(())
    }
}

/// (n!)^(m-1): the number of assignments of an unconstrained m x n grid.
pub fn expected_count(m: usize, n: usize) -> Result<u64, PuzzleError> {
    let overflow = || PuzzleError::Overflow { m, n };
    let mut fact: u64 = 1;
    for k in 2..=n as u64 {
        fact = fact.checked_mul(k).ok_or_else(overflow)?;
    }
    let exp = u32::try_from(m.saturating_sub(1)).map_err(|_| overflow())?;
    fact.checked_pow(exp).ok_or_else(overflow)
}

pub fn expected_model_count(instance: &PuzzleInstance) -> Result<u64, PuzzleError> {
    expected_count(instance.m(), instance.n())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// A JSON array of instances.
    Json,
    /// One instance per line.
    Jsonl,
    /// JSON array if the first non-blank character is `[`, otherwise JSONL.
    Auto,
}

/// Instances that passed validation, plus the ones that did not.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub instances: Vec<PuzzleInstance>,
    pub rejected: Vec<(usize, PuzzleError)>,
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset, PuzzleError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| PuzzleError::Io { path: shown.clone(), message: e.to_string() })?;
    parse_dataset(&text, &shown, format)
}

pub fn parse_dataset(text: &str, path: &str, format: DatasetFormat) -> Result<Dataset, PuzzleError> {
    let format = match format {
        DatasetFormat::Auto if text.trim_start().starts_with('[') => DatasetFormat::Json,
        DatasetFormat::Auto => DatasetFormat::Jsonl,
        f => f,
    };
    let schema = |index: usize, e: serde_json::Error| PuzzleError::Schema { path: path.to_string(), index, message: e.to_string() };
    let raw: Vec<PuzzleInstance> = match format {
        DatasetFormat::Json => {
            let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| schema(0, e))?;
            values.into_iter().enumerate().map(|(i, v)| serde_json::from_value(v).map_err(|e| schema(i, e))).collect::<Result<_, _>>()?
        }
        _ => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| schema(i, e)))
            .collect::<Result<_, _>>()?,
    };
    let mut out = Dataset::default();
    for (i, inst) in raw.into_iter().enumerate() {
        match inst.validate() {
            Ok(()) => out.instances.push(inst),
            Err(e) => out.rejected.push((i, e)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grid(m: usize, n: usize) -> PuzzleInstance {
        let categories: Vec<EntityCategory> =
            (0..m).map(|c| EntityCategory { name: format!("c{c}"), members: (0..n).map(|k| format!("m{c}_{k}")).collect() }).collect();
        PuzzleInstance {
            id: format!("g{m}x{n}"),
            description: "test".into(),
            solution: (0..n).map(|k| categories.iter().map(|c| c.members[k].clone()).collect()).collect(),
            categories,
            hints: vec!["h".into()],
            meta: None,
        }
    }

    #[test]
    fn counts() {
        assert_eq!(expected_count(3, 4), Ok(576));
        assert_eq!(expected_count(4, 4), Ok(13824));
        assert_eq!(expected_count(2, 1), Ok(1));
        assert!(matches!(expected_count(4, 21), Err(PuzzleError::Overflow { .. })));
        for m in 2..5 {
            for n in 2..6 {
                let here = expected_count(m, n).unwrap();
                assert!(expected_count(m + 1, n).unwrap() > here);
                assert!(expected_count(m, n + 1).unwrap() > here);
            }
        }
    }

    #[test]
    fn dims_and_validation() {
        assert_eq!(grid(3, 4).dims(), (3, 4));
        assert_eq!(grid(4, 4).dims(), (4, 4));
        assert!(grid(3, 4).validate().is_ok());
        let mut bad = grid(3, 4);
        bad.solution[1][2] = bad.solution[0][2].clone();
        assert!(matches!(bad.validate(), Err(PuzzleError::Invalid { .. })));
        let mut bad = grid(3, 4);
        bad.hints.clear();
        assert!(bad.validate().is_err());
        let mut bad = grid(3, 4);
        bad.categories[0].members[1] = "M0-0".into();
        bad.categories[0].members[0] = "m0 0".into();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn loading_rejects_per_instance_and_per_file() {
        let good = serde_json::to_string(&grid(3, 4)).unwrap();
        let mut broken = grid(3, 4);
        broken.solution.pop();
        let broken = serde_json::to_string(&broken).unwrap();
        let ds = parse_dataset(&format!("[{good},{broken}]"), "x.json", DatasetFormat::Auto).unwrap();
        assert_eq!(ds.instances.len(), 1);
        assert_eq!(ds.rejected[0].0, 1);
        let ds = parse_dataset(&format!("{good}\n\n{good}\n"), "x.jsonl", DatasetFormat::Auto).unwrap();
        assert_eq!(ds.instances.len(), 2);
        let err = parse_dataset(&format!("[{good}, {{\"id\": 3}}]"), "x.json", DatasetFormat::Json).unwrap_err();
        assert!(matches!(err, PuzzleError::Schema { index: 1, .. }), "{err}");
    }

    #[test]
    fn serde_round_trip() {
        let mut p = grid(4, 4);
        p.meta = Some(PuzzleMeta { size: Some("4x4".into()), difficulty: Some("hard".into()) });
        let text = serde_json::to_string(&vec![p.clone()]).unwrap();
        let back = parse_dataset(&text, "x", DatasetFormat::Json).unwrap();
        assert_eq!(back.instances, vec![p]);
    }
}
