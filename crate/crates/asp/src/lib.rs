//! A small answer set programming toolkit: parser, grounder and stable-model
//! enumerator for the fragment used by logic-puzzle encodings (facts, pooled
//! arguments, rules with default negation, constraints, choice rules,
//! cardinality heads over comparisons and `+`/`-` arithmetic).

pub mod ast;
pub mod enumerate;
pub mod error;
pub mod ground;
mod lexer;
pub mod oracle;
pub mod parser;
pub mod value;

pub use ast::{print_program, Statement, StatementKind};
pub use enumerate::{enumerate_models, Enumeration};
pub use error::{AspError, GroundError, ParseError, SolveError};
pub use ground::{ground, GroundProgram};
pub use oracle::{brute_force_models, check_model, is_stable_model};
pub use parser::{parse_ground_atoms, parse_program};
pub use value::{AnswerSet, Atom, Value};

/// Result of solving a source program in-process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solved {
    pub models: Vec<AnswerSet>,
    pub exhausted: bool,
    pub warnings: Vec<String>,
}

/// Parses, grounds and enumerates up to `cap + 1` models of `src`.
pub fn solve(src: &str, cap: usize) -> Result<Solved, AspError> {
    let statements = parse_program(src)?;
    let prog = ground(&statements)?;
    let e = enumerate_models(&prog, cap)?;
    Ok(Solved { models: e.models, exhausted: e.exhausted, warnings: prog.warnings })
}
