use thiserror::Error;

/// Failure to read a program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message} (found `{token}`)")]
    Syntax { line: usize, column: usize, token: String, message: String },
    /// Valid input for a full solver that this fragment does not cover.
    #[error("unsupported construct at {line}:{column}: {construct}")]
    Unsupported { line: usize, column: usize, construct: String },
}

impl ParseError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self, ParseError::Unsupported { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("unsafe variable {variable} in `{statement}`")]
    UnsafeVariable { variable: String, statement: String },
    #[error("arithmetic error in `{statement}`: {message}")]
    Arithmetic { message: String, statement: String },
    #[error("unsupported construct in `{statement}`: {construct}")]
    Unsupported { construct: String, statement: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("model cap must be at least 1")]
    InvalidCap,
    #[error("search space of {size} candidate selections exceeds the oracle bound {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
}

/// Any failure between source text and models.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AspError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
