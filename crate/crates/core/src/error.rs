use std::fmt;

use thiserror::Error;

/// 1-based source position inside a map definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Position, msg: String },
    #[error("mixed degree at {pos}: monomial `{monomial}` in f{component} has degree {found}, expected {expected}")]
    MixedDegree {
        pos: Position,
        component: usize,
        monomial: String,
        found: u32,
        expected: u32,
    },
    #[error("dimension mismatch at {pos}: declared n = {declared} but {found} components given")]
    DimensionMismatch {
        pos: Position,
        declared: usize,
        found: usize,
    },
    #[error("invalid kappa at {pos}: {value} (must be > 0)")]
    InvalidKappa { pos: Position, value: String },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::MixedDegree { pos, .. }
            | ParseError::DimensionMismatch { pos, .. }
            | ParseError::InvalidKappa { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("map is not differentiable at the origin")]
    UndefinedAtOrigin,
    #[error("no coercivity bracket: sphere minimum c0 is zero")]
    NoBracket,
    #[error("hypotheses not satisfied: {0}")]
    Precondition(String),
    #[error("singular Jacobian encountered at {point:?}")]
    SingularJacobian { point: Vec<f64> },
    #[error("continuation failed at t = {t}: {reason}")]
    ContinuationFailed {
        t: f64,
        xi: Vec<f64>,
        reason: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
