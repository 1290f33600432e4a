use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphonError {
    #[error("point ({x}, {y}) outside the unit square")]
    Domain { x: f64, y: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Power iteration or Picard iteration ran out of iterations.
    #[error("{what} did not converge after {iters} iterations (last estimate {last}, residual {residual})")]
    NoConvergence {
        what: &'static str,
        iters: usize,
        last: f64,
        residual: f64,
    },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("degenerate bound: zero maximum degree with nonzero operator-norm discrepancy {op_norm}")]
    ZeroDegree { op_norm: f64 },

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl GraphonError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        GraphonError::Parameter(msg.into())
    }

    /// True for errors that come from the numerics rather than from inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            GraphonError::NoConvergence { .. }
                | GraphonError::NonFinite { .. }
                | GraphonError::ZeroDegree { .. }
        )
    }
}

impl From<std::io::Error> for GraphonError {
    fn from(e: std::io::Error) -> Self {
        GraphonError::Io(e.to_string())
    }
}

pub type Result<T, E = GraphonError> = std::result::Result<T, E>;
