use thiserror::Error;

/// Failures raised by a single objective evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("evaluation budget of {budget} trials exhausted")]
    BudgetExhausted { budget: usize },
    #[error("evaluation halted by observer after {trials} trials")]
    Halted { trials: usize },
    #[error("objective returned non-finite value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },
    #[error("point {point:?} lies outside the search domain")]
    OutsideDomain { point: Vec<f64> },
}

impl EvalError {
    /// Budget exhaustion and observer halts end a run cleanly; everything else aborts it.
    pub fn is_clean_stop(&self) -> bool {
        matches!(self, EvalError::BudgetExhausted { .. } | EvalError::Halted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("estimate {l} does not exceed interval slope {slope}")]
    SlopeCondition { slope: f64, l: f64 },
    #[error("generation error: {0}")]
    Generation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
