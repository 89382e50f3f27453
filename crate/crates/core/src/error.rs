use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inadmissible state {state:?}: {reason}")]
    InadmissibleState { state: Vec<f64>, reason: &'static str },

    #[error("diverged iteration at p = {iteration}")]
    DivergedIteration { iteration: usize },

    #[error("predictor did not reach tolerance {tolerance:e} within {iterations} iterations (last change {last_change:e})")]
    NonContraction {
        iterations: usize,
        tolerance: f64,
        last_change: f64,
    },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("vacuum is generated by the Riemann data")]
    Vacuum,

    #[error("step {step} failed in cell {cell}: {source}")]
    Step {
        step: usize,
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
