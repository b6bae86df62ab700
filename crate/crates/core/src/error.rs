use thiserror::Error;

/// Errors raised by model construction, propagation and scenario handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("equilibrium solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(
        "structurally unstable chain: transverse mode {mode} has squared frequency {freq_sq:.6e}"
    )]
    StructuralInstability { mode: usize, freq_sq: f64 },

    #[error("detuning {detuning} is resonant with transverse mode {mode} (frequency {freq})")]
    ResonantDetuning {
        detuning: f64,
        mode: usize,
        freq: f64,
    },

    #[error(
        "source driving is not supported by the single-excitation generator (gamma_source = {0})"
    )]
    SourceInSector(f64),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("state invariant violated at t = {t}: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("steady state is degenerate: null space has dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("scenario is invalid:\n  - {}", .0.join("\n  - "))]
    Scenario(Vec<String>),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
