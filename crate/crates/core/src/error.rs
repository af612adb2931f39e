use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient `{name}` is not finite at t = {t}")]
    CoefficientEval { name: &'static str, t: f64 },

    #[error("invalid medium: `{name}` = {value} at t = {t} violates {requirement}")]
    InvalidMedium {
        name: &'static str,
        t: f64,
        value: f64,
        requirement: &'static str,
    },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid initial data: {0}")]
    InvalidInit(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("step size underflow at t = {t} (h = {step:e}); problem may be stiff")]
    Stiffness { t: f64, step: f64 },

    #[error("integrator exceeded {max_steps} steps before t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("homogeneous solution is singular at t = {t} (|mu0| = {mu0:e})")]
    Singularity { t: f64, mu0: f64 },

    #[error("quadrature crosses a turning point of mu0' near t = {t}")]
    TurningPoint { t: f64 },

    #[error("direct integration blew up; last good t = {t}")]
    BlowUp { t: f64 },

    #[error("invalid state at t = {t}: {reason}")]
    InvalidState { t: f64, reason: &'static str },

    #[error("noise path {path} rejected after {attempts} attempts: positivity violated")]
    PathRejected { path: u64, attempts: u32 },

    #[error("ensemble failed: {failed} of {total} paths failed")]
    Ensemble { failed: usize, total: usize },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{stage}: {inner}")]
    Stage {
        stage: &'static str,
        inner: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Tags the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                inner: Box::new(other),
            },
        }
    }

    /// The underlying error with any stage tag removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { inner, .. } => inner.root(),
            other => other,
        }
    }

    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// Whether the error stems from the input rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidMedium { .. }
                | Error::InvalidCoefficient(_)
                | Error::InvalidInit(_)
                | Error::InvalidGrid(_)
                | Error::InvalidTable(_)
                | Error::Config { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
