use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("k = 0 is a singular point of {0}")]
    SingularPoint(&'static str),

    #[error("column {column} is outside its boundedness region at k = {k}")]
    UnboundedColumn { column: usize, k: num_complex::Complex64 },

    #[error("step size control failed at {at}: {reason}")]
    StepControl { at: f64, reason: String },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("linear system rejected at (x, t) = ({x}, {t}): condition estimate {cond:.3e}")]
    Conditioning { x: f64, t: f64, cond: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Assumption(_) => 2,
            Error::SingularPoint(_)
            | Error::UnboundedColumn { .. }
            | Error::StepControl { .. }
            | Error::Conditioning { .. }
            | Error::Numerical(_) => 3,
            Error::InvalidInput(_)
            | Error::Schema(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 4,
        }
    }
}
