use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] ph_bspline::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for rejected input, 1 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use ph_bspline::Error as E;
        match self {
            CliError::Input(_) | CliError::Json(_) | CliError::Io(_) => 2,
            CliError::Library(e) => match e {
                E::NonIncreasing(_)
                | E::TooFewKnots(_)
                | E::EmptyDomain
                | E::MultiplicityTooHigh { .. }
                | E::ModeMismatch(_)
                | E::IndexOutOfRange { .. }
                | E::OutOfDomain { .. }
                | E::ShapeMismatch(_)
                | E::UnsupportedCase(_)
                | E::ZeroTangent
                | E::InvalidInput(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
