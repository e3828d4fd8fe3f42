use std::fmt;
use std::process::ExitCode;

use eigentomo::Error;

/// Exit status 2 for input problems, 1 for failed checks.
#[derive(Debug)]
pub enum Failure {
    BadInput(String),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::BadInput(_) => ExitCode::from(2),
            Failure::Check(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::BadInput(m) => write!(f, "bad input: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::FarFaceInconsistent { .. }
            | Error::RankDeficient { .. }
            | Error::Svd(_)
            | Error::NonPeriodicAntiderivative { .. }
            | Error::MissingDerivatives(_) => Failure::Check(e.to_string()),
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::BadInput(e.to_string())
    }
}
