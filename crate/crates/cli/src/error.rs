use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Config(String),

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] blendflow_core::Error),

    #[error("certification impossible: beta = omega_bar - M - N = {omega_bar:e} - {m:e} - {n:e} = {beta:e} <= 0")]
    BetaNonPositive { m: f64, n: f64, omega_bar: f64, beta: f64 },

    #[error("certification failed")]
    CertificationFailed,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        use blendflow_core::Error as E;
        fn core_code(e: &E) -> i32 {
            match e {
                E::Config(_) | E::Degenerate(_) => 2,
                E::Sonic { .. } => 5,
                E::InCell { source, .. } => core_code(source),
                _ => 3,
            }
        }
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => core_code(e),
            CliError::BetaNonPositive { .. } => 4,
            CliError::CertificationFailed => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv: {e}"))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
