use std::path::PathBuf;

use serde::Serialize;

/// Everything that can stop an experiment run.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The configuration is unusable as given.
    #[error("{message}")]
    Config {
        field: Option<&'static str>,
        message: String,
    },
    /// A guaranteed property failed on computed data; this indicates a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    pub fn config(field: &'static str, message: impl Into<String>) -> Self {
        RunError::Config {
            field: Some(field),
            message: message.into(),
        }
    }

    /// Short machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Config { .. } => "invalid_config",
            RunError::Invariant(_) => "invariant_violation",
            RunError::Io { .. } => "io_error",
            RunError::Parse { .. } => "parse_error",
            RunError::Csv(_) | RunError::Json(_) => "output_error",
        }
    }

    /// Process exit status: 2 for bad input, 1 for a violated invariant,
    /// 3 for output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } | RunError::Parse { .. } => 2,
            RunError::Invariant(_) => 1,
            RunError::Io { .. } | RunError::Csv(_) | RunError::Json(_) => 3,
        }
    }

    fn field(&self) -> Option<&'static str> {
        match self {
            RunError::Config { field, .. } => *field,
            _ => None,
        }
    }

    /// `{"code", "message", "field"}` on one line.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            code: &'a str,
            message: String,
            field: Option<&'a str>,
        }
        let line = Line {
            code: self.code(),
            message: self.to_string(),
            field: self.field(),
        };
        serde_json::to_string(&line).expect("error line serializes")
    }
}

/// Maps core errors raised while validating the configuration to the config
/// field they concern.
pub(crate) fn config_error(field: &'static str, err: lpcont_core::Error) -> RunError {
    use lpcont_core::Error as E;
    let field = match &err {
        E::InvalidParam { name, .. } => match *name {
            "p_star" => "pstar",
            "mu_total" => "weights",
            other => other,
        },
        E::EpsilonOutOfRange { .. } => "epsilon",
        E::BadWeight { .. } | E::EmptySpace => "weights",
        E::BadDimension => "dim",
        E::BadKernel(_) | E::ZeroLipschitzViolated { .. } => "kernel",
        _ => field,
    };
    RunError::Config {
        field: Some(field),
        message: err.to_string(),
    }
}

/// Maps core errors raised on computed data to invariant violations.
pub(crate) fn invariant_error(err: lpcont_core::Error) -> RunError {
    RunError::Invariant(err.to_string())
}
