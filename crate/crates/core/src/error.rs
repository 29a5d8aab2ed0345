use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    /// In/out arrays that cannot describe a degree sequence at all.
    #[error("structural error: {0}")]
    Structural(String),

    /// Sum of in-degrees differs from sum of out-degrees.
    #[error("constraint violation: sum of in-degrees {in_sum} != sum of out-degrees {out_sum}")]
    SumMismatch { in_sum: usize, out_sum: usize },

    /// Bounded-degree assumption (minimum degree two) violated.
    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("{0} censored samples present")]
    Censored(usize),

    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    /// Configuration problem; `line` is set when it comes from a file line.
    #[error("config error{}: {msg}", line_suffix(.line))]
    Config { line: Option<usize>, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn line_suffix(line: &Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl Error {
    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by the experiment configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
