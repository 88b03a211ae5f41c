use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_SCHEMA: i32 = 5;
pub const EXIT_PARAMETER: i32 = 6;
pub const EXIT_COMPUTE: i32 = 7;

/// Shown under every help screen.
pub const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success
  2  usage or config-file error (unknown key, bad value, missing input setting)
  3  input or output path unreadable / unwritable
  4  malformed input file (edge list, node table, manifest)
  5  schema mismatch (missing or misaligned column)
  6  invalid parameter (ratios, K, beta, gamma, cutoffs, ...)
  7  undefined result (empty graph, zero-variance statistic)
On failure a single JSON object {\"error\", \"exit_code\", \"message\"} is written to stderr.";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] topoconc::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn path(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Path {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use topoconc::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Path { .. } => "io",
            CliError::Core(e) => match e {
                E::Io(_) => "io",
                E::Parse { .. } | E::Json(_) => "parse",
                E::Schema(_) => "schema",
                E::InvalidRatio(_)
                | E::InvalidParameter(_)
                | E::InvalidWeights(_)
                | E::InvalidScores(_)
                | E::NotFound(_)
                | E::MissingTimestamp { .. } => "invalid-parameter",
                E::EmptyGraph | E::UndefinedStatistic(_) => "undefined",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => EXIT_CONFIG,
            "io" => EXIT_INPUT,
            "parse" => EXIT_PARSE,
            "schema" => EXIT_SCHEMA,
            "invalid-parameter" => EXIT_PARAMETER,
            _ => EXIT_COMPUTE,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Report {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error report serializes")
    }
}
