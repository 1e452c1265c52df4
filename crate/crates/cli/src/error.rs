use std::fmt;

/// Everything the command line can fail with.
///
/// `Display` renders a single `key=value` line so scripts can parse it.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("kind=unknown_key key={key}")]
    UnknownKey { key: String },
    #[error("kind=type_mismatch key={key} expected={expected} found={found}")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("kind=invalid_value key={key} reason={}", quoted(.reason))]
    InvalidValue { key: String, reason: String },
    #[error("kind=missing_key key={key}")]
    MissingKey { key: String },
    #[error("kind=config_syntax source={} reason={}", quoted(.source_name), quoted(.reason))]
    Syntax { source_name: String, reason: String },
    #[error("kind=io path={} reason={}", quoted(.path), quoted(&.source.to_string()))]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("kind=csv reason={}", quoted(&.0.to_string()))]
    Csv(#[from] csv::Error),
    #[error("kind=model reason={}", quoted(&.0.to_string()))]
    Model(#[from] mvoac::Error),
}

impl CliError {
    pub fn invalid(key: &str, reason: impl fmt::Display) -> Self {
        CliError::InvalidValue {
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }

    /// Exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Csv(_) | CliError::Model(_) => 1,
            _ => 2,
        }
    }
}

fn quoted(s: &str) -> String {
    let flat: String = s
        .chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect();
    format!("\"{}\"", flat.trim().replace('"', "'"))
}

pub type CliResult<T> = std::result::Result<T, CliError>;
