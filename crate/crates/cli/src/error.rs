use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{flag}: {source}")]
    Flag {
        flag: String,
        #[source]
        source: adelic_lab::Error,
    },
    #[error(transparent)]
    Core(#[from] adelic_lab::Error),
    #[error("config {path}, line {line}: {message}")]
    Config { path: String, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn flag(flag: &str, source: adelic_lab::Error) -> Self {
        CliError::Flag {
            flag: format!("--{flag}"),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        let core = match self {
            CliError::Flag { source, .. } => source,
            CliError::Core(e) => e,
            CliError::Config { .. } | CliError::Usage(_) => return ExitCode::from(2),
            _ => return ExitCode::from(1),
        };
        ExitCode::from(match core {
            adelic_lab::Error::Parse { .. } | adelic_lab::Error::NotPrime(_) => 2,
            adelic_lab::Error::CapOverflow { .. } => 4,
            _ => 3,
        })
    }

    pub fn advisory(&self) -> Option<&'static str> {
        match self {
            CliError::Flag {
                source: adelic_lab::Error::CapOverflow { .. },
                ..
            }
            | CliError::Core(adelic_lab::Error::CapOverflow { .. }) => {
                Some("raise --max-points or shrink the box/window")
            }
            _ => None,
        }
    }
}
